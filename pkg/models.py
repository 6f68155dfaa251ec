from database import db
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional
import uuid

from services.deduction import CheckMode


class Command(Enum):
    CHECK = "check"
    EVAL = "eval"
    TRANSLATE = "translate"
    TOPOS = "topos"


class JobStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


# Exit codes shared by the CLI, the HTTP surface and stored jobs
EXIT_OK = 0
EXIT_VERDICT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET_EXCEEDED = 3


@dataclass
class ProofRecord:
    """Verdict of check_proof for a named proof."""
    name: str
    verdict: Any

    @property
    def passed(self) -> bool:
        return self.verdict.ok

    def to_dict(self):
        return {'name': self.name, 'passed': self.passed, **self.verdict.to_dict()}


@dataclass
class SequentVerdict:
    """Validity of a named sequent in the loaded interpretation."""
    name: str
    sequent: str
    passed: bool
    counterexample: Optional[Dict[str, str]] = None

    def to_dict(self):
        data = {'name': self.name, 'sequent': self.sequent, 'passed': self.passed}
        if self.counterexample is not None:
            data['counterexample'] = self.counterexample
        return data


@dataclass
class TermValue:
    name: str
    term: str
    type: str
    value: Optional[str] = None

    @property
    def passed(self) -> bool:
        return True

    def to_dict(self):
        return {'name': self.name, 'passed': True, 'term': self.term, 'type': self.type, 'value': self.value}


@dataclass
class TranslationRecord:
    """Both translation forms of a named translation and whether they agree."""
    name: str
    lemma_form: str
    definitional_form: str
    passed: bool

    def to_dict(self):
        return {
            'name': self.name,
            'lemma_form': self.lemma_form,
            'definitional_form': self.definitional_form,
            'equivalent': self.passed,
        }


@dataclass
class CheckRecord:
    """One check of the internal-language battery."""
    name: str
    subject: str
    passed: bool
    detail: str = ''

    def to_dict(self):
        return {'check': self.name, 'subject': self.subject, 'passed': self.passed, 'detail': self.detail}


@dataclass
class CommandReport:
    command: Command
    records: List[Any] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_VERDICT_FAILURE

    def to_dict(self):
        return {
            'command': self.command.value,
            'passed': self.passed,
            'total': len(self.records),
            'failures': sum(1 for r in self.records if not r.passed),
            'records': [r.to_dict() for r in self.records],
        }


class KernelJob(db.Model):
    __tablename__ = 'kernel_jobs'

    id = db.Column(db.String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    command = db.Column(db.Enum(Command), nullable=False)
    source = db.Column(db.Text, nullable=False)  # workspace text
    mode = db.Column(db.Enum(CheckMode), default=CheckMode.KERNEL)
    budget = db.Column(db.Integer, nullable=True)  # environment rows
    threads = db.Column(db.Integer, nullable=True)
    status = db.Column(db.Enum(JobStatus), default=JobStatus.PENDING, index=True)
    report = db.Column(db.JSON, nullable=True)
    exit_code = db.Column(db.Integer, nullable=True)
    error = db.Column(db.Text, nullable=True)
    created_at = db.Column(db.DateTime, default=datetime.utcnow)
    started_at = db.Column(db.DateTime, nullable=True)
    finished_at = db.Column(db.DateTime, nullable=True)

    def to_dict(self):
        return {
            'id': self.id,
            'command': self.command.value,
            'mode': self.mode.value if self.mode else None,
            'budget': self.budget,
            'threads': self.threads,
            'status': self.status.value,
            'report': self.report,
            'exit_code': self.exit_code,
            'error': self.error,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'started_at': self.started_at.isoformat() if self.started_at else None,
            'finished_at': self.finished_at.isoformat() if self.finished_at else None
        }
