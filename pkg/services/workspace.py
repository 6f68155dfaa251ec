"""Workspaces: s-expression files naming a signature, a theory, an interpretation and the objects to check.

One entry per top-level list::

    (sig (ground A) (fn f (A B) C) ...)
    (nullstellensatz)
    (axiom name (ctx phi ...) psi)
    (term name t)
    (sequent name (ctx phi ...) psi)
    (interp (carrier A n) ... (table f i0 i1 ...))
    (sset name X)
    (function name graph dom cod)
    (object name n)
    (arrow name dom cod i0 i1 ...)
    (proof name tree)
    (translate name theta f (y B) (x A))

``(ref name)`` inside a term refers to an earlier term or S-set entry.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple as Tup

from models import (
    EXIT_BUDGET_EXCEEDED, EXIT_INPUT_ERROR, CheckRecord, Command, CommandReport, ProofRecord, SequentVerdict,
    TermValue, TranslationRecord,
)
from services.deduction import (
    AxiomLeaf, AxiomSchema, CheckMode, DerivedNode, HypothesisLeaf, ProofNode, Rule, RuleNode, Sequent,
    Theory, check_proof,
)
from services.errors import ArityError, BudgetExceeded, KernelError, MissingComponent, ResolutionError
from services.finset_model import (
    Budget, FinInterpretation, equivalent, eval_term, find_counterexample, format_value,
)
from services.generators import seeded_rng
from services.language import (
    ONE, Product, Signature, Term, Var, elaborate, format_type, parse_binder, parse_type, product,
)
from services.set_theory import LSet, SFunction, mk_sfunction, sset_eq
from services.sexpr import (
    binder_sexpr, context_sexpr, proof_sexpr, read_sexprs, term_sexpr, type_sexpr, write_sexpr,
)
from services.sugar import read_sugar
from services.tactics import TACTICS
from services.topos_battery import topos_battery
from services.translation import (
    InternalLanguage, canonical_translation, internal_language, preimage_translate,
    preimage_translate_definitional,
)

logger = logging.getLogger(__name__)


@dataclass
class TranslationEntry:
    theta: Term
    function: str
    y: Var
    x: Var


@dataclass
class Workspace:
    signature: Signature
    axioms: Dict[str, Sequent] = field(default_factory=dict)
    terms: Dict[str, Term] = field(default_factory=dict)
    sequents: Dict[str, Sequent] = field(default_factory=dict)
    ground_sizes: Optional[Dict[str, int]] = None
    index_tables: Dict[str, List[int]] = field(default_factory=dict)
    ssets: Dict[str, LSet] = field(default_factory=dict)
    functions: Dict[str, SFunction] = field(default_factory=dict)
    objects: Dict[str, int] = field(default_factory=dict)
    arrows: Dict[str, Tup[str, str, List[int]]] = field(default_factory=dict)
    proofs: Dict[str, ProofNode] = field(default_factory=dict)
    translations: Dict[str, TranslationEntry] = field(default_factory=dict)

    @property
    def theory(self) -> Theory:
        return Theory(self.signature, dict(self.axioms))

    @property
    def has_interpretation(self) -> bool:
        return self.ground_sizes is not None

    def interpretation(self, budget: Optional[Budget] = None) -> FinInterpretation:
        if self.ground_sizes is None:
            raise MissingComponent("workspace has no interpretation")
        interp = FinInterpretation.from_index_tables(self.signature, self.ground_sizes, self.index_tables)
        return interp.with_budget(budget) if budget is not None else interp


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_NAMED = {'axiom', 'term', 'sequent', 'sset', 'function', 'object', 'arrow', 'proof', 'translate'}


class WorkspaceParser:
    """Resolves raw entries against the signature, in file order."""

    def __init__(self, forms: list):
        self.forms = forms
        self.names = set()
        self.ws: Optional[Workspace] = None

    def parse(self) -> Workspace:
        sigs = [f for f in self.forms if isinstance(f, list) and f and f[0] == 'sig']
        if len(sigs) != 1:
            raise MissingComponent(f"workspace needs exactly one sig entry, found {len(sigs)}")
        nullstellensatz = any(f == ['nullstellensatz'] for f in self.forms)
        self.ws = Workspace(self._signature(sigs[0], nullstellensatz))
        for form in self.forms:
            if not isinstance(form, list) or not form or not isinstance(form[0], str):
                raise ResolutionError(f"malformed entry: {write_sexpr(form)}")
            head = form[0]
            if head in ('sig', 'nullstellensatz'):
                continue
            if head in _NAMED:
                self._claim(form)
            handler = getattr(self, f"_entry_{head}", None)
            if handler is None:
                raise ResolutionError(f"unknown entry kind: {head}", symbol=head)
            handler(form[1:])
        logger.info(f"Workspace parsed: {len(self.forms)} entries")
        return self.ws

    def _claim(self, form):
        if len(form) < 2 or not isinstance(form[1], str):
            raise ResolutionError(f"{form[0]} entry needs a name")
        if form[1] in self.names:
            raise ResolutionError(f"name {form[1]} is used twice", symbol=form[1])
        self.names.add(form[1])

    # -- signature ----------------------------------------------------------

    def _signature(self, form, nullstellensatz: bool) -> Signature:
        grounds, symbols = [], []
        for decl in form[1:]:
            if not isinstance(decl, list) or not decl:
                raise ResolutionError(f"malformed signature declaration: {write_sexpr(decl)}")
            if decl[0] == 'ground' and len(decl) == 2:
                grounds.append(decl[1])
            elif decl[0] == 'fn' and len(decl) == 4 and isinstance(decl[2], list):
                symbols.append(decl[1:])
            else:
                raise ResolutionError(f"malformed signature declaration: {write_sexpr(decl)}")
        shell = Signature(tuple(grounds))
        typed = [(name, product(*(parse_type(shell, a) for a in args)), parse_type(shell, res))
                 for name, args, res in symbols]
        return Signature.build(grounds, typed, nullstellensatz)

    # -- terms --------------------------------------------------------------

    def _extension(self, sig, raw, go):
        if raw and raw[0] == 'ref':
            if len(raw) != 2:
                raise ArityError("ref takes one name")
            name = raw[1]
            if name in self.ws.terms:
                return self.ws.terms[name]
            if name in self.ws.ssets:
                return self.ws.ssets[name].term
            raise ResolutionError(f"no term named {name} before this point", symbol=name)
        return read_sugar(sig, raw, go)

    def term(self, raw) -> Term:
        return elaborate(self.ws.signature, raw, self._extension)

    def _context(self, raw) -> List[Term]:
        if not isinstance(raw, list) or not raw or raw[0] != 'ctx':
            raise ResolutionError(f"expected (ctx ...), got {write_sexpr(raw)}")
        return [self.term(r) for r in raw[1:]]

    def _sequent(self, args) -> Sequent:
        if len(args) != 2:
            raise ArityError("a sequent is (ctx ...) followed by a conclusion")
        return Sequent(tuple(self._context(args[0])), self.term(args[1]))

    def _entry_axiom(self, args):
        self.ws.axioms[args[0]] = self._sequent(args[1:])

    def _entry_sequent(self, args):
        self.ws.sequents[args[0]] = self._sequent(args[1:])

    def _entry_term(self, args):
        if len(args) != 2:
            raise ArityError("term takes a name and a term")
        self.ws.terms[args[0]] = self.term(args[1])

    def _entry_sset(self, args):
        if len(args) != 2:
            raise ArityError("sset takes a name and a closed set term")
        self.ws.ssets[args[0]] = LSet(self.term(args[1]))

    def _entry_function(self, args):
        if len(args) != 4:
            raise ArityError("function takes a name, a graph, a domain and a codomain")
        graph, dom, cod = (LSet(self.term(r)) for r in args[1:])
        self.ws.functions[args[0]] = SFunction(graph, dom, cod)

    # -- models -------------------------------------------------------------

    def _entry_interp(self, args):
        if self.ws.ground_sizes is not None:
            raise ResolutionError("workspace has two interpretations")
        sizes, tables = {}, {}
        for decl in args:
            if isinstance(decl, list) and len(decl) == 3 and decl[0] == 'carrier':
                sizes[decl[1]] = _int(decl[2])
            elif isinstance(decl, list) and len(decl) >= 2 and decl[0] == 'table':
                tables[decl[1]] = [_int(i) for i in decl[2:]]
            else:
                raise ResolutionError(f"malformed interpretation declaration: {write_sexpr(decl)}")
        self.ws.ground_sizes, self.ws.index_tables = sizes, tables
        self.ws.interpretation()

    def _entry_object(self, args):
        if len(args) != 2:
            raise ArityError("object takes a name and a size")
        self.ws.objects[args[0]] = _int(args[1])

    def _entry_arrow(self, args):
        if len(args) < 3:
            raise ArityError("arrow takes a name, a domain, a codomain and a table")
        name, dom, cod = args[:3]
        for side in (dom, cod):
            if side not in self.ws.objects:
                raise ResolutionError(f"arrow {name} refers to unknown object {side}", symbol=side)
        self.ws.arrows[name] = (dom, cod, [_int(i) for i in args[3:]])

    # -- proofs and translations --------------------------------------------

    def _param(self, raw):
        if isinstance(raw, str) and raw.lstrip('-').isdigit():
            return int(raw)
        return self.term(raw)

    def proof(self, raw) -> ProofNode:
        if not isinstance(raw, list) or len(raw) < 2:
            raise ResolutionError(f"malformed proof node: {write_sexpr(raw)}")
        head = raw[0]
        if head == 'axiom':
            return AxiomLeaf(_enum(AxiomSchema, raw[1]), tuple(self._param(r) for r in raw[2:]))
        if head == 'hyp':
            return HypothesisLeaf(raw[1])
        if head in ('rule', 'derived'):
            if len(raw) < 3 or not isinstance(raw[2], list):
                raise ResolutionError(f"{head} node needs a name and a parameter list")
            params = tuple(self._param(r) for r in raw[2])
            premises = [self.proof(r) for r in raw[3:]]
            if head == 'rule':
                return RuleNode(_enum(Rule, raw[1]), params, premises)
            if raw[1] not in TACTICS:
                raise ResolutionError(f"unknown tactic: {raw[1]}", symbol=raw[1])
            return DerivedNode(raw[1], params, premises)
        raise ResolutionError(f"unknown proof node: {head}", symbol=head)

    def _entry_proof(self, args):
        if len(args) != 2:
            raise ArityError("proof takes a name and a tree")
        self.ws.proofs[args[0]] = self.proof(args[1])

    def _entry_translate(self, args):
        if len(args) != 5:
            raise ArityError("translate takes a name, a formula, a function and two binders")
        name, theta, fname, y, x = args
        if fname not in self.ws.functions:
            raise ResolutionError(f"no function named {fname} before this point", symbol=fname)
        sig = self.ws.signature
        self.ws.translations[name] = TranslationEntry(self.term(theta), fname, parse_binder(sig, y),
                                                      parse_binder(sig, x))


def _int(raw) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ResolutionError(f"expected an integer, got {write_sexpr(raw)}")


def _enum(kind, raw):
    try:
        return kind(raw)
    except ValueError:
        raise ResolutionError(f"unknown {kind.__name__}: {raw}", symbol=raw)


def parse(text: str) -> Workspace:
    return WorkspaceParser(read_sexprs(text)).parse()


# ---------------------------------------------------------------------------
# Canonical printing
# ---------------------------------------------------------------------------

def _arg_types(t):
    if t == ONE:
        return []
    if isinstance(t, Product):
        return [type_sexpr(f) for f in t.items]
    return [type_sexpr(t)]


def workspace_sexprs(ws: Workspace) -> list:
    sig = ws.signature
    forms = [['sig'] + [['ground', g] for g in sig.ground_types]
             + [['fn', s.name, _arg_types(s.arg_type), type_sexpr(s.result_type)]
                for s in sig.function_symbols.values()]]
    if sig.nullstellensatz:
        forms.append(['nullstellensatz'])
    for name, s in ws.axioms.items():
        forms.append(['axiom', name, context_sexpr(s.context), term_sexpr(s.conclusion)])
    for name, t in ws.terms.items():
        forms.append(['term', name, term_sexpr(t)])
    for name, s in ws.sequents.items():
        forms.append(['sequent', name, context_sexpr(s.context), term_sexpr(s.conclusion)])
    if ws.ground_sizes is not None:
        forms.append(['interp'] + [['carrier', g, str(n)] for g, n in ws.ground_sizes.items()]
                     + [['table', f] + [str(i) for i in idx] for f, idx in ws.index_tables.items()])
    for name, X in ws.ssets.items():
        forms.append(['sset', name, term_sexpr(X.term)])
    for name, f in ws.functions.items():
        forms.append(['function', name, term_sexpr(f.graph.term), term_sexpr(f.dom.term), term_sexpr(f.cod.term)])
    for name, n in ws.objects.items():
        forms.append(['object', name, str(n)])
    for name, (dom, cod, table) in ws.arrows.items():
        forms.append(['arrow', name, dom, cod] + [str(i) for i in table])
    for name, tree in ws.proofs.items():
        forms.append(['proof', name, proof_sexpr(tree)])
    for name, tr in ws.translations.items():
        forms.append(['translate', name, term_sexpr(tr.theta), tr.function, binder_sexpr(tr.y), binder_sexpr(tr.x)])
    return forms


def print_workspace(ws: Workspace) -> str:
    return '\n'.join(write_sexpr(f) for f in workspace_sexprs(ws)) + '\n'


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@dataclass
class RunFlags:
    mode: CheckMode = CheckMode.KERNEL
    budget: Optional[int] = None
    threads: Optional[int] = None
    seed: int = 0
    max_carrier: Optional[int] = None

    def to_budget(self) -> Budget:
        defaults = Budget()
        return Budget(max_rows=self.budget or defaults.max_rows,
                      max_carrier=self.max_carrier or defaults.max_carrier,
                      threads=self.threads or defaults.threads)


def run(command: Command, ws: Workspace, flags: Optional[RunFlags] = None) -> CommandReport:
    """Dispatch a command over a parsed workspace; the report's exit code is 0 iff every record passed."""
    flags = flags or RunFlags()
    runner = {
        Command.CHECK: _run_check,
        Command.EVAL: _run_eval,
        Command.TRANSLATE: _run_translate,
        Command.TOPOS: _run_topos,
    }[command]
    report = CommandReport(command, runner(ws, flags))
    logger.info(f"Command {command.value} finished: {len(report.records)} records, exit code {report.exit_code}")
    return report


def _run_check(ws: Workspace, flags: RunFlags) -> List[ProofRecord]:
    if not ws.proofs:
        raise MissingComponent("check needs at least one proof entry")
    theory = ws.theory
    return [ProofRecord(name, check_proof(theory, tree, flags.mode)) for name, tree in ws.proofs.items()]


def _run_eval(ws: Workspace, flags: RunFlags) -> list:
    interp = ws.interpretation(flags.to_budget())
    named = list(ws.axioms.items()) + list(ws.sequents.items())
    if not named and not ws.terms:
        raise MissingComponent("eval needs sequents, axioms or terms")
    records = []
    for name, s in named:
        found = find_counterexample(interp, s.context, s.conclusion, flags.threads)
        witness = None if found is None else {v.name: format_value(val) for v, val in found.items()}
        records.append(SequentVerdict(name, str(s), found is None, witness))
    for name, t in ws.terms.items():
        value = format_value(eval_term(interp, t)) if not t.free_vars else None
        records.append(TermValue(name, write_sexpr(term_sexpr(t)), format_type(t.type), value))
    return records


def _run_translate(ws: Workspace, flags: RunFlags) -> List[TranslationRecord]:
    if not ws.translations:
        raise MissingComponent("translate needs at least one translate entry")
    interp = ws.interpretation(flags.to_budget())
    records = []
    for name, tr in ws.translations.items():
        raw = ws.functions[tr.function]
        f = mk_sfunction(interp, raw.graph, raw.dom, raw.cod)
        lemma = preimage_translate(tr.theta, f, tr.y, tr.x)
        definitional = preimage_translate_definitional(interp, tr.theta, f, tr.y, tr.x)
        agree = equivalent(interp, lemma.formula, definitional.formula)
        records.append(TranslationRecord(name, write_sexpr(term_sexpr(lemma.formula)),
                                         write_sexpr(term_sexpr(definitional.formula)), agree))
    return records


def model_language(ws: Workspace, interp: FinInterpretation) -> InternalLanguage:
    """Internal language of the loaded model with the declared S-sets and S-functions registered."""
    if not ws.ssets and not ws.functions:
        return canonical_translation(interp).lang
    lang = InternalLanguage(interp)
    for name, X in ws.ssets.items():
        lang.register_sset(name, X)

    def object_for(fname: str, side: str, X: LSet) -> str:
        for name, Y in lang.ssets.items():
            if Y.term.type == X.term.type and sset_eq(lang.interp, X, Y):
                return name
        name = f"{fname}_{side}"
        lang.register_sset(name, X)
        return name

    for name, raw in ws.functions.items():
        f = mk_sfunction(lang.interp, raw.graph, raw.dom, raw.cod)
        lang.register_sfunction(name, f, object_for(name, 'dom', f.dom), object_for(name, 'cod', f.cod))
    return lang


def _run_topos(ws: Workspace, flags: RunFlags) -> List[CheckRecord]:
    budget = flags.to_budget()
    langs = []
    if ws.objects:
        arrows = {name: (dom, cod, dict(enumerate(table))) for name, (dom, cod, table) in ws.arrows.items()}
        langs.append(internal_language(ws.objects, arrows, budget))
    if ws.has_interpretation:
        langs.append(model_language(ws, ws.interpretation(budget)))
    if not langs:
        raise MissingComponent("topos needs an interpretation or object entries")
    rng = seeded_rng(flags.seed)
    records: List[CheckRecord] = []
    for lang in langs:
        records.extend(topos_battery(lang, rng))
    return records


@dataclass
class Execution:
    """Outcome of running a command on workspace text, with the process exit code."""
    exit_code: int
    report: Optional[dict] = None
    error: Optional[dict] = None

    def to_dict(self) -> dict:
        data = {'exit_code': self.exit_code}
        if self.report is not None:
            data['report'] = self.report
        if self.error is not None:
            data['error'] = self.error
        return data


def execute(command: Command, source: str, flags: Optional[RunFlags] = None) -> Execution:
    """Parse and run; kernel errors become exit codes 2 (input) and 3 (budget)."""
    try:
        report = run(command, parse(source), flags)
    except BudgetExceeded as e:
        logger.warning(f"Budget exceeded during {command.value}: {e.message}")
        return Execution(EXIT_BUDGET_EXCEEDED, error=e.to_dict())
    except KernelError as e:
        logger.info(f"Input rejected during {command.value}: {e.message}")
        return Execution(EXIT_INPUT_ERROR, error=e.to_dict())
    return Execution(report.exit_code, report=report.to_dict())
