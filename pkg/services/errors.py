"""Error types raised by the kernel.

Every error carries a short machine-readable ``code`` so that the CLI and the
HTTP routes can report it without string matching.
"""
from typing import Optional, Sequence


class KernelError(Exception):
    """Base class for every failure raised by the kernel."""
    code = 'kernel_error'

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        data = {'error': self.code, 'message': self.message}
        data.update({k: v for k, v in self.details.items() if v is not None})
        return data


class InputError(KernelError):
    """Errors caused by the user's input (exit code 2)."""
    code = 'input_error'


class UnknownSymbol(InputError):
    code = 'unknown_symbol'


class TypeMismatch(InputError):
    code = 'type_mismatch'


class ArityError(InputError):
    code = 'arity_error'


class NotFreeFor(InputError):
    code = 'not_free_for'


class SideConditionViolated(InputError):
    """A rule or tactic proviso failed; ``proviso`` names which one."""
    code = 'side_condition_violated'

    def __init__(self, message: str, proviso: str, path: Optional[Sequence[int]] = None):
        super().__init__(message, proviso=proviso, path=list(path) if path is not None else None)
        self.proviso = proviso
        self.path = list(path) if path is not None else []


class ShapeMismatch(InputError):
    code = 'shape_mismatch'


class NoClosedTerm(InputError):
    code = 'no_closed_term'


class NotMonic(InputError):
    code = 'not_monic'


class NotTotal(InputError):
    code = 'not_total'


class NotSingleValued(InputError):
    code = 'not_single_valued'


class NotSubgraph(InputError):
    code = 'not_subgraph'


class NotInCodomain(InputError):
    code = 'not_in_codomain'


class NotFromUniversal(InputError):
    code = 'not_from_universal'


class VariableClash(InputError):
    code = 'variable_clash'


class IllTypedTable(InputError):
    code = 'ill_typed_table'


class SexprSyntaxError(InputError):
    """Malformed s-expression input; positions are 1-based line/column and 0-based offset."""
    code = 'syntax_error'

    def __init__(self, message: str, line: int, column: int, offset: int):
        super().__init__(message, line=line, column=column, offset=offset)
        self.line = line
        self.column = column
        self.offset = offset


class ResolutionError(InputError):
    code = 'resolution_error'


class MissingComponent(InputError):
    code = 'missing_component'


class BudgetExceeded(KernelError):
    """Enumeration would pass the configured row or carrier cap (exit code 3)."""
    code = 'budget_exceeded'
