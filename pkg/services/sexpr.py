"""S-expression reader and canonical printer.

The reader turns text into raw trees (nested lists of atoms); elaboration
into typed terms happens in ``language.elaborate`` and ``workspace``. The
printer writes terms back with sugar restored, so print, parse and print
again yields the same text.
"""
import logging
from typing import List, Sequence, Union

from pyparsing import Forward, Group, ParseException, Regex, Suppress, ZeroOrMore, col, lineno

from services.errors import SexprSyntaxError
from services.language import (
    App, Compr, Eq, Ground, Mem, Omega, One, Power, Product, Proj, Star, Term, Tuple, TypeExpr, Var,
)
from services.sugar import match_sugar

logger = logging.getLogger(__name__)

Raw = Union[str, List['Raw']]


class SexprReader:
    """pyparsing grammar for atoms and parenthesised lists, with ``;`` line comments."""

    def __init__(self):
        lpar, rpar = Suppress('('), Suppress(')')
        self.atom = Regex(r'[^\s();]+')
        self.expression = Forward()
        self.expression <<= self.atom | Group(lpar + ZeroOrMore(self.expression) + rpar)
        self.document = ZeroOrMore(self.expression)
        self.document.ignore(Regex(r';[^\n]*'))

    def read_all(self, text: str) -> List[Raw]:
        _check_balance(text)
        try:
            result = self.document.parse_string(text, parse_all=True)
        except ParseException as e:
            raise _syntax_error(text, e.loc, f"unexpected input: {e.msg}")
        return result.as_list()

    def read_one(self, text: str) -> Raw:
        forms = self.read_all(text)
        if len(forms) != 1:
            raise _syntax_error(text, 0, f"expected one expression, found {len(forms)}")
        return forms[0]


def _syntax_error(text: str, offset: int, message: str) -> SexprSyntaxError:
    line, column = lineno(offset, text), col(offset, text)
    return SexprSyntaxError(f"{message} at line {line}, column {column}", line, column, offset)


def _check_balance(text: str):
    """Report the first stray ')' or, failing that, the innermost unclosed '('."""
    stack = []
    in_comment = False
    for offset, ch in enumerate(text):
        if in_comment:
            in_comment = ch != '\n'
        elif ch == ';':
            in_comment = True
        elif ch == '(':
            stack.append(offset)
        elif ch == ')':
            if not stack:
                raise _syntax_error(text, offset, "unmatched ')'")
            stack.pop()
    if stack:
        raise _syntax_error(text, stack[-1], "unclosed '('")


reader = SexprReader()


def read_sexprs(text: str) -> List[Raw]:
    return reader.read_all(text)


def read_sexpr(text: str) -> Raw:
    return reader.read_one(text)


def write_sexpr(raw: Raw) -> str:
    if isinstance(raw, list):
        return '(' + ' '.join(write_sexpr(r) for r in raw) + ')'
    return str(raw)


# ---------------------------------------------------------------------------
# Terms to raw trees
# ---------------------------------------------------------------------------

def type_sexpr(t: TypeExpr) -> Raw:
    if isinstance(t, One):
        return 'One'
    if isinstance(t, Omega):
        return 'Omega'
    if isinstance(t, Ground):
        return t.name
    if isinstance(t, Product):
        return ['prod'] + [type_sexpr(f) for f in t.items]
    if isinstance(t, Power):
        return ['pow', type_sexpr(t.elem)]
    raise TypeError(f"not a type expression: {t!r}")


def binder_sexpr(v: Var) -> Raw:
    return [v.name, type_sexpr(v.type)]


def term_sexpr(t: Term, resugar: bool = True) -> Raw:
    """Raw tree of a term; with resugar, expansion shapes print as their keyword."""
    if resugar:
        found = match_sugar(t)
        if found is not None:
            keyword, parts = found
            if keyword in ('true', 'false'):
                return keyword
            if keyword in ('forall', 'exists'):
                x, body = parts
                return [keyword, binder_sexpr(x), term_sexpr(body)]
            return [keyword] + [term_sexpr(p) for p in parts]
    go = lambda s: term_sexpr(s, resugar)
    if isinstance(t, Star):
        return 'star'
    if isinstance(t, Var):
        return ['var', t.name, type_sexpr(t.type)]
    if isinstance(t, App):
        return ['app', t.symbol, go(t.arg)]
    if isinstance(t, Tuple):
        return ['tuple'] + [go(i) for i in t.items]
    if isinstance(t, Proj):
        return ['proj', str(t.index), go(t.arg)]
    if isinstance(t, Compr):
        return ['compr', binder_sexpr(t.var), go(t.body)]
    if isinstance(t, Eq):
        return ['eq', go(t.left), go(t.right)]
    if isinstance(t, Mem):
        return ['mem', go(t.elem), go(t.set)]
    raise TypeError(f"not a term: {t!r}")


def print_term(t: Term, resugar: bool = True) -> str:
    return write_sexpr(term_sexpr(t, resugar))


def print_type(t: TypeExpr) -> str:
    return write_sexpr(type_sexpr(t))


def context_sexpr(context: Sequence[Term]) -> Raw:
    return ['ctx'] + [term_sexpr(f) for f in context]


def sequent_sexpr(sequent) -> Raw:
    return ['seq', context_sexpr(sequent.context), term_sexpr(sequent.conclusion)]


def print_sequent(sequent) -> str:
    return write_sexpr(sequent_sexpr(sequent))


# ---------------------------------------------------------------------------
# Proof trees
# ---------------------------------------------------------------------------

def param_sexpr(p) -> Raw:
    if isinstance(p, Term):
        return term_sexpr(p)
    if isinstance(p, bool):
        return 'true' if p else 'false'
    if isinstance(p, int):
        return str(p)
    if isinstance(p, (list, tuple)):
        return [param_sexpr(q) for q in p]
    return str(p)


def proof_sexpr(node) -> Raw:
    from services.deduction import AssumedLeaf, AxiomLeaf, DerivedNode, HypothesisLeaf, RuleNode
    if isinstance(node, AxiomLeaf):
        return ['axiom', node.schema.value] + [param_sexpr(p) for p in node.params]
    if isinstance(node, HypothesisLeaf):
        return ['hyp', node.tag]
    if isinstance(node, RuleNode):
        return (['rule', node.rule.value, [param_sexpr(p) for p in node.params]]
                + [proof_sexpr(c) for c in node.premises])
    if isinstance(node, DerivedNode):
        return (['derived', node.tactic, [param_sexpr(p) for p in node.params]]
                + [proof_sexpr(c) for c in node.premises])
    if isinstance(node, AssumedLeaf):
        return ['assumed', sequent_sexpr(node.sequent)]
    raise TypeError(f"not a proof node: {node!r}")


def print_proof(node) -> str:
    return write_sexpr(proof_sexpr(node))
