"""Defined logical operations and set abbreviations, expanded into core terms.

Expansion is eager: nothing in this module survives into stored terms. The
auxiliary variables the definitions need (the omega of disjunction and of the
existential, the y of unique existence, the z of image sets) are chosen with
``first_unused`` so that the same input always yields the same output.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple as Tup

from services.errors import ArityError, TypeMismatch
from services.language import (
    OMEGA, STAR, Compr, Eq, Mem, Power, Product, Signature, Term, Tuple, Var,
    alpha_eq, first_unused, names_of, parse_binder, parse_type, substitute, tup,
)

logger = logging.getLogger(__name__)


class SugarKind(Enum):
    IFF = "iff"
    TRUE = "true"
    AND = "and"
    IMPLIES = "implies"
    FORALL = "forall"
    FALSE = "false"
    NOT = "not"
    OR = "or"
    EXISTS = "exists"
    EXISTS_UNIQUE = "exists1"
    BOUNDED_FORALL = "forall-in"
    BOUNDED_EXISTS = "exists-in"
    BOUNDED_EXISTS_UNIQUE = "exists1-in"
    COMPREHENSION_IN = "compr-in"
    SINGLETON = "singleton"
    IMAGE_SET = "image"
    UNIVERSAL_SET = "universe"
    EMPTY_SET = "empty"
    SUBSET = "subset"
    INTERSECTION = "inter"
    UNION = "union"
    PRODUCT_SET = "prod-set"
    FUNCTION_SPACE = "fnspace"
    GRAPH_PAIR = "graph-pair"


SET_KINDS = frozenset({
    SugarKind.COMPREHENSION_IN, SugarKind.SINGLETON, SugarKind.IMAGE_SET, SugarKind.UNIVERSAL_SET,
    SugarKind.EMPTY_SET, SugarKind.INTERSECTION, SugarKind.UNION, SugarKind.PRODUCT_SET,
    SugarKind.FUNCTION_SPACE,
})


@dataclass(frozen=True)
class SugarForm:
    kind: SugarKind
    args: Tup[object, ...] = ()


def _formula(t: Term, where: str) -> Term:
    if not t.is_formula():
        raise TypeMismatch(f"{where} expects a formula, got a term of type {t.type}")
    return t


def _power(t: Term, where: str):
    if not isinstance(t.type, Power):
        raise TypeMismatch(f"{where} expects a set, got a term of type {t.type}")
    return t.type.elem


# Logical operations

TRUE = Eq(STAR, STAR)


def iff(a: Term, b: Term) -> Term:
    return Eq(_formula(a, 'iff'), _formula(b, 'iff'))


def and_(a: Term, b: Term) -> Term:
    return Eq(Tuple((_formula(a, 'and'), _formula(b, 'and'))), Tuple((TRUE, TRUE)))


def implies(a: Term, b: Term) -> Term:
    return Eq(and_(a, b), a)


def forall(x: Var, a: Term) -> Term:
    return Eq(Compr(x, _formula(a, 'forall')), Compr(x, TRUE))


_W = Var('w', OMEGA)
FALSE = forall(_W, _W)


def not_(a: Term) -> Term:
    return implies(a, FALSE)


def _omega_for(*terms: Term, extra: Sequence[str] = ()) -> Var:
    return first_unused('w', OMEGA, names_of(terms) | set(extra))


def or_(a: Term, b: Term) -> Term:
    w = _omega_for(a, b)
    return forall(w, implies(and_(implies(a, w), implies(b, w)), w))


def exists(x: Var, a: Term) -> Term:
    _formula(a, 'exists')
    w = _omega_for(a, extra=[x.name])
    return forall(w, implies(forall(x, implies(a, w)), w))


def exists_unique(x: Var, a: Term) -> Term:
    y = first_unused(x.name, x.type, a.names | {x.name})
    return exists(x, and_(a, forall(y, implies(substitute(a, x, y), Eq(x, y)))))


def _check_member(x: Var, X: Term, where: str):
    if _power(X, where) != x.type:
        raise TypeMismatch(f"{where}: {x.name} has type {x.type} but the set has elements of type {X.type.elem}")


def forall_in(x: Var, X: Term, a: Term) -> Term:
    _check_member(x, X, 'forall-in')
    return forall(x, implies(Mem(x, X), a))


def exists_in(x: Var, X: Term, a: Term) -> Term:
    _check_member(x, X, 'exists-in')
    return exists(x, and_(Mem(x, X), a))


def exists_unique_in(x: Var, X: Term, a: Term) -> Term:
    _check_member(x, X, 'exists1-in')
    return exists_unique(x, and_(Mem(x, X), a))


# Set abbreviations

def compr_in(x: Var, X: Term, a: Term) -> Term:
    _check_member(x, X, 'compr-in')
    return Compr(x, and_(Mem(x, X), a))


def singleton(t: Term) -> Term:
    x = first_unused('x', t.type, t.names)
    return Compr(x, Eq(x, t))


def image_set(t: Term, a: Term, xs: Optional[Sequence[Var]] = None) -> Term:
    """{t : a} = {z : exists x1 ... exists xn (z = t and a)}; xs default to the free variables of t."""
    _formula(a, 'image')
    if xs is None:
        xs = t.sorted_free_vars
    z = first_unused('z', t.type, t.names | a.names | {x.name for x in xs})
    body = and_(Eq(z, t), a)
    for x in reversed(list(xs)):
        body = exists(x, body)
    return Compr(z, body)


def universal(type_) -> Term:
    return Compr(Var('x', type_), TRUE)


def empty(type_) -> Term:
    return Compr(Var('x', type_), FALSE)


def _same_sets(X: Term, Y: Term, where: str):
    if _power(X, where) != _power(Y, where):
        raise TypeMismatch(f"{where} needs sets of the same type, got {X.type} and {Y.type}")
    return X.type.elem


def subset(X: Term, Y: Term) -> Term:
    elem = _same_sets(X, Y, 'subset')
    x = first_unused('x', elem, X.names | Y.names)
    return forall(x, implies(Mem(x, X), Mem(x, Y)))


def intersection(X: Term, Y: Term) -> Term:
    elem = _same_sets(X, Y, 'inter')
    x = first_unused('x', elem, X.names | Y.names)
    return Compr(x, and_(Mem(x, X), Mem(x, Y)))


def union(X: Term, Y: Term) -> Term:
    elem = _same_sets(X, Y, 'union')
    x = first_unused('x', elem, X.names | Y.names)
    return Compr(x, or_(Mem(x, X), Mem(x, Y)))


def product_set(X: Term, Y: Term) -> Term:
    """X x Y = {<x, y> : x in X and y in Y}."""
    a, b = _power(X, 'prod-set'), _power(Y, 'prod-set')
    avoid = X.names | Y.names
    x = first_unused('x', a, avoid)
    y = first_unused('y', b, avoid | {x.name})
    return image_set(tup(x, y), and_(Mem(x, X), Mem(y, Y)), [x, y])


def function_space(X: Term, Y: Term) -> Term:
    """X^Y = {u : u is a subset of Y x X and every y in Y has exactly one x in X with <y, x> in u}."""
    a, b = _power(X, 'fnspace'), _power(Y, 'fnspace')
    avoid = X.names | Y.names
    u = first_unused('u', Power(Product((b, a))), avoid)
    y = first_unused('y', b, avoid | {u.name})
    x = first_unused('x', a, avoid | {u.name, y.name})
    total = forall_in(y, Y, exists_unique_in(x, X, Mem(Tuple((y, x)), u)))
    return Compr(u, and_(subset(u, product_set(Y, X)), total))


def graph_pair(s: Term, t: Term, graph: Term) -> Term:
    return Mem(tup(s, t), graph)


_EXPANDERS: Dict[SugarKind, Callable[..., Term]] = {
    SugarKind.IFF: iff,
    SugarKind.TRUE: lambda: TRUE,
    SugarKind.AND: and_,
    SugarKind.IMPLIES: implies,
    SugarKind.FORALL: forall,
    SugarKind.FALSE: lambda: FALSE,
    SugarKind.NOT: not_,
    SugarKind.OR: or_,
    SugarKind.EXISTS: exists,
    SugarKind.EXISTS_UNIQUE: exists_unique,
    SugarKind.BOUNDED_FORALL: forall_in,
    SugarKind.BOUNDED_EXISTS: exists_in,
    SugarKind.BOUNDED_EXISTS_UNIQUE: exists_unique_in,
    SugarKind.COMPREHENSION_IN: compr_in,
    SugarKind.SINGLETON: singleton,
    SugarKind.IMAGE_SET: image_set,
    SugarKind.UNIVERSAL_SET: universal,
    SugarKind.EMPTY_SET: empty,
    SugarKind.SUBSET: subset,
    SugarKind.INTERSECTION: intersection,
    SugarKind.UNION: union,
    SugarKind.PRODUCT_SET: product_set,
    SugarKind.FUNCTION_SPACE: function_space,
    SugarKind.GRAPH_PAIR: graph_pair,
}


def expand(form) -> Term:
    """Literal core expansion of a sugar form; core terms pass through unchanged."""
    if isinstance(form, Term):
        return form
    try:
        return _EXPANDERS[form.kind](*form.args)
    except TypeError as e:
        raise ArityError(f"wrong arguments for {form.kind.value}: {e}")


def build_set_abbrev(kind: SugarKind, args: Sequence[object]) -> Term:
    if kind not in SET_KINDS:
        raise TypeMismatch(f"{kind.value} is not a set abbreviation")
    return expand(SugarForm(kind, tuple(args)))


# ---------------------------------------------------------------------------
# Surface reader extension and re-sugaring for display
# ---------------------------------------------------------------------------

_KEYWORDS = {k.value: k for k in SugarKind}
_BINDING = {SugarKind.FORALL, SugarKind.EXISTS, SugarKind.EXISTS_UNIQUE}
_BOUNDED = {SugarKind.BOUNDED_FORALL, SugarKind.BOUNDED_EXISTS, SugarKind.BOUNDED_EXISTS_UNIQUE,
            SugarKind.COMPREHENSION_IN}


def read_sugar(sig: Signature, raw: list, go: Callable) -> Optional[Term]:
    """Reader extension for ``language.elaborate`` covering every sugar keyword."""
    head, args = raw[0], raw[1:]
    if head == 'verus':
        head = 'true'
    kind = _KEYWORDS.get(head)
    if kind is None:
        return None
    if kind in _BINDING:
        if len(args) != 2:
            raise ArityError(f"{head} takes a binder and a body")
        return expand(SugarForm(kind, (parse_binder(sig, args[0]), go(args[1]))))
    if kind in _BOUNDED:
        if len(args) != 3:
            raise ArityError(f"{head} takes a binder, a set and a body")
        return expand(SugarForm(kind, (parse_binder(sig, args[0]), go(args[1]), go(args[2]))))
    if kind in (SugarKind.UNIVERSAL_SET, SugarKind.EMPTY_SET):
        if len(args) != 1:
            raise ArityError(f"{head} takes a type")
        return expand(SugarForm(kind, (parse_type(sig, args[0]),)))
    if kind == SugarKind.IMAGE_SET:
        if len(args) == 3:
            binders = [parse_binder(sig, b) for b in args[2]]
            return image_set(go(args[0]), go(args[1]), binders)
        if len(args) != 2:
            raise ArityError("image takes a term, a formula and optional binders")
    return expand(SugarForm(kind, tuple(go(a) for a in args)))


def _match_and(t: Term):
    if (isinstance(t, Eq) and isinstance(t.left, Tuple) and isinstance(t.right, Tuple)
            and len(t.left.items) == 2 and len(t.right.items) == 2
            and all(alpha_eq(r, TRUE) for r in t.right.items)
            and all(i.is_formula() for i in t.left.items)):
        return t.left.items
    return None


def _match_implies(t: Term):
    if isinstance(t, Eq):
        parts = _match_and(t.left)
        if parts is not None and alpha_eq(parts[0], t.right):
            return parts
    return None


def _match_forall(t: Term):
    if (isinstance(t, Eq) and isinstance(t.left, Compr) and isinstance(t.right, Compr)
            and t.left.var == t.right.var and alpha_eq(t.right.body, TRUE)):
        return t.left.var, t.left.body
    return None


def match_sugar(t: Term):
    """Recognise an expansion shape; returns (keyword, parts) or None."""
    if not isinstance(t, Eq) or not t.is_formula():
        return None
    if alpha_eq(t, TRUE):
        return 'true', ()
    if alpha_eq(t, FALSE):
        return 'false', ()
    q = _match_forall(t)
    if q is not None:
        w, body = q
        if w.type == OMEGA:
            imp = _match_implies(body)
            if imp is not None and imp[1] == w:
                premise = imp[0]
                inner = _match_forall(premise)
                if inner is not None:
                    x, inner_body = inner
                    step = _match_implies(inner_body)
                    if step is not None and step[1] == w and w not in step[0].free_vars and x != w:
                        return 'exists', (x, step[0])
                conj = _match_and(premise)
                if conj is not None:
                    left, right = _match_implies(conj[0]), _match_implies(conj[1])
                    if (left is not None and right is not None and left[1] == w and right[1] == w
                            and w not in left[0].free_vars and w not in right[0].free_vars):
                        return 'or', (left[0], right[0])
        return 'forall', (q[0], q[1])
    imp = _match_implies(t)
    if imp is not None:
        if alpha_eq(imp[1], FALSE):
            return 'not', (imp[0],)
        return 'implies', imp
    conj = _match_and(t)
    if conj is not None:
        return 'and', conj
    return None
