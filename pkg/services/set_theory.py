"""L-sets and S-functions over a finite model.

The ambient theory is Th(FinSet) of a ``FinInterpretation``: a sequent holds
exactly when it is valid in the interpretation, so provable equality of sets
and the function conditions on graphs are decided by enumeration.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union

from services.errors import (
    NotInCodomain, NotSingleValued, NotSubgraph, NotTotal, TypeMismatch, VariableClash,
)
from services.finset_model import (
    FinArrow, FinInterpretation, SetV, eval_term, find_counterexample, format_value, th_entails,
)
from services.language import (
    OMEGA, Eq, Mem, Power, Term, Tuple, TypeExpr, Var, first_unused, format_type, product, tup,
)
from services.sugar import TRUE, and_, exists, iff, image_set, implies, universal

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LSet:
    """A closed term of power type."""
    term: Term

    def __post_init__(self):
        if not isinstance(self.term.type, Power):
            raise TypeMismatch(f"an L-set needs a power type, got {format_type(self.term.type)}")
        if self.term.free_vars:
            names = ', '.join(sorted(v.name for v in self.term.free_vars))
            raise VariableClash(f"L-sets are closed terms; free: {names}")

    @property
    def elem_type(self) -> TypeExpr:
        return self.term.type.elem

    def member(self, t: Term) -> Term:
        if t.type != self.elem_type:
            raise TypeMismatch(f"membership of a {format_type(t.type)} in a set of {format_type(self.elem_type)}")
        return Mem(t, self.term)

    def extension(self, interp: FinInterpretation) -> SetV:
        return eval_term(interp, self.term)

    def __str__(self):
        return str(self.term)


SetLike = Union[LSet, Term]


def as_lset(X: SetLike) -> LSet:
    return X if isinstance(X, LSet) else LSet(X)


def universe(type_: TypeExpr) -> LSet:
    """U_A, the set of all elements of type A."""
    return LSet(universal(type_))


@dataclass(frozen=True, eq=False)
class SFunction:
    """A graph together with its domain and codomain."""
    graph: LSet
    dom: LSet
    cod: LSet

    def __post_init__(self):
        expected = product(self.dom.elem_type, self.cod.elem_type)
        if self.graph.elem_type != expected:
            raise TypeMismatch(f"graph of type {format_type(self.graph.term.type)} does not fit "
                               f"{format_type(self.dom.elem_type)} -> {format_type(self.cod.elem_type)}")

    @property
    def dom_type(self) -> TypeExpr:
        return self.dom.elem_type

    @property
    def cod_type(self) -> TypeExpr:
        return self.cod.elem_type

    def relates(self, x: Term, y: Term) -> Term:
        """<x, y> in |f|."""
        return Mem(Tuple((x, y)), self.graph.term)

    def table(self, interp: FinInterpretation) -> FinArrow:
        """The function as an arrow between the extensions of its domain and codomain."""
        dom_ext, cod_ext = self.dom.extension(interp), self.cod.extension(interp)
        domain = tuple(a for a in interp.carrier(self.dom_type) if a in dom_ext)
        codomain = tuple(b for b in interp.carrier(self.cod_type) if b in cod_ext)
        mapping: Dict[object, object] = {}
        for pair in self.graph.extension(interp).elems:
            a, b = pair.items
            if a in dom_ext:
                mapping[a] = b
        return FinArrow(domain, codomain, mapping)


def _pair_vars(A: TypeExpr, B: TypeExpr):
    x = first_unused('x', A, ())
    y = first_unused('y', B, {x.name})
    return x, y


def _witness(env) -> str:
    return ', '.join(f"{v.name}={format_value(value)}" for v, value in env.items())


# ---------------------------------------------------------------------------
# Sets
# ---------------------------------------------------------------------------

def sset_eq(interp: FinInterpretation, X: SetLike, Y: SetLike) -> bool:
    """X ~ Y: provable equality in the theory of the model."""
    X, Y = as_lset(X), as_lset(Y)
    if X.term.type != Y.term.type:
        raise TypeMismatch(f"cannot compare sets of types {format_type(X.term.type)} and {format_type(Y.term.type)}")
    return th_entails(interp, [], Eq(X.term, Y.term))


# ---------------------------------------------------------------------------
# Functions
# ---------------------------------------------------------------------------

def mk_sfunction(interp: FinInterpretation, graph: SetLike, X: SetLike, Y: SetLike) -> SFunction:
    """Validate graph as a function X -> Y: subgraph, totality, single-valuedness."""
    f = SFunction(as_lset(graph), as_lset(X), as_lset(Y))
    x, y = _pair_vars(f.dom_type, f.cod_type)
    y2 = first_unused('y', f.cod_type, {x.name, y.name})

    outside = find_counterexample(interp, [f.relates(x, y)], and_(f.dom.member(x), f.cod.member(y)))
    if outside is not None:
        raise NotSubgraph(f"graph leaves the product of domain and codomain at {_witness(outside)}")
    missing = find_counterexample(interp, [f.dom.member(x)], exists(y, f.relates(x, y)))
    if missing is not None:
        raise NotTotal(f"graph has no value at {_witness(missing)}")
    split = find_counterexample(interp, [f.relates(x, y), f.relates(x, y2)], Eq(y, y2))
    if split is not None:
        raise NotSingleValued(f"graph has two values at {_witness(split)}")
    return f


def compose(interp: FinInterpretation, g: SFunction, f: SFunction) -> SFunction:
    """g after f, with graph {<x, z> : exists y (<x, y> in |f| and <y, z> in |g|)}."""
    if f.cod_type != g.dom_type or not sset_eq(interp, f.cod, g.dom):
        raise TypeMismatch("codomain of the first function is not the domain of the second")
    x = first_unused('x', f.dom_type, ())
    y = first_unused('y', f.cod_type, {x.name})
    z = first_unused('z', g.cod_type, {x.name, y.name})
    body = exists(y, and_(f.relates(x, y), g.relates(y, z)))
    return mk_sfunction(interp, image_set(Tuple((x, z)), body, [x, z]), f.dom, g.cod)


def represent(interp: Optional[FinInterpretation], xs: Sequence[Var], tau: Term,
              X: SetLike, Y: SetLike) -> SFunction:
    """(<xs> |-> tau) from X to Y, graph {<<xs>, tau> : <xs> in X}.

    With an interpretation, <xs> in X : tau in Y is checked first.
    """
    X, Y = as_lset(X), as_lset(Y)
    xs = list(xs)
    pattern = tup(*xs)
    if pattern.type != X.elem_type:
        raise TypeMismatch(f"variables of type {format_type(pattern.type)} do not range over "
                           f"a set of {format_type(X.elem_type)}")
    if tau.type != Y.elem_type:
        raise TypeMismatch(f"term of type {format_type(tau.type)} does not land in a set of "
                           f"{format_type(Y.elem_type)}")
    loose = tau.free_vars - set(xs)
    if loose:
        raise VariableClash(f"term has free variables outside the list: {', '.join(sorted(v.name for v in loose))}")
    if interp is not None:
        escape = find_counterexample(interp, [X.member(pattern)], Y.member(tau))
        if escape is not None:
            raise NotInCodomain(f"term leaves the codomain at {_witness(escape)}")
    graph = image_set(Tuple((pattern, tau)), X.member(pattern), xs)
    return SFunction(LSet(graph), X, Y)


def natural(f: SFunction, x: Optional[Term] = None) -> Term:
    """<x, true> in |f| for f into Omega; x may be any term over the domain type."""
    if f.cod_type != OMEGA:
        raise TypeMismatch("natural needs a function into Omega")
    if x is None:
        x = first_unused('x', f.dom_type, ())
    if x.type != f.dom_type:
        raise TypeMismatch(f"argument of type {format_type(x.type)} is not in the domain type")
    return f.relates(x, TRUE)


def T_X(X: SetLike) -> SFunction:
    """The function on X that is constantly true."""
    X = as_lset(X)
    x = first_unused('x', X.elem_type, ())
    return represent(None, [x], TRUE, X, universe(OMEGA))


def identity_on(X: SetLike) -> SFunction:
    X = as_lset(X)
    x = first_unused('x', X.elem_type, ())
    return represent(None, [x], x, X, X)


def inclusion(X: SetLike) -> SFunction:
    """i_X : X -> U_A."""
    X = as_lset(X)
    x = first_unused('x', X.elem_type, ())
    return represent(None, [x], x, X, universe(X.elem_type))


def sfunction_eq(interp: FinInterpretation, f: SFunction, g: SFunction) -> bool:
    """Same domain and codomain, and x in X : <x,y> in |f| <=> <x,y> in |g|."""
    if f.dom_type != g.dom_type or f.cod_type != g.cod_type:
        return False
    if not (sset_eq(interp, f.dom, g.dom) and sset_eq(interp, f.cod, g.cod)):
        return False
    x, y = _pair_vars(f.dom_type, f.cod_type)
    return th_entails(interp, [f.dom.member(x)], iff(f.relates(x, y), g.relates(x, y)))


def widen(f: SFunction, companions: Sequence[Var]) -> SFunction:
    """1 x f on flat tuples: <c1, ..., ck, x> |-> <c1, ..., ck, f(x)>."""
    if not companions:
        return f
    taken = set()
    cs = []
    for c in companions:
        fresh = first_unused(c.name, c.type, taken)
        taken.add(fresh.name)
        cs.append(fresh)
    x = first_unused('x', f.dom_type, taken)
    y = first_unused('y', f.cod_type, taken | {x.name})
    dom = image_set(tup(*cs, x), f.dom.member(x), cs + [x])
    cod = image_set(tup(*cs, y), f.cod.member(y), cs + [y])
    graph = image_set(Tuple((tup(*cs, x), tup(*cs, y))), f.relates(x, y), cs + [x, y])
    return SFunction(LSet(graph), LSet(dom), LSet(cod))


def function_table(interp: FinInterpretation, f: SFunction) -> FinArrow:
    return f.table(interp)


def is_bijection(interp: FinInterpretation, f: SFunction) -> bool:
    arrow = f.table(interp)
    return arrow.is_monic() and arrow.is_epic()


def inverse(interp: FinInterpretation, f: SFunction) -> SFunction:
    """Inverse of a bijection, graph {<y, x> : <x, y> in |f|}."""
    f.table(interp).inverse()
    x, y = _pair_vars(f.dom_type, f.cod_type)
    graph = image_set(Tuple((y, x)), f.relates(x, y), [y, x])
    return SFunction(LSet(graph), f.cod, f.dom)


def restrict_forall(xi: Term, f: SFunction, x: Var, y: Var) -> Term:
    """y in Y and (<x, y> in |f| => xi)."""
    return and_(f.cod.member(y), implies(f.relates(x, y), xi))
