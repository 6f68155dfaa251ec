"""Preimage translations along S-functions and the internal language of a finite model.

``preimage_translate`` produces the existential normal form
exists y (<x, y> in |f| and theta); ``preimage_translate_definitional``
builds the same formula the long way, through the graph of theta, the
inclusion of the codomain and f, so the two can be compared semantically.

``InternalLanguage`` adds a ground type for every registered S-set and a
function symbol for every registered arrow on top of a base interpretation.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple as Tup, Union

from services.errors import (
    IllTypedTable, KernelError, NotFromUniversal, NotInCodomain, NotMonic, TypeMismatch, UnknownSymbol, VariableClash,
)
from services.finset_model import (
    DEFAULT_BUDGET, Atom, Budget, FinArrow, FinInterpretation, SetV, TupleV, th_entails,
)
from services.language import (
    OMEGA, App, Compr, Eq, Ground, Mem, Omega, One, Power, Product, Proj, Signature, Star, Term,
    Tuple, TypeExpr, Var, first_unused, format_type, product, tup, var_sort_key,
)
from services.set_theory import (
    LSet, SFunction, SetLike, as_lset, compose, inclusion, inverse, mk_sfunction, natural, represent, sset_eq,
    universe, widen,
)
from services.sugar import TRUE, and_, exists, forall, image_set, implies

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Preimage translation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TranslationResult:
    formula: Term
    source_vars: Tup[Var, ...]
    target_var: Var

    def to_dict(self) -> dict:
        from services.sexpr import print_term
        return {
            'formula': print_term(self.formula),
            'source_vars': [v.name for v in self.source_vars],
            'target_var': self.target_var.name,
        }


def _check_translation(theta: Term, f: SFunction, y: Var, x: Var):
    if not theta.is_formula():
        raise TypeMismatch("only formulas have preimage translations")
    if y.type != f.cod_type:
        raise TypeMismatch(f"{y.name} has type {format_type(y.type)}, the codomain has elements of "
                           f"{format_type(f.cod_type)}")
    if x.type != f.dom_type:
        raise TypeMismatch(f"{x.name} has type {format_type(x.type)}, the domain has elements of "
                           f"{format_type(f.dom_type)}")
    if x in theta.free_vars or x == y:
        raise VariableClash(f"{x.name} must not be free in the translated formula")


def _companions(theta: Term, y: Var, extra: Optional[Sequence[Var]] = None) -> List[Var]:
    companions = set(theta.free_vars - {y})
    if extra is not None:
        if not companions <= set(extra):
            raise VariableClash("the companion list must contain every free variable of the formula")
        companions = set(extra) - {y}
    return sorted(companions, key=var_sort_key)


def preimage_translate(theta: Term, f: SFunction, y: Var, x: Var) -> TranslationResult:
    """exists y (<x, y> in |f| and theta)."""
    _check_translation(theta, f, y, x)
    formula = exists(y, and_(f.relates(x, y), theta))
    return TranslationResult(formula, tuple([y] + _companions(theta, y)), x)


def correstrict(theta: Term, f: SFunction, y: Var, x: Var) -> Term:
    """The translation as a formula without y free."""
    result = preimage_translate(theta, f, y, x).formula
    if y in result.free_vars:
        raise VariableClash(f"{y.name} survived the translation")
    return result


def preimage_translate_definitional(interp: FinInterpretation, theta: Term, f: SFunction, y: Var, x: Var,
                                    companions: Optional[Sequence[Var]] = None) -> TranslationResult:
    """natural(graph(theta) after 1 x i_Y after 1 x f) at <companions, x>."""
    _check_translation(theta, f, y, x)
    cs = _companions(theta, y, companions)
    ys = cs + [y]
    arg_type = product(*(v.type for v in ys))
    theta_map = represent(interp, ys, theta, universe(arg_type), universe(OMEGA))
    along = compose(interp, widen(inclusion(f.cod), cs), widen(f, cs))
    composite = compose(interp, theta_map, along)
    formula = composite.relates(tup(*cs, x), TRUE)
    return TranslationResult(formula, tuple(ys), x)


def E_f(xi: Term, f: SFunction, x: Var, y: Var) -> Term:
    """<x, y> in |f| => xi."""
    if x.type != f.dom_type or y.type != f.cod_type:
        raise TypeMismatch("variables do not match the function's domain and codomain")
    if not xi.is_formula():
        raise TypeMismatch("E_f takes a formula")
    return implies(f.relates(x, y), xi)


def sigma(phi: Term, x: Var) -> Term:
    """phi and x = x: phi regarded as a formula in one more variable."""
    return and_(phi, Eq(x, x))


def forall_adjunction_holds(interp: FinInterpretation, theta: Term, psi: Term, x: Var) -> bool:
    """theta and x = x : psi  iff  theta : forall x psi (theta without x free)."""
    return th_entails(interp, [sigma(theta, x)], psi) == th_entails(interp, [theta], forall(x, psi))


def exists_adjunction_holds(interp: FinInterpretation, theta: Term, psi: Term, x: Var) -> bool:
    """exists x psi : theta  iff  psi : theta and x = x (theta without x free)."""
    return th_entails(interp, [exists(x, psi)], theta) == th_entails(interp, [psi], sigma(theta, x))


# ---------------------------------------------------------------------------
# Internal language of a finite model
# ---------------------------------------------------------------------------

Side = Union[str, TypeExpr]


@dataclass
class Arrow:
    name: str
    dom: TypeExpr
    cod: TypeExpr
    table: Dict[object, object]


class InternalLanguage:
    """Objects become ground types and arrows become function symbols over a base interpretation.

    Elements of a registered object are kept as labels (for an S-set, its
    members in the base interpretation); inside the language the i-th label of
    object X is ``Atom(X, i)``.
    """

    def __init__(self, base: Optional[FinInterpretation] = None, budget: Optional[Budget] = None):
        self.base = base or FinInterpretation(Signature(), {}, {}, budget or DEFAULT_BUDGET)
        self.budget = budget or self.base.budget
        self.objects: Dict[str, Tup[object, ...]] = {}
        self.arrows: Dict[str, Arrow] = {}
        self.ssets: Dict[str, LSet] = {}
        self.sfunctions: Dict[str, Tup[SFunction, str, str]] = {}
        self.characteristic: Dict[str, str] = {}
        self._interp: Optional[FinInterpretation] = None

    # -- construction -------------------------------------------------------

    def _fresh_name(self, name: str) -> str:
        taken = set(self.base.signature.ground_types) | set(self.base.signature.function_symbols)
        taken |= set(self.objects) | set(self.arrows)
        if name in taken:
            raise IllTypedTable(f"name {name} is already used in the internal language", symbol=name)
        return name

    def object_type(self, name: str) -> Ground:
        if name not in self.objects:
            raise UnknownSymbol(f"unknown object {name}", symbol=name)
        return Ground(name)

    def _side(self, side: Side) -> TypeExpr:
        return self.object_type(side) if isinstance(side, str) else side

    def to_value(self, side: Side, label):
        """Label of an object (or a value of a type) as a value of the language."""
        if isinstance(side, str):
            try:
                return Atom(side, self.objects[side].index(label))
            except ValueError:
                raise IllTypedTable(f"{label!r} is not an element of {side}", symbol=side)
        return label

    def label_of(self, value):
        if isinstance(value, Atom) and value.ground in self.objects:
            return self.objects[value.ground][value.index]
        return value

    def add_object(self, name: str, elements: Union[int, Sequence[object]]) -> Ground:
        name = self._fresh_name(name)
        labels = tuple(range(elements)) if isinstance(elements, int) else tuple(elements)
        if len(set(labels)) != len(labels):
            raise IllTypedTable(f"object {name} lists an element twice", symbol=name)
        self.objects[name] = labels
        self._interp = None
        logger.debug(f"Internal language object {name} with {len(labels)} elements")
        return Ground(name)

    def add_arrow(self, name: str, dom: Side, cod: Side, table: Mapping[object, object]) -> Arrow:
        """Register an arrow; the table maps labels (or values, for type sides) of dom to cod."""
        name = self._fresh_name(name)
        dom_t, cod_t = self._side(dom), self._side(cod)
        values = {self.to_value(dom, a): self.to_value(cod, b) for a, b in table.items()}
        arrow = Arrow(name, dom_t, cod_t, values)
        self.arrows[name] = arrow
        self._interp = None
        try:
            self.interp
        except KernelError:
            del self.arrows[name]
            self._interp = None
            raise
        return arrow

    @property
    def signature(self) -> Signature:
        base = self.base.signature
        symbols = [(s.name, s.arg_type, s.result_type) for s in base.function_symbols.values()]
        symbols += [(a.name, a.dom, a.cod) for a in self.arrows.values()]
        return Signature.build(tuple(base.ground_types) + tuple(self.objects), symbols)

    @property
    def interp(self) -> FinInterpretation:
        """H: each object its own carrier, each arrow its own table."""
        if self._interp is None:
            sizes = dict(self.base.ground_sizes)
            sizes.update({name: len(labels) for name, labels in self.objects.items()})
            tables = dict(self.base.fn_tables)
            tables.update({a.name: a.table for a in self.arrows.values()})
            self._interp = FinInterpretation(self.signature, sizes, tables, self.budget)
        return self._interp

    def symbol_term(self, name: str, arg: Term) -> Term:
        arrow = self.arrows.get(name)
        if arrow is None:
            raise UnknownSymbol(f"unknown arrow {name}", symbol=name)
        if arg.type != arrow.dom:
            raise TypeMismatch(f"{name} expects {format_type(arrow.dom)}, got {format_type(arg.type)}")
        return App(name, arg, arrow.cod)

    def arrow_map(self, name: str) -> FinArrow:
        arrow = self.arrows[name]
        return FinArrow(self.interp.carrier(arrow.dom), self.interp.carrier(arrow.cod), arrow.table)

    # -- S-sets and S-functions ---------------------------------------------

    def register_sset(self, name: str, X: SetLike) -> Ground:
        """Object X with the members of X, plus the inclusion arrow i_X : X -> A."""
        X = as_lset(X)
        ext = X.extension(self.interp)
        labels = tuple(v for v in self.interp.carrier(X.elem_type) if v in ext)
        ground = self.add_object(name, labels)
        self.add_arrow(inclusion_name(name), name, X.elem_type, {v: v for v in labels})
        self.ssets[name] = X
        return ground

    def inclusion_term(self, name: str, arg: Term) -> Term:
        return self.symbol_term(inclusion_name(name), arg)

    def register_sfunction(self, name: str, f: SFunction, dom: str, cod: str) -> Arrow:
        """Arrow f : X -> Y between registered S-sets."""
        for side, S in ((dom, f.dom), (cod, f.cod)):
            if side not in self.ssets:
                raise UnknownSymbol(f"S-set {side} is not registered", symbol=side)
            if self.ssets[side].term.type != S.term.type or not sset_eq(self.interp, self.ssets[side], S):
                raise TypeMismatch(f"registered S-set {side} is not the function's domain or codomain")
        values = f.table(self.interp).table
        arrow = self.add_arrow(name, dom, cod, dict(values))
        self.sfunctions[name] = (f, dom, cod)
        return arrow

    def register_characteristic(self, name: str, monic: str) -> Arrow:
        """chi(m) : cod(m) -> Omega for a monic arrow m."""
        m = self.arrow_map(monic)
        if not m.is_monic():
            raise NotMonic(f"{monic} is not monic")
        hit = set(m.table.values())
        arrow = Arrow(self._fresh_name(name), self.arrows[monic].cod, OMEGA,
                      {b: b in hit for b in m.codomain})
        self.arrows[arrow.name] = arrow
        self.characteristic[arrow.name] = monic
        self._interp = None
        return arrow


def inclusion_name(sset: str) -> str:
    return f"i_{sset}"


def internal_language(objects: Mapping[str, Union[int, Sequence[object]]],
                      arrows: Mapping[str, Tup[str, str, Mapping[object, object]]] = None,
                      budget: Optional[Budget] = None) -> InternalLanguage:
    """Internal language of a finite category given by named carriers and named tables."""
    lang = InternalLanguage(budget=budget)
    for name, elements in objects.items():
        lang.add_object(name, elements)
    for name, (dom, cod, table) in (arrows or {}).items():
        if set(table) != set(lang.objects[dom]):
            raise IllTypedTable(f"table of {name} is not total on {dom}", symbol=name)
        lang.add_arrow(name, dom, cod, table)
    return lang


# ---------------------------------------------------------------------------
# Representing terms and the canonical parameterisation
# ---------------------------------------------------------------------------

def tau_f(lang: InternalLanguage, f: SFunction, name: str = 'g', u: Optional[Var] = None) -> Term:
    """g(u) with g the arrow U_B -> A through which f : U_B -> X factors, registered in lang."""
    B = f.dom_type
    if not sset_eq(lang.interp, f.dom, universe(B)):
        raise NotFromUniversal("tau_f needs a function whose domain is a universal set")
    values = f.table(lang.interp).table
    lang.add_arrow(name, B, f.cod_type, dict(values))
    u = u or first_unused('u', B, ())
    term = lang.symbol_term(name, u)
    if not th_entails(lang.interp, [], f.cod.member(term)):
        raise NotInCodomain("the representing term leaves the codomain")
    return term


def f_star(lang: InternalLanguage, name: str) -> SFunction:
    """{<u, v> : <i_X(u), i_Y(v)> in |f|} from U_X to U_Y for a registered S-function."""
    if name not in lang.sfunctions:
        raise UnknownSymbol(f"{name} is not a registered S-function", symbol=name)
    f, dom, cod = lang.sfunctions[name]
    u = Var('u', lang.object_type(dom))
    v = Var('v', lang.object_type(cod))
    body = f.relates(lang.inclusion_term(dom, u), lang.inclusion_term(cod, v))
    graph = image_set(Tuple((u, v)), body, [u, v])
    return mk_sfunction(lang.interp, graph, universe(u.type), universe(v.type))


def symbol_map(lang: InternalLanguage, name: str) -> SFunction:
    """(u |-> f(u)) from U_X to U_Y."""
    arrow = lang.arrows[name]
    u = Var('u', arrow.dom)
    return represent(lang.interp, [u], lang.symbol_term(name, u), universe(arrow.dom), universe(arrow.cod))


def correstriction_of_inclusion(lang: InternalLanguage, name: str) -> SFunction:
    """r_X : U_X -> X, u |-> i_X(u)."""
    u = Var('u', lang.object_type(name))
    return represent(lang.interp, [u], lang.inclusion_term(name, u), universe(u.type), lang.ssets[name])


# ---------------------------------------------------------------------------
# Subsets of a registered S-set
# ---------------------------------------------------------------------------

@dataclass
class RhoResult:
    """A candidate for rho(frak X) as members of X, with the tables r, s between it and frak X."""
    members: Tup[object, ...]
    r: Dict[object, object]
    s: Dict[object, object]
    bijective: bool
    natural: bool

    @property
    def ok(self) -> bool:
        return self.bijective and self.natural

    def to_dict(self) -> dict:
        from services.finset_model import format_value
        return {
            'members': [format_value(m) for m in self.members],
            'r': {format_value(a): format_value(b) for a, b in self.r.items()},
            's': {format_value(a): format_value(b) for a, b in self.s.items()},
            'bijective': self.bijective,
            'natural': self.natural,
        }


def rho_set(lang: InternalLanguage, name: str, frak: SetLike) -> LSet:
    """rho(frak X) = {x : g(x)} in the base language, g the characteristic of frak X moved along r_X^-1."""
    frak = _subset_of(lang, name, frak)
    interp = lang.interp
    u = Var('u', lang.object_type(name))
    gamma = represent(interp, [u], frak.member(u), universe(u.type), universe(OMEGA))
    back = inverse(interp, correstriction_of_inclusion(lang, name))
    x = first_unused('x', lang.ssets[name].elem_type, ())
    return LSet(Compr(x, natural(compose(interp, gamma, back), x)))


def check_rho(lang: InternalLanguage, name: str, frak: SetLike, candidate: SetLike) -> RhoResult:
    """Check a subset of the S-set X against frak X.

    r and s are read off i_X between the candidate's members and frak X;
    the natural check is that u in frak X agrees with i_X(u) in the
    candidate for every u.
    """
    frak, candidate = _subset_of(lang, name, frak), as_lset(candidate)
    if candidate.elem_type != lang.ssets[name].elem_type:
        raise TypeMismatch(f"candidate is a set of {format_type(candidate.elem_type)}, not of {name}")
    interp = lang.interp
    include = lang.arrow_map(inclusion_name(name))
    chosen = frak.extension(interp)
    found = candidate.extension(interp)
    members = tuple(v for v in interp.carrier(candidate.elem_type) if v in found)
    back = {include(u): u for u in interp.carrier(frak.elem_type)}
    r = {a: back[a] for a in members if a in back}
    s = {u: include(u) for u in interp.carrier(frak.elem_type) if u in chosen}
    bijective = (len(r) == len(members) and set(r.values()) == set(chosen.elems)
                 and all(r.get(s[u]) == u for u in s))
    agrees = all((u in chosen) == (include(u) in found) for u in interp.carrier(frak.elem_type))
    return RhoResult(members, r, s, bijective, agrees)


def rho(lang: InternalLanguage, name: str, frak: SetLike) -> RhoResult:
    """Carry a subset of the object X back to the S-set X and check the result against frak X."""
    return check_rho(lang, name, frak, rho_set(lang, name, frak))


def _subset_of(lang: InternalLanguage, name: str, frak: SetLike) -> LSet:
    frak = as_lset(frak)
    if frak.elem_type != lang.object_type(name):
        raise TypeMismatch(f"expected a set of {name}, got a set of {format_type(frak.elem_type)}")
    return frak


# ---------------------------------------------------------------------------
# Canonical translation
# ---------------------------------------------------------------------------

@dataclass
class CanonicalTranslation:
    """eta: types A to the objects U_A, symbols f to the arrows (x |-> f(x))."""
    lang: InternalLanguage
    objects: Dict[str, str] = field(default_factory=dict)
    symbols: Dict[str, str] = field(default_factory=dict)

    def type_of(self, t: TypeExpr) -> TypeExpr:
        if isinstance(t, (One, Omega)):
            return t
        if isinstance(t, Ground):
            return self.lang.object_type(self.objects[t.name])
        if isinstance(t, Product):
            return Product(tuple(self.type_of(f) for f in t.items))
        if isinstance(t, Power):
            return Power(self.type_of(t.elem))
        raise TypeError(f"not a type expression: {t!r}")

    def value_of(self, t: TypeExpr, v):
        if isinstance(t, (One, Omega)):
            return v
        if isinstance(t, Ground):
            return Atom(self.objects[t.name], v.index)
        if isinstance(t, Product):
            return TupleV(tuple(self.value_of(f, i) for f, i in zip(t.items, v.items)))
        if isinstance(t, Power):
            return SetV(frozenset(self.value_of(t.elem, e) for e in v.elems))
        raise TypeError(f"not a type expression: {t!r}")

    def term(self, t: Term) -> Term:
        if isinstance(t, Var):
            return Var(t.name, self.type_of(t.type))
        if isinstance(t, Star):
            return t
        if isinstance(t, App):
            return self.lang.symbol_term(self.symbols[t.symbol], self.term(t.arg))
        if isinstance(t, Tuple):
            return Tuple(tuple(self.term(i) for i in t.items))
        if isinstance(t, Proj):
            return Proj(t.index, self.term(t.arg))
        if isinstance(t, Compr):
            return Compr(self.term(t.var), self.term(t.body))
        if isinstance(t, Eq):
            return Eq(self.term(t.left), self.term(t.right))
        if isinstance(t, Mem):
            return Mem(self.term(t.elem), self.term(t.set))
        raise TypeError(f"not a term: {t!r}")


def canonical_translation(interp: FinInterpretation) -> CanonicalTranslation:
    """Internal language of the model whose objects are the universal sets of the base grounds."""
    lang = InternalLanguage(interp)
    eta = CanonicalTranslation(lang)
    for g in interp.signature.ground_types:
        obj = f"U_{g}"
        lang.add_object(obj, interp.carrier(Ground(g)))
        eta.objects[g] = obj
    for name, sym in interp.signature.function_symbols.items():
        arrow = f"{name}_"
        table = {eta.value_of(sym.arg_type, a): eta.value_of(sym.result_type, b)
                 for a, b in interp.fn_tables[name].items()}
        lang.add_arrow(arrow, eta.type_of(sym.arg_type), eta.type_of(sym.result_type), table)
        eta.symbols[name] = arrow
    return eta
