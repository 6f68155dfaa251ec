"""Local languages: signatures, type expressions, typed terms, substitution.

Terms are immutable values. The n=1 and n=0 provisos for products, tuples and
projections are applied by the constructor functions (``product``, ``tup``,
``proj``), so stored trees never contain one-factor or zero-factor nodes.
"""
import itertools
import logging
import re
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple as Tup

from services.errors import ArityError, NotFreeFor, SideConditionViolated, TypeMismatch, UnknownSymbol

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Type expressions
# ---------------------------------------------------------------------------

class TypeExpr:
    """Base class of the type symbols."""

    def factors(self) -> Tup['TypeExpr', ...]:
        """Factors when read as a product; a non-product is its own single factor."""
        return (self,)

    def grounds(self) -> FrozenSet[str]:
        return frozenset()

    def __str__(self):
        return format_type(self)


@dataclass(frozen=True)
class One(TypeExpr):
    pass


@dataclass(frozen=True)
class Omega(TypeExpr):
    pass


@dataclass(frozen=True)
class Ground(TypeExpr):
    name: str

    def grounds(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class Product(TypeExpr):
    items: Tup[TypeExpr, ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ArityError(f"Product needs at least two factors, got {len(self.items)}; use product()")

    def factors(self):
        return self.items

    def grounds(self):
        return frozenset().union(*(t.grounds() for t in self.items))


@dataclass(frozen=True)
class Power(TypeExpr):
    elem: TypeExpr

    def grounds(self):
        return self.elem.grounds()


ONE = One()
OMEGA = Omega()


def product(*factors: TypeExpr) -> TypeExpr:
    """Product type with the provisos: no factors is 1, one factor is that factor."""
    if len(factors) == 0:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Product(tuple(factors))


def format_type(t: TypeExpr) -> str:
    if isinstance(t, One):
        return 'One'
    if isinstance(t, Omega):
        return 'Omega'
    if isinstance(t, Ground):
        return t.name
    if isinstance(t, Product):
        return '(prod ' + ' '.join(format_type(f) for f in t.items) + ')'
    if isinstance(t, Power):
        return f'(pow {format_type(t.elem)})'
    raise TypeError(f"not a type expression: {t!r}")


def element_type(t: TypeExpr) -> TypeExpr:
    if not isinstance(t, Power):
        raise TypeMismatch(f"expected a power type, got {t}", got=str(t))
    return t.elem


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arg_type: TypeExpr
    result_type: TypeExpr

    def is_constant(self) -> bool:
        return isinstance(self.arg_type, One) and isinstance(self.result_type, Ground)


@dataclass(frozen=True, eq=False)
class Signature:
    ground_types: Tup[str, ...] = ()
    function_symbols: Mapping[str, FunctionSymbol] = field(default_factory=dict)
    nullstellensatz: bool = False

    def __post_init__(self):
        if len(set(self.ground_types)) != len(self.ground_types):
            raise TypeMismatch("ground type names must be unique")
        for sym in self.function_symbols.values():
            self.check_type(sym.arg_type)
            self.check_type(sym.result_type)
        if self.nullstellensatz and not nullstellensatz_holds(self):
            missing = [g for g in self.ground_types if not self.constants_for(g)]
            raise SideConditionViolated(
                f"Nullstellensatz declared but no constant 1 -> A for {', '.join(missing)}",
                proviso='nullstellensatz')

    @classmethod
    def build(cls, grounds: Iterable[str] = (), symbols: Iterable[Tup[str, TypeExpr, TypeExpr]] = (),
              nullstellensatz: bool = False) -> 'Signature':
        table: Dict[str, FunctionSymbol] = {}
        for name, arg, res in symbols:
            if name in table:
                raise TypeMismatch(f"function symbol {name} declared twice", symbol=name)
            table[name] = FunctionSymbol(name, arg, res)
        return cls(tuple(grounds), table, nullstellensatz)

    def check_type(self, t: TypeExpr) -> TypeExpr:
        unknown = t.grounds() - set(self.ground_types)
        if unknown:
            raise UnknownSymbol(f"undeclared ground type(s): {', '.join(sorted(unknown))}",
                                symbol=sorted(unknown)[0])
        return t

    def symbol(self, name: str) -> FunctionSymbol:
        try:
            return self.function_symbols[name]
        except KeyError:
            raise UnknownSymbol(f"unknown function symbol: {name}", symbol=name)

    def constants_for(self, ground: str) -> List[FunctionSymbol]:
        return [s for s in self.function_symbols.values()
                if s.is_constant() and s.result_type == Ground(ground)]

    def extend(self, grounds: Iterable[str] = (), symbols: Iterable[FunctionSymbol] = ()) -> 'Signature':
        table = dict(self.function_symbols)
        for sym in symbols:
            if sym.name in table and table[sym.name] != sym:
                raise TypeMismatch(f"function symbol {sym.name} already declared", symbol=sym.name)
            table[sym.name] = sym
        new_grounds = tuple(self.ground_types) + tuple(g for g in grounds if g not in self.ground_types)
        return Signature(new_grounds, table, self.nullstellensatz)


def nullstellensatz_holds(sig: Signature) -> bool:
    """Every ground type has a constant; vacuously true with no grounds."""
    return all(sig.constants_for(g) for g in sig.ground_types)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    """Base class of the nine term formers. ``type`` is fixed at construction."""

    type: TypeExpr

    def children(self) -> Tup['Term', ...]:
        return ()

    @cached_property
    def free_vars(self) -> FrozenSet['Var']:
        return frozenset().union(*(c.free_vars for c in self.children()))

    @cached_property
    def names(self) -> FrozenSet[str]:
        """Every variable name occurring in the term, free or bound."""
        return frozenset().union(*(c.names for c in self.children()))

    @cached_property
    def sorted_free_vars(self) -> Tup['Var', ...]:
        return tuple(sorted(self.free_vars, key=var_sort_key))

    @cached_property
    def alpha_key(self):
        return _alpha_key(self, ())

    def is_formula(self) -> bool:
        return isinstance(self.type, Omega)

    def __str__(self):
        from services.sexpr import print_term
        return print_term(self)


@dataclass(frozen=True)
class Star(Term):
    @property
    def type(self):
        return ONE


@dataclass(frozen=True)
class Var(Term):
    name: str
    type: TypeExpr

    @cached_property
    def free_vars(self):
        return frozenset([self])

    @cached_property
    def names(self):
        return frozenset([self.name])


@dataclass(frozen=True)
class App(Term):
    symbol: str
    arg: Term
    type: TypeExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Tuple(Term):
    items: Tup[Term, ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ArityError("tuples of fewer than two terms are normalised; use tup()")

    @cached_property
    def type(self):
        return Product(tuple(i.type for i in self.items))

    def children(self):
        return self.items


@dataclass(frozen=True)
class Proj(Term):
    index: int
    arg: Term

    def __post_init__(self):
        factors = self.arg.type.factors()
        if not isinstance(self.arg.type, Product) or not 1 <= self.index <= len(factors):
            raise ArityError(f"projection index {self.index} out of range for {self.arg.type}")

    @property
    def type(self):
        return self.arg.type.factors()[self.index - 1]

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Compr(Term):
    var: Var
    body: Term

    def __post_init__(self):
        if not self.body.is_formula():
            raise TypeMismatch(f"comprehension body must be a formula, got type {self.body.type}")

    @property
    def type(self):
        return Power(self.var.type)

    def children(self):
        return (self.body,)

    @cached_property
    def free_vars(self):
        return self.body.free_vars - {self.var}

    @cached_property
    def names(self):
        return self.body.names | {self.var.name}


@dataclass(frozen=True)
class Eq(Term):
    left: Term
    right: Term

    def __post_init__(self):
        if self.left.type != self.right.type:
            raise TypeMismatch(f"equality between {self.left.type} and {self.right.type}",
                               left=str(self.left.type), right=str(self.right.type))

    @property
    def type(self):
        return OMEGA

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Mem(Term):
    elem: Term
    set: Term

    def __post_init__(self):
        if self.set.type != Power(self.elem.type):
            raise TypeMismatch(f"membership needs second argument of type (pow {self.elem.type}), "
                               f"got {self.set.type}")

    @property
    def type(self):
        return OMEGA

    def children(self):
        return (self.elem, self.set)


STAR = Star()


def var_sort_key(v: Var):
    return (v.name, format_type(v.type))


# Constructors applying the provisos.

def var(name: str, type_: TypeExpr) -> Var:
    return Var(name, type_)


def app(sig: Signature, symbol: str, arg: Term) -> App:
    sym = sig.symbol(symbol)
    if arg.type != sym.arg_type:
        raise TypeMismatch(f"{symbol} expects an argument of type {sym.arg_type}, got {arg.type}",
                           symbol=symbol)
    return App(symbol, arg, sym.result_type)


def tup(*items: Term) -> Term:
    if len(items) == 0:
        return STAR
    if len(items) == 1:
        return items[0]
    return Tuple(tuple(items))


def proj(index: int, t: Term, arity: Optional[int] = None) -> Term:
    """(t)_index; with arity 1 (or a non-product type) this is t itself."""
    factors = t.type.factors()
    if arity is None:
        arity = 0 if isinstance(t.type, One) else len(factors)
    if arity == 1:
        if index != 1:
            raise ArityError(f"projection index {index} out of range for a single factor")
        return t
    if arity != len(factors) or not isinstance(t.type, Product):
        raise ArityError(f"term of type {t.type} is not a {arity}-fold product")
    return Proj(index, t)


def compr(v: Var, body: Term) -> Compr:
    return Compr(v, body)


def eq(a: Term, b: Term) -> Eq:
    return Eq(a, b)


def mem(a: Term, b: Term) -> Mem:
    return Mem(a, b)


def rebuild(t: Term, children: Sequence[Term]) -> Term:
    """Same node with new children (types are recomputed where derived)."""
    if isinstance(t, App):
        return App(t.symbol, children[0], t.type)
    if isinstance(t, Tuple):
        return Tuple(tuple(children))
    if isinstance(t, Proj):
        return Proj(t.index, children[0])
    if isinstance(t, Compr):
        return Compr(t.var, children[0])
    if isinstance(t, Eq):
        return Eq(children[0], children[1])
    if isinstance(t, Mem):
        return Mem(children[0], children[1])
    return t


# ---------------------------------------------------------------------------
# Free variables, freshness, substitution
# ---------------------------------------------------------------------------

def free_vars(t: Term) -> FrozenSet[Var]:
    return t.free_vars


def free_vars_of(terms: Iterable[Term]) -> FrozenSet[Var]:
    return frozenset().union(*(t.free_vars for t in terms))


_fresh_counter = itertools.count(1)
_fresh_lock = threading.Lock()


def _stem(name: str) -> str:
    return re.sub(r'\d+$', '', name) or name


def fresh_var(v: Var, avoid: Iterable[str]) -> Var:
    """A variable of v's type whose name is not in ``avoid`` (monotone counter suffix)."""
    avoid = set(avoid)
    stem = _stem(v.name)
    while True:
        with _fresh_lock:
            n = next(_fresh_counter)
        name = f"{stem}{n}"
        if name not in avoid:
            return Var(name, v.type)


def first_unused(stem: str, type_: TypeExpr, avoid: Iterable[str]) -> Var:
    """Deterministic fresh variable: ``stem``, then stem1, stem2, ... skipping names in ``avoid``."""
    avoid = set(avoid)
    if stem not in avoid:
        return Var(stem, type_)
    for n in itertools.count(1):
        name = f"{stem}{n}"
        if name not in avoid:
            return Var(name, type_)


def names_of(terms: Iterable[Term]) -> FrozenSet[str]:
    return frozenset().union(*(t.names for t in terms))


STRICT = 'strict'
RENAMING = 'renaming'


def substitute(t: Term, x: Var, sigma: Term, mode: str = RENAMING) -> Term:
    """t(x/sigma)."""
    return simultaneous_substitute(t, [(x, sigma)], mode)


def simultaneous_substitute(t: Term, pairs: Sequence[Tup[Var, Term]], mode: str = RENAMING) -> Term:
    """t(x1/s1, ..., xn/sn), all replacements made at once."""
    mapping: Dict[Var, Term] = {}
    for x, s in pairs:
        if x.type != s.type:
            raise TypeMismatch(f"cannot substitute a term of type {s.type} for {x.name}:{x.type}")
        mapping[x] = s
    if mode not in (STRICT, RENAMING):
        raise ValueError(f"unknown substitution mode: {mode}")
    return _subst(t, mapping, mode)


def _subst(t: Term, mapping: Mapping[Var, Term], mode: str) -> Term:
    relevant = {x: s for x, s in mapping.items() if x in t.free_vars}
    if not relevant:
        return t
    if isinstance(t, Var):
        return relevant[t]
    if isinstance(t, Compr):
        bound, body = t.var, t.body
        incoming = free_vars_of(relevant.values())
        if bound in incoming:
            if mode == STRICT:
                raise NotFreeFor(f"substituted term would be captured by the binder {bound.name}",
                                 variable=bound.name)
            renamed = fresh_var(bound, body.names | names_of(relevant.values()))
            body = _subst(body, {bound: renamed}, RENAMING)
            bound = renamed
        return Compr(bound, _subst(body, relevant, mode))
    return rebuild(t, [_subst(c, relevant, mode) for c in t.children()])


def is_free_for(sigma: Term, x: Var, t: Term) -> bool:
    try:
        _subst(t, {x: sigma}, STRICT)
        return True
    except NotFreeFor:
        return False


def rename_bound_apart(t: Term, avoid: Iterable[str]) -> Term:
    """Alpha-rename every binder whose name is in ``avoid``."""
    avoid = frozenset(avoid)
    if not (t.names & avoid):
        return t
    if isinstance(t, Compr):
        bound, body = t.var, rename_bound_apart(t.body, avoid)
        if bound.name in avoid:
            renamed = fresh_var(bound, avoid | body.names)
            body = _subst(body, {bound: renamed}, RENAMING)
            bound = renamed
        return Compr(bound, body)
    if not t.children():
        return t
    return rebuild(t, [rename_bound_apart(c, avoid) for c in t.children()])


# ---------------------------------------------------------------------------
# Alpha-equivalence
# ---------------------------------------------------------------------------

def _alpha_key(t: Term, bound: Tup[Var, ...]):
    if isinstance(t, Var):
        for depth, b in enumerate(reversed(bound)):
            if b == t:
                return ('b', depth)
        return ('v', t.name, format_type(t.type))
    if isinstance(t, Star):
        return ('*',)
    if isinstance(t, App):
        return ('app', t.symbol, _alpha_key(t.arg, bound))
    if isinstance(t, Tuple):
        return ('tup',) + tuple(_alpha_key(i, bound) for i in t.items)
    if isinstance(t, Proj):
        return ('proj', t.index, _alpha_key(t.arg, bound))
    if isinstance(t, Compr):
        return ('compr', format_type(t.var.type), _alpha_key(t.body, bound + (t.var,)))
    if isinstance(t, Eq):
        return ('eq', _alpha_key(t.left, bound), _alpha_key(t.right, bound))
    if isinstance(t, Mem):
        return ('mem', _alpha_key(t.elem, bound), _alpha_key(t.set, bound))
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(t1: Term, t2: Term) -> bool:
    return t1 is t2 or t1.alpha_key == t2.alpha_key


def alpha_sort_key(t: Term) -> str:
    return repr(t.alpha_key)


# ---------------------------------------------------------------------------
# Closed terms
# ---------------------------------------------------------------------------

def closed_term(sig: Signature, t: TypeExpr) -> Optional[Term]:
    """A closed term of type t, or None when the signature has none."""
    if isinstance(t, One):
        return STAR
    if isinstance(t, Omega):
        return Eq(STAR, STAR)
    if isinstance(t, Power):
        return Compr(Var('x', t.elem), Eq(STAR, STAR))
    if isinstance(t, Ground):
        constants = sorted(sig.constants_for(t.name), key=lambda s: s.name)
        return App(constants[0].name, STAR, t) if constants else None
    if isinstance(t, Product):
        parts = [closed_term(sig, f) for f in t.items]
        return None if any(p is None for p in parts) else Tuple(tuple(parts))
    return None


# ---------------------------------------------------------------------------
# Elaboration of raw trees
# ---------------------------------------------------------------------------

RawTree = object
Extension = Callable[[Signature, list, Callable[[RawTree], Term]], Optional[Term]]


def parse_type(sig: Signature, raw) -> TypeExpr:
    if isinstance(raw, str):
        if raw == 'One':
            return ONE
        if raw == 'Omega':
            return OMEGA
        if raw in sig.ground_types:
            return Ground(raw)
        raise UnknownSymbol(f"unknown type: {raw}", symbol=raw)
    if isinstance(raw, list) and raw:
        head = raw[0]
        if head == 'prod':
            return product(*(parse_type(sig, r) for r in raw[1:]))
        if head == 'pow' and len(raw) == 2:
            return Power(parse_type(sig, raw[1]))
    raise TypeMismatch(f"malformed type expression: {raw!r}")


def parse_binder(sig: Signature, raw) -> Var:
    if not (isinstance(raw, list) and len(raw) == 2 and isinstance(raw[0], str)):
        raise TypeMismatch(f"malformed binder: {raw!r}")
    return Var(raw[0], parse_type(sig, raw[1]))


def _index(raw, what: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ArityError(f"{what} must be an integer, got {raw!r}")


def elaborate(sig: Signature, raw, extension: Optional[Extension] = None) -> Term:
    """Turn a raw tree (nested lists of strings) into a typed Term.

    ``extension`` handles heads outside the nine core formers; it receives the
    signature, the raw list and a callback to elaborate sub-trees.
    """
    def go(r) -> Term:
        return elaborate(sig, r, extension)

    if isinstance(raw, str):
        if raw == 'star':
            return STAR
        if extension is not None:
            result = extension(sig, [raw], go)
            if result is not None:
                return result
        raise UnknownSymbol(f"unknown term: {raw}", symbol=raw)
    if not isinstance(raw, list) or not raw or not isinstance(raw[0], str):
        raise TypeMismatch(f"malformed term: {raw!r}")
    head, args = raw[0], raw[1:]
    if head == 'var':
        if len(args) != 2:
            raise ArityError("var takes a name and a type")
        return Var(args[0], parse_type(sig, args[1]))
    if head == 'app':
        if len(args) != 2:
            raise ArityError("app takes a symbol and one argument")
        return app(sig, args[0], go(args[1]))
    if head == 'tuple':
        return tup(*(go(a) for a in args))
    if head == 'proj':
        if len(args) not in (2, 3):
            raise ArityError("proj takes an index, a term and an optional arity")
        arity = _index(args[2], 'proj arity') if len(args) == 3 else None
        return proj(_index(args[0], 'proj index'), go(args[1]), arity)
    if head == 'compr':
        if len(args) != 2:
            raise ArityError("compr takes a binder and a body")
        return compr(parse_binder(sig, args[0]), go(args[1]))
    if head == 'eq':
        if len(args) != 2:
            raise ArityError("eq takes two terms")
        return eq(go(args[0]), go(args[1]))
    if head == 'mem':
        if len(args) != 2:
            raise ArityError("mem takes two terms")
        return mem(go(args[0]), go(args[1]))
    if extension is not None:
        result = extension(sig, raw, go)
        if result is not None:
            return result
    raise UnknownSymbol(f"unknown term former: {head}", symbol=head)


def typecheck(sig: Signature, raw, extension: Optional[Extension] = None) -> TypeExpr:
    return elaborate(sig, raw, extension).type
