"""Interpretation of local languages in the topos of finite sets.

Omega is the two-element boolean carrier, so validity here is a sound but
intuitionistically incomplete oracle for derivability: ``a or not a`` is valid
in every interpretation although it is not derivable.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple as Tup

from services.errors import BudgetExceeded, IllTypedTable, NotMonic, TypeMismatch, UnknownSymbol
from services.language import (
    App, Compr, Eq, Ground, Mem, Omega, One, Power, Product, Proj, Signature, Star, Term, Tuple,
    TypeExpr, Var, free_vars_of, format_type, var_sort_key,
)
from services.sugar import match_sugar

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Semantic values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class Atom:
    ground: str
    index: int


@dataclass(frozen=True)
class TupleV:
    items: Tup[object, ...]


@dataclass(frozen=True)
class SetV:
    elems: frozenset

    def __contains__(self, value):
        return value in self.elems

    def __len__(self):
        return len(self.elems)


UNIT = Unit()
BOOLS = (False, True)


def value_sort_key(v):
    if isinstance(v, Unit):
        return (0,)
    if isinstance(v, bool):
        return (1, int(v))
    if isinstance(v, Atom):
        return (2, v.ground, v.index)
    if isinstance(v, TupleV):
        return (3, tuple(value_sort_key(i) for i in v.items))
    if isinstance(v, SetV):
        keys = sorted(value_sort_key(e) for e in v.elems)
        return (4, len(keys), tuple(keys))
    raise TypeError(f"not a semantic value: {v!r}")


def format_value(v) -> str:
    if isinstance(v, Unit):
        return 'unit'
    if isinstance(v, bool):
        return '#t' if v else '#f'
    if isinstance(v, Atom):
        return f'{v.ground}{v.index}'
    if isinstance(v, TupleV):
        return '<' + ' '.join(format_value(i) for i in v.items) + '>'
    if isinstance(v, SetV):
        return '{' + ' '.join(format_value(e) for e in sorted(v.elems, key=value_sort_key)) + '}'
    raise TypeError(f"not a semantic value: {v!r}")


# ---------------------------------------------------------------------------
# Budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Budget:
    max_rows: int = 10 ** 6
    max_carrier: int = 2 ** 16
    threads: int = 1

    @classmethod
    def from_config(cls, cfg, max_rows: Optional[int] = None, threads: Optional[int] = None) -> 'Budget':
        """Build from a config class or a Flask ``app.config`` mapping."""
        get = cfg.get if isinstance(cfg, Mapping) else (lambda k, d=None: getattr(cfg, k, d))
        return cls(
            max_rows=max_rows or get('LOSET_MAX_ROWS', cls.max_rows),
            max_carrier=get('LOSET_MAX_CARRIER', cls.max_carrier),
            threads=threads or get('LOSET_THREADS', cls.threads),
        )


DEFAULT_BUDGET = Budget()


# ---------------------------------------------------------------------------
# Interpretations
# ---------------------------------------------------------------------------

class FinInterpretation:
    """Finite carriers for the ground types and total tables for the function symbols.

    Immutable after construction; carriers are computed lazily and cached.
    """

    def __init__(self, signature: Signature, ground_sizes: Mapping[str, int],
                 fn_tables: Mapping[str, Mapping[object, object]], budget: Budget = DEFAULT_BUDGET):
        self.signature = signature
        self.ground_sizes = dict(ground_sizes)
        self.budget = budget
        self._carriers: Dict[TypeExpr, Tup[object, ...]] = {}
        self._indexes: Dict[TypeExpr, Dict[object, int]] = {}
        for g in signature.ground_types:
            size = self.ground_sizes.get(g)
            if size is None or size < 0:
                raise IllTypedTable(f"ground type {g} has no carrier size", symbol=g)
        for g in self.ground_sizes:
            if g not in signature.ground_types:
                raise UnknownSymbol(f"carrier given for undeclared ground {g}", symbol=g)
        if signature.nullstellensatz:
            empty = [g for g in signature.ground_types if self.ground_sizes[g] == 0]
            if empty:
                raise IllTypedTable(f"Nullstellensatz requires nonempty carriers, empty: {', '.join(empty)}")
        self.fn_tables: Dict[str, Dict[object, object]] = {}
        for name, sym in signature.function_symbols.items():
            if name not in fn_tables:
                raise IllTypedTable(f"no table for function symbol {name}", symbol=name)
            table = dict(fn_tables[name])
            domain = self.carrier(sym.arg_type)
            codomain = set(self.carrier(sym.result_type))
            missing = [a for a in domain if a not in table]
            if missing or len(table) != len(domain):
                raise IllTypedTable(f"table for {name} is not total on {format_type(sym.arg_type)}", symbol=name)
            if any(b not in codomain for b in table.values()):
                raise IllTypedTable(f"table for {name} leaves {format_type(sym.result_type)}", symbol=name)
            self.fn_tables[name] = table
        for name in fn_tables:
            if name not in signature.function_symbols:
                raise UnknownSymbol(f"table given for undeclared symbol {name}", symbol=name)

    @classmethod
    def from_index_tables(cls, signature: Signature, ground_sizes: Mapping[str, int],
                          index_tables: Mapping[str, Sequence[int]], budget: Budget = DEFAULT_BUDGET):
        """Tables given as output indices, listed in the canonical order of the argument carrier."""
        shell = cls(Signature(signature.ground_types, {}, False), ground_sizes, {}, budget)
        tables = {}
        for name, indices in index_tables.items():
            sym = signature.symbol(name)
            domain = shell.carrier(sym.arg_type)
            codomain = shell.carrier(sym.result_type)
            if len(indices) != len(domain):
                raise IllTypedTable(f"table for {name} has {len(indices)} entries, expected {len(domain)}",
                                    symbol=name)
            try:
                tables[name] = {a: codomain[int(i)] for a, i in zip(domain, indices)}
            except IndexError:
                raise IllTypedTable(f"table for {name} has an index outside {format_type(sym.result_type)}",
                                    symbol=name)
        return cls(signature, ground_sizes, tables, budget)

    def with_budget(self, budget: Budget) -> 'FinInterpretation':
        return FinInterpretation(self.signature, self.ground_sizes, self.fn_tables, budget)

    def index_table(self, name: str) -> List[int]:
        sym = self.signature.symbol(name)
        return [self.index_of(sym.result_type, self.fn_tables[name][a]) for a in self.carrier(sym.arg_type)]

    def carrier_size(self, t: TypeExpr) -> int:
        if isinstance(t, One):
            return 1
        if isinstance(t, Omega):
            return 2
        if isinstance(t, Ground):
            return self.ground_sizes[t.name]
        if isinstance(t, Product):
            return math.prod(self.carrier_size(f) for f in t.items)
        if isinstance(t, Power):
            n = self.carrier_size(t.elem)
            if n > 62:
                return self.budget.max_carrier + 1
            return 2 ** n
        raise TypeError(f"not a type expression: {t!r}")

    def carrier(self, t: TypeExpr) -> Tup[object, ...]:
        cached = self._carriers.get(t)
        if cached is not None:
            return cached
        size = self.carrier_size(t)
        if size > self.budget.max_carrier:
            raise BudgetExceeded(f"carrier of {format_type(t)} has {size} elements, cap is {self.budget.max_carrier}",
                                 type=format_type(t), size=size)
        if isinstance(t, One):
            values = (UNIT,)
        elif isinstance(t, Omega):
            values = BOOLS
        elif isinstance(t, Ground):
            values = tuple(Atom(t.name, i) for i in range(self.ground_sizes[t.name]))
        elif isinstance(t, Product):
            values = tuple(TupleV(combo) for combo in itertools.product(*(self.carrier(f) for f in t.items)))
        else:
            base = self.carrier(t.elem)
            values = tuple(SetV(frozenset(base[i] for i in range(len(base)) if mask >> i & 1))
                           for mask in range(2 ** len(base)))
        self._carriers[t] = values
        return values

    def index_of(self, t: TypeExpr, value) -> int:
        index = self._indexes.get(t)
        if index is None:
            index = {v: i for i, v in enumerate(self.carrier(t))}
            self._indexes[t] = index
        return index[value]


def carrier(interp: FinInterpretation, t: TypeExpr) -> Tup[object, ...]:
    return interp.carrier(t)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

_MEMO_LIMIT = 500_000


class Evaluator:
    """Evaluates terms under one interpretation, memoising on free-variable values.

    With ``shortcuts`` the expansions of forall and exists are evaluated as
    all()/any() over the carrier instead of through their comprehensions.
    """

    def __init__(self, interp: FinInterpretation, shortcuts: bool = True):
        self.interp = interp
        self.shortcuts = shortcuts
        self._memo: Dict[Tup[int, tuple], Tup[Term, object]] = {}
        self._shapes: Dict[int, Tup[Term, object]] = {}

    def eval(self, t: Term, env: Mapping[Var, object]):
        fv = t.sorted_free_vars
        try:
            key = (id(t), tuple(env[v] for v in fv))
        except KeyError as e:
            raise TypeMismatch(f"no value for free variable {e.args[0].name}")
        hit = self._memo.get(key)
        if hit is not None and hit[0] is t:
            return hit[1]
        value = self._eval(t, env)
        if len(self._memo) >= _MEMO_LIMIT:
            self._memo.clear()
        self._memo[key] = (t, value)
        return value

    def _quantifier(self, t: Eq):
        hit = self._shapes.get(id(t))
        if hit is not None and hit[0] is t:
            return hit[1]
        shape = None
        if isinstance(t.left, Compr) and isinstance(t.right, Compr):
            found = match_sugar(t)
            if found is not None and found[0] in ('forall', 'exists'):
                shape = (found[0],) + tuple(found[1])
        self._shapes[id(t)] = (t, shape)
        return shape

    def _eval(self, t: Term, env: Mapping[Var, object]):
        if isinstance(t, Var):
            return env[t]
        if isinstance(t, Star):
            return UNIT
        if isinstance(t, App):
            return self.interp.fn_tables[t.symbol][self.eval(t.arg, env)]
        if isinstance(t, Tuple):
            return TupleV(tuple(self.eval(i, env) for i in t.items))
        if isinstance(t, Proj):
            return self.eval(t.arg, env).items[t.index - 1]
        if isinstance(t, Compr):
            inner = dict(env)
            members = []
            for c in self.interp.carrier(t.var.type):
                inner[t.var] = c
                if self.eval(t.body, inner):
                    members.append(c)
            return SetV(frozenset(members))
        if isinstance(t, Eq):
            shape = self._quantifier(t) if self.shortcuts else None
            if shape is not None:
                kind, x, body = shape
                inner = dict(env)

                def holds(c):
                    inner[x] = c
                    return bool(self.eval(body, inner))
                values = self.interp.carrier(x.type)
                return any(map(holds, values)) if kind == 'exists' else all(map(holds, values))
            return self.eval(t.left, env) == self.eval(t.right, env)
        if isinstance(t, Mem):
            return self.eval(t.elem, env) in self.eval(t.set, env).elems
        raise TypeError(f"not a term: {t!r}")


def eval_term(interp: FinInterpretation, t: Term, varlist: Sequence[Var] = (), env: Sequence[object] = (),
              shortcuts: bool = True):
    """Value of t with varlist[i] bound to env[i]."""
    if len(varlist) != len(env):
        raise TypeMismatch("variable list and environment differ in length")
    missing = t.free_vars - set(varlist)
    if missing:
        raise TypeMismatch(f"free variable(s) without values: {', '.join(sorted(v.name for v in missing))}")
    for v, value in zip(varlist, env):
        if value not in set(interp.carrier(v.type)):
            raise TypeMismatch(f"value for {v.name} is not in the carrier of {format_type(v.type)}")
    return Evaluator(interp, shortcuts).eval(t, dict(zip(varlist, env)))


# ---------------------------------------------------------------------------
# Validity
# ---------------------------------------------------------------------------

def environments(interp: FinInterpretation, variables: Sequence[Var]) -> Iterator[Dict[Var, object]]:
    carriers = [interp.carrier(v.type) for v in variables]
    for combo in itertools.product(*carriers):
        yield dict(zip(variables, combo))


def _row_count(interp: FinInterpretation, variables: Sequence[Var]) -> int:
    return math.prod(interp.carrier_size(v.type) for v in variables)


def _scan(interp: FinInterpretation, context: Sequence[Term], conclusion: Term,
          variables: Sequence[Var], rows: Iterable[tuple]) -> Optional[Dict[Var, object]]:
    evaluator = Evaluator(interp)
    for combo in rows:
        env = dict(zip(variables, combo))
        if all(evaluator.eval(g, env) for g in context) and not evaluator.eval(conclusion, env):
            return env
    return None


def find_counterexample(interp: FinInterpretation, context: Sequence[Term], conclusion: Term,
                        threads: Optional[int] = None) -> Optional[Dict[Var, object]]:
    """First environment (canonical order) where the context holds and the conclusion fails."""
    for f in list(context) + [conclusion]:
        if not f.is_formula():
            raise TypeMismatch(f"sequent members must be formulas, got a term of type {f.type}")
    variables = sorted(free_vars_of(list(context) + [conclusion]), key=var_sort_key)
    count = _row_count(interp, variables)
    if count > interp.budget.max_rows:
        raise BudgetExceeded(f"{count} environments exceed the row budget of {interp.budget.max_rows}",
                             rows=count)
    carriers = [interp.carrier(v.type) for v in variables]
    threads = threads or interp.budget.threads
    if threads <= 1 or count < 2 * threads:
        return _scan(interp, context, conclusion, variables, itertools.product(*carriers))
    all_rows = list(itertools.product(*carriers))
    size = -(-len(all_rows) // threads)
    chunks = [all_rows[i:i + size] for i in range(0, len(all_rows), size)]
    logger.debug(f"Scanning {count} environments on {len(chunks)} threads")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda rows: _scan(interp, context, conclusion, variables, rows), chunks))
    for found in results:
        if found is not None:
            return found
    return None


def valid(interp: FinInterpretation, sequent, threads: Optional[int] = None) -> bool:
    """Gamma : beta holds under every environment of its free variables."""
    return find_counterexample(interp, sequent.context, sequent.conclusion, threads) is None


def th_entails(interp: FinInterpretation, gamma: Sequence[Term], alpha: Term,
               threads: Optional[int] = None) -> bool:
    return find_counterexample(interp, gamma, alpha, threads) is None


def equivalent(interp: FinInterpretation, a: Term, b: Term, context: Sequence[Term] = ()) -> bool:
    """Context entails a <=> b, checked in both directions."""
    return th_entails(interp, list(context) + [a], b) and th_entails(interp, list(context) + [b], a)


# ---------------------------------------------------------------------------
# Subobject toolkit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinArrow:
    domain: Tup[object, ...]
    codomain: Tup[object, ...]
    table: Mapping[object, object]

    def __post_init__(self):
        if set(self.table) != set(self.domain):
            raise IllTypedTable("arrow table is not total on its domain")
        cod = set(self.codomain)
        if any(b not in cod for b in self.table.values()):
            raise IllTypedTable("arrow table leaves its codomain")

    def __call__(self, a):
        return self.table[a]

    def __hash__(self):
        return hash((self.domain, self.codomain))

    @classmethod
    def from_function(cls, domain: Sequence[object], codomain: Sequence[object], fn: Callable) -> 'FinArrow':
        return cls(tuple(domain), tuple(codomain), {a: fn(a) for a in domain})

    @classmethod
    def of_formula(cls, interp: FinInterpretation, alpha: Term, x: Var,
                   env: Optional[Mapping[Var, object]] = None) -> 'FinArrow':
        """The arrow carrier(x) -> Omega that alpha denotes in x."""
        evaluator = Evaluator(interp)
        base = dict(env or {})

        def at(a):
            base[x] = a
            return bool(evaluator.eval(alpha, base))
        return cls.from_function(interp.carrier(x.type), BOOLS, at)

    def is_monic(self) -> bool:
        return len(set(self.table.values())) == len(self.domain)

    def is_epic(self) -> bool:
        return set(self.table.values()) == set(self.codomain)

    def image(self) -> Tup[object, ...]:
        hit = set(self.table.values())
        return tuple(b for b in self.codomain if b in hit)

    def inverse(self) -> 'FinArrow':
        if not (self.is_monic() and self.is_epic()):
            raise NotMonic("only bijections have inverses")
        return FinArrow(self.codomain, self.domain, {b: a for a, b in self.table.items()})


def identity(domain: Sequence[object]) -> FinArrow:
    return FinArrow(tuple(domain), tuple(domain), {a: a for a in domain})


def compose(g: FinArrow, f: FinArrow) -> FinArrow:
    """g after f."""
    if set(f.codomain) != set(g.domain):
        raise TypeMismatch("arrows are not composable: codomain and domain differ")
    return FinArrow(f.domain, g.codomain, {a: g.table[f.table[a]] for a in f.domain})


def T(domain: Sequence[object]) -> FinArrow:
    """The characteristic arrow of the identity: constantly true."""
    return FinArrow(tuple(domain), BOOLS, {a: True for a in domain})


def char(mono: FinArrow) -> FinArrow:
    if not mono.is_monic():
        raise NotMonic("characteristic arrows exist for monics only")
    hit = set(mono.table.values())
    return FinArrow(mono.codomain, BOOLS, {b: b in hit for b in mono.codomain})


def bar(u: FinArrow) -> FinArrow:
    """Inclusion of {a : u(a) = true} into u's domain."""
    if tuple(u.codomain) != BOOLS:
        raise TypeMismatch("bar expects an arrow into Omega")
    sub = tuple(a for a in u.domain if u.table[a])
    return FinArrow(sub, u.domain, {a: a for a in sub})


def leq(u: FinArrow, v: FinArrow) -> bool:
    if set(u.domain) != set(v.domain):
        raise TypeMismatch("leq compares arrows with the same domain")
    return all(v.table[a] for a in u.domain if u.table[a])
