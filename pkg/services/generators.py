"""Seeded random signatures, interpretations, terms and finite models for the property suites."""
import logging
import os
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from services.finset_model import Budget, DEFAULT_BUDGET, FinInterpretation
from services.language import (
    OMEGA, ONE, STAR, App, Compr, Eq, Ground, Mem, Power, Signature, Term, Tuple, TypeExpr, Var, product,
)
from services.set_theory import LSet, SFunction, represent
from services.sugar import FALSE, TRUE, and_, exists, forall, iff, implies, not_, or_
from services.translation import InternalLanguage

logger = logging.getLogger(__name__)

GROUND_NAMES = ('A', 'B', 'C')
VAR_STEMS = ('x', 'y', 'z')


def seeded_rng(seed: Optional[int] = None) -> random.Random:
    """random.Random seeded from the argument or LOSET_SEED."""
    if seed is None:
        seed = int(os.environ.get('LOSET_SEED', 0))
    return random.Random(seed)


# ---------------------------------------------------------------------------
# Signatures and interpretations
# ---------------------------------------------------------------------------

def random_signature(rng: random.Random, max_grounds: int = 2, max_symbols: int = 2,
                     constants: bool = False) -> Signature:
    grounds = list(GROUND_NAMES[:rng.randint(1, max_grounds)])
    symbols = []
    for i in range(rng.randint(0, max_symbols)):
        arg = rng.choice([Ground(g) for g in grounds] + [product(Ground(rng.choice(grounds)),
                                                                 Ground(rng.choice(grounds)))])
        result = rng.choice([Ground(g) for g in grounds] + [OMEGA])
        symbols.append((f"f{i}", arg, result))
    if constants:
        symbols += [(f"c_{g}", ONE, Ground(g)) for g in grounds]
    return Signature.build(grounds, symbols, nullstellensatz=constants)


def random_interpretation(rng: random.Random, sig: Signature, max_size: int = 3, min_size: int = 0,
                          budget: Budget = DEFAULT_BUDGET) -> FinInterpretation:
    """Random carriers of size min_size..max_size and random total tables."""
    needed = set()
    for sym in sig.function_symbols.values():
        needed |= sym.result_type.grounds()
    sizes = {}
    for g in sig.ground_types:
        low = max(min_size, 1 if g in needed or sig.nullstellensatz else 0)
        sizes[g] = rng.randint(low, max(low, max_size))
    shell = FinInterpretation(Signature(sig.ground_types), sizes, {}, budget)
    tables = {}
    for name, sym in sig.function_symbols.items():
        codomain = shell.carrier(sym.result_type)
        tables[name] = {a: rng.choice(codomain) for a in shell.carrier(sym.arg_type)}
    return FinInterpretation(sig, sizes, tables, budget)


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class TermGenerator:
    """Random well-typed terms over a signature, with a fixed pool of variable names.

    Binders draw from the same pool as the free variables, so generated terms
    shadow and capture as often as real ones do.
    """

    def __init__(self, rng: random.Random, sig: Signature, variables: Sequence[Var] = (),
                 power_depth: int = 1):
        self.rng = rng
        self.sig = sig
        self.variables = list(variables)
        self.power_depth = power_depth

    def small_type(self, powers: int = 0) -> TypeExpr:
        base = [Ground(g) for g in self.sig.ground_types] + [OMEGA]
        t = self.rng.choice(base)
        if powers < self.power_depth and self.rng.random() < 0.25:
            return Power(t)
        return t

    def var_of(self, type_: TypeExpr, scope: Sequence[Var]) -> Optional[Var]:
        candidates = [v for v in scope if v.type == type_]
        return self.rng.choice(candidates) if candidates else None

    def binder(self, type_: TypeExpr) -> Var:
        return Var(self.rng.choice(VAR_STEMS), type_)

    def term(self, type_: TypeExpr, depth: int, scope: Optional[Sequence[Var]] = None) -> Term:
        scope = self.variables if scope is None else scope
        if type_ == OMEGA:
            return self.formula(depth, scope)
        if type_ == ONE:
            return STAR
        v = self.var_of(type_, scope)
        if isinstance(type_, Ground):
            makers = [s for s in self.sig.function_symbols.values() if s.result_type == type_]
            if makers and depth > 0 and (v is None or self.rng.random() < 0.5):
                sym = self.rng.choice(makers)
                return App(sym.name, self.term(sym.arg_type, depth - 1, scope), type_)
            return v if v is not None else Var(f"{type_.name.lower()}0", type_)
        if v is not None and (depth <= 0 or self.rng.random() < 0.4):
            return v
        if isinstance(type_, Power):
            bound = self.binder(type_.elem)
            return Compr(bound, self.formula(max(depth - 1, 0), list(scope) + [bound]))
        return Tuple(tuple(self.term(f, depth - 1, scope) for f in type_.items))

    def formula(self, depth: int, scope: Optional[Sequence[Var]] = None) -> Term:
        scope = self.variables if scope is None else scope
        rng = self.rng
        if depth <= 0:
            choice = rng.randrange(4)
            if choice == 0:
                return rng.choice([TRUE, FALSE])
            omega = self.var_of(OMEGA, scope)
            if choice == 1 and omega is not None:
                return omega
            t = self.small_type(powers=self.power_depth)
            return Eq(self.term(t, 0, scope), self.term(t, 0, scope))
        choice = rng.randrange(9)
        sub = depth - 1
        if choice == 0:
            return and_(self.formula(sub, scope), self.formula(sub, scope))
        if choice == 1:
            return or_(self.formula(sub, scope), self.formula(sub, scope))
        if choice == 2:
            return implies(self.formula(sub, scope), self.formula(sub, scope))
        if choice == 3:
            return not_(self.formula(sub, scope))
        if choice in (4, 5):
            bound = self.binder(self.small_type(powers=self.power_depth))
            quantifier = forall if choice == 4 else exists
            return quantifier(bound, self.formula(sub, list(scope) + [bound]))
        if choice == 6:
            t = self.small_type()
            return Mem(self.term(t, sub, scope), self.term(Power(t), sub, scope))
        if choice == 7:
            predicates = [s for s in self.sig.function_symbols.values() if s.result_type == OMEGA]
            if predicates:
                sym = rng.choice(predicates)
                return App(sym.name, self.term(sym.arg_type, sub, scope), OMEGA)
            return iff(self.formula(sub, scope), self.formula(sub, scope))
        t = self.small_type()
        return Eq(self.term(t, sub, scope), self.term(t, sub, scope))


# ---------------------------------------------------------------------------
# Translation setups
# ---------------------------------------------------------------------------

@dataclass
class TranslationSetup:
    """f : X -> Y between subsets of two grounds, with variables for the translation suites."""
    interp: FinInterpretation
    f: SFunction
    x: Var
    y: Var
    companion: Var

    def generator(self, rng: random.Random) -> TermGenerator:
        return TermGenerator(rng, self.interp.signature, [self.y, self.companion], power_depth=0)


def _random_subset(rng: random.Random, carrier: Sequence, nonempty: bool = True) -> List:
    chosen = [a for a in carrier if rng.random() < 0.6]
    if nonempty and not chosen and carrier:
        chosen = [rng.choice(carrier)]
    return chosen


def translation_setup(rng: random.Random, max_size: int = 3, universal_domain: bool = False,
                      bijective: bool = False) -> TranslationSetup:
    """X = {x : p(x)} in A, Y = {y : q(y)} in B and f(x) = F(x) for random tables p, q, F.

    A bijective setup takes X = U_A and Y the image of an injective F.
    """
    size_b = rng.randint(1, max_size)
    size_a = rng.randint(1, size_b) if bijective else rng.randint(1, max_size)
    A, B = Ground('A'), Ground('B')
    sig = Signature.build(['A', 'B'], [('p', A, OMEGA), ('q', B, OMEGA), ('F', A, B), ('r', B, OMEGA)])
    shell = FinInterpretation(Signature(('A', 'B')), {'A': size_a, 'B': size_b}, {})
    carrier_a, carrier_b = shell.carrier(A), shell.carrier(B)
    if bijective or universal_domain:
        X = list(carrier_a)
    else:
        X = _random_subset(rng, carrier_a)
    if bijective:
        images = rng.sample(list(carrier_b), len(carrier_a))
        F = dict(zip(carrier_a, images))
        Y = images
    else:
        Y = _random_subset(rng, carrier_b)
        F = {a: rng.choice(Y) if a in X else rng.choice(carrier_b) for a in carrier_a}
        Y = sorted(set(Y), key=lambda v: v.index)
    tables = {
        'p': {a: a in X for a in carrier_a},
        'q': {b: b in Y for b in carrier_b},
        'F': F,
        'r': {b: rng.random() < 0.5 for b in carrier_b},
    }
    interp = FinInterpretation(sig, {'A': size_a, 'B': size_b}, tables)
    x, y, z = Var('x', A), Var('y', B), Var('z', A)
    dom = LSet(Compr(x, App('p', x, OMEGA)))
    cod = LSet(Compr(y, App('q', y, OMEGA)))
    f = represent(interp, [x], App('F', x, B), dom, cod)
    return TranslationSetup(interp, f, x, y, z)


# ---------------------------------------------------------------------------
# Finite models for the internal-language battery
# ---------------------------------------------------------------------------

@dataclass
class RandomModel:
    """A base interpretation and its internal language with S-sets X1.. and S-functions f1.. registered."""
    interp: FinInterpretation
    lang: InternalLanguage
    tables: Dict[str, Dict]


def random_model(rng: random.Random, max_objects: int = 3, max_size: int = 4,
                 max_functions: int = 3, budget: Budget = DEFAULT_BUDGET) -> RandomModel:
    """Objects are nonempty subsets X_i of grounds A_i; arrows come from random tables F_k."""
    count = rng.randint(1, max_objects)
    grounds = [f"A{i + 1}" for i in range(count)]
    sizes = {g: rng.randint(1, max_size) for g in grounds}
    shell = FinInterpretation(Signature(tuple(grounds)), sizes, {}, budget)
    members = {g: _random_subset(rng, shell.carrier(Ground(g))) for g in grounds}

    symbols, tables, arrows = [], {}, []
    for i, g in enumerate(grounds):
        symbols.append((f"p{i + 1}", Ground(g), OMEGA))
        tables[f"p{i + 1}"] = {a: a in members[g] for a in shell.carrier(Ground(g))}
    for k in range(rng.randint(1, max_functions)):
        s, t = rng.randrange(count), rng.randrange(count)
        src, dst = grounds[s], grounds[t]
        name = f"F{k + 1}"
        symbols.append((name, Ground(src), Ground(dst)))
        tables[name] = {a: rng.choice(members[dst] if a in members[src] else shell.carrier(Ground(dst)))
                        for a in shell.carrier(Ground(src))}
        arrows.append((k + 1, s, t))

    interp = FinInterpretation(Signature.build(grounds, symbols), sizes, tables, budget)
    lang = InternalLanguage(interp)
    ssets = []
    for i, g in enumerate(grounds):
        x = Var('x', Ground(g))
        X = LSet(Compr(x, App(f"p{i + 1}", x, OMEGA)))
        lang.register_sset(f"X{i + 1}", X)
        ssets.append(X)
    for k, s, t in arrows:
        x = Var('x', Ground(grounds[s]))
        f = represent(interp, [x], App(f"F{k}", x, Ground(grounds[t])), ssets[s], ssets[t])
        lang.register_sfunction(f"f{k}", f, f"X{s + 1}", f"X{t + 1}")
    logger.debug(f"Random model with {count} objects and {len(arrows)} arrows")
    return RandomModel(interp, lang, tables)
