"""Checks run against the internal language of a finite model.

Every check is decided in the theory of the model, so each one is a
boolean verdict recorded as a ``CheckRecord``.
"""
import logging
import random
from typing import List, Optional

from models import CheckRecord
from services.finset_model import th_entails
from services.language import OMEGA, App, Compr, Eq, Var, first_unused
from services.set_theory import compose, is_bijection, sfunction_eq
from services.sugar import exists, iff
from services.translation import (
    InternalLanguage, correstriction_of_inclusion, f_star, rho, symbol_map,
)

logger = logging.getLogger(__name__)


def _record(checks: List[CheckRecord], name: str, subject: str, passed: bool, detail: str = ''):
    if not passed:
        logger.warning(f"Battery check {name} failed for {subject}")
    checks.append(CheckRecord(name=name, subject=subject, passed=bool(passed), detail=detail))


def check_sfunction(lang: InternalLanguage, name: str, checks: List[CheckRecord]):
    f, dom, cod = lang.sfunctions[name]
    interp = lang.interp
    _record(checks, 'f_star', name, sfunction_eq(interp, f_star(lang, name), symbol_map(lang, name)),
            "f* agrees with u |-> f(u)")

    u = Var('u', lang.object_type(dom))
    image = lang.symbol_term(name, u)
    pair = f.relates(lang.inclusion_term(dom, u), lang.inclusion_term(cod, image))
    _record(checks, 'unicity', name, th_entails(interp, [], pair), "<i_X(u), i_Y(f(u))> in |f|")

    along_f = compose(interp, f, correstriction_of_inclusion(lang, dom))
    along_symbol = compose(interp, correstriction_of_inclusion(lang, cod), symbol_map(lang, name))
    _record(checks, 'square', name, sfunction_eq(interp, along_f, along_symbol),
            "f after r_X equals r_Y after u |-> f(u)")


def check_sset(lang: InternalLanguage, name: str, rng: random.Random, checks: List[CheckRecord]):
    interp = lang.interp
    X = lang.ssets[name]
    _record(checks, 'r_bijective', name, is_bijection(interp, correstriction_of_inclusion(lang, name)),
            "u |-> i_X(u) correstricted to X")

    x = first_unused('x', X.elem_type, ())
    u = Var('u', lang.object_type(name))
    belonging = iff(X.member(x), exists(u, Eq(x, lang.inclusion_term(name, u))))
    _record(checks, 'belonging', name, th_entails(interp, [], belonging), "x in X iff x = i_X(u) for some u")

    labels = lang.objects[name]
    for frak in (Compr(u, Eq(u, u)), _random_subset(lang, name, rng)):
        result = rho(lang, name, frak)
        detail = f"{len(result.members)} of {len(labels)} members"
        _record(checks, 'rho', name, result.ok, detail)


def _random_subset(lang: InternalLanguage, name: str, rng: random.Random):
    """{u : k(u)} for a freshly registered k : X -> Omega."""
    taken = set(lang.arrows)
    k, n = f"k_{name}", 1
    while k in taken:
        n += 1
        k = f"k{n}_{name}"
    lang.add_arrow(k, name, OMEGA, {label: rng.random() < 0.5 for label in lang.objects[name]})
    u = Var('u', lang.object_type(name))
    return Compr(u, App(k, u, OMEGA))


def check_arrow(lang: InternalLanguage, name: str, checks: List[CheckRecord]):
    interp = lang.interp
    arrow = lang.arrows[name]
    table = lang.arrow_map(name)
    a = first_unused('a', arrow.dom, ())
    b = first_unused('b', arrow.dom, {a.name})
    monic_in_theory = th_entails(interp, [Eq(lang.symbol_term(name, a), lang.symbol_term(name, b))], Eq(a, b))
    _record(checks, 'monic_criterion', name, monic_in_theory == table.is_monic(),
            "monic" if table.is_monic() else "not monic")
    if not table.is_monic():
        return
    chi = f"chi_{name}"
    if chi not in lang.arrows:
        lang.register_characteristic(chi, name)
    x = first_unused('x', arrow.cod, ())
    y = first_unused('y', arrow.dom, {x.name})
    classified = iff(App(chi, x, OMEGA), exists(y, Eq(x, lang.symbol_term(name, y))))
    _record(checks, 'characteristic', name, th_entails(lang.interp, [], classified),
            "chi(m)(x) iff x = m(y) for some y")


def topos_battery(lang: InternalLanguage, rng: Optional[random.Random] = None) -> List[CheckRecord]:
    """Run every check on every registered S-set, S-function and arrow of lang."""
    rng = rng or random.Random(0)
    checks: List[CheckRecord] = []
    arrows = [name for name in lang.arrows if name not in lang.characteristic]
    for name in list(lang.sfunctions):
        check_sfunction(lang, name, checks)
    for name in list(lang.ssets):
        check_sset(lang, name, rng, checks)
    for name in arrows:
        check_arrow(lang, name, checks)
    passed = sum(1 for c in checks if c.passed)
    logger.info(f"Topos battery: {passed}/{len(checks)} checks passed")
    return checks
