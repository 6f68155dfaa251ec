import itertools

import pytest

from services.errors import TypeMismatch
from services.finset_model import FinInterpretation, SetV, eval_term
from services.language import OMEGA, STAR, App, Compr, Eq, Ground, Mem, Power, Signature, Var, alpha_eq
from services.sexpr import read_sexpr
from services.language import elaborate
from services.sugar import (
    FALSE, TRUE, and_, empty, exists, exists_in, exists_unique, forall, forall_in, iff, image_set,
    implies, intersection, match_sugar, not_, or_, read_sugar, singleton, subset, union, universal,
)

A = Ground('A')
P, Q = Var('p', OMEGA), Var('q', OMEGA)
BOOLS = (False, True)


@pytest.fixture
def empty_interp():
    return FinInterpretation(Signature(), {}, {})


def _value(interp, t, variables=(), env=()):
    return eval_term(interp, t, variables, env, shortcuts=False)


class TestTruthTables:
    def test_constants(self, empty_interp):
        assert _value(empty_interp, TRUE) is True
        assert _value(empty_interp, FALSE) is False

    @pytest.mark.parametrize('build,table', [
        (and_, lambda a, b: a and b),
        (or_, lambda a, b: a or b),
        (implies, lambda a, b: (not a) or b),
        (iff, lambda a, b: a == b),
    ])
    def test_binary_connectives(self, empty_interp, build, table):
        formula = build(P, Q)
        for a, b in itertools.product(BOOLS, BOOLS):
            assert _value(empty_interp, formula, [P, Q], [a, b]) == table(a, b)

    def test_negation(self, empty_interp):
        for a in BOOLS:
            assert _value(empty_interp, not_(P), [P], [a]) == (not a)

    @pytest.mark.parametrize('size', [0, 1, 2, 3])
    def test_quantifiers_are_finite_conjunction_and_disjunction(self, size):
        sig = Signature.build(['A'], [('r', A, OMEGA)])
        x = Var('x', A)
        body = App('r', x, OMEGA)
        for values in itertools.product(BOOLS, repeat=size):
            interp = FinInterpretation.from_index_tables(sig, {'A': size}, {'r': [int(v) for v in values]})
            assert _value(interp, forall(x, body)) == all(values)
            assert _value(interp, exists(x, body)) == any(values)
            assert _value(interp, exists_unique(x, body)) == (sum(values) == 1)

    def test_shortcuts_agree_with_expansions(self, interp, xa):
        body = App('p', xa, OMEGA)
        for formula in (forall(xa, body), exists(xa, body), not_(exists(xa, not_(body)))):
            assert eval_term(interp, formula) == eval_term(interp, formula, shortcuts=False)


class TestSetAbbreviations:
    def test_bounded_quantifiers(self, interp, xa):
        X = Compr(xa, App('p', xa, OMEGA))
        assert eval_term(interp, forall_in(xa, X, App('p', xa, OMEGA))) is True
        assert eval_term(interp, exists_in(xa, X, not_(App('p', xa, OMEGA)))) is False

    def test_set_operations(self, interp, xa):
        X = Compr(xa, App('p', xa, OMEGA))
        everything, nothing = universal(A), empty(A)
        carrier = interp.carrier(A)
        assert eval_term(interp, everything) == SetV(frozenset(carrier))
        assert eval_term(interp, nothing) == SetV(frozenset())
        assert eval_term(interp, union(X, nothing)) == eval_term(interp, X)
        assert eval_term(interp, intersection(X, everything)) == eval_term(interp, X)
        assert eval_term(interp, subset(X, everything)) is True
        assert eval_term(interp, subset(everything, X)) is False

    def test_singleton_and_image(self, interp, xa):
        c = App('c', STAR, A)
        assert eval_term(interp, singleton(c)) == SetV(frozenset([interp.carrier(A)[2]]))
        image = image_set(App('F', xa, Ground('B')), App('p', xa, OMEGA), [xa])
        assert len(eval_term(interp, image)) == 2

    def test_type_errors(self, xa):
        with pytest.raises(TypeMismatch):
            and_(xa, TRUE)
        with pytest.raises(TypeMismatch):
            forall_in(xa, Compr(Var('y', OMEGA), TRUE), TRUE)


class TestResugaring:
    @pytest.mark.parametrize('keyword,build', [
        ('and', lambda: and_(P, Q)),
        ('or', lambda: or_(P, Q)),
        ('implies', lambda: implies(P, Q)),
        ('not', lambda: not_(P)),
    ])
    def test_connectives_are_recognised(self, keyword, build):
        found = match_sugar(build())
        assert found[0] == keyword
        assert alpha_eq(found[1][0], P)

    def test_quantifiers_are_recognised(self, xa):
        body = Eq(xa, xa)
        assert match_sugar(forall(xa, body)) == ('forall', (xa, body))
        kind, (bound, inner) = match_sugar(exists(xa, body))
        assert kind == 'exists' and bound == xa and alpha_eq(inner, body)

    def test_constants_are_recognised(self):
        assert match_sugar(TRUE) == ('true', ())
        assert match_sugar(FALSE) == ('false', ())

    def test_plain_equation_is_not_sugar(self, xa):
        assert match_sugar(Eq(xa, xa)) is None

    def test_expansion_is_deterministic(self, sig):
        text = '(exists (x A) (or (app p (var x A)) (not (app p (var x A)))))'
        first = elaborate(sig, read_sexpr(text), read_sugar)
        second = elaborate(sig, read_sexpr(text), read_sugar)
        assert first == second

    def test_universe_reads_a_type(self, sig):
        t = elaborate(sig, read_sexpr('(universe A)'), read_sugar)
        assert t.type == Power(A)
