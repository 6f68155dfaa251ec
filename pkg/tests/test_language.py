import pytest

from services.errors import ArityError, NotFreeFor, TypeMismatch, UnknownSymbol
from services.finset_model import eval_term
from services.generators import TermGenerator, random_interpretation, random_signature
from services.language import (
    OMEGA, ONE, STAR, STRICT, App, Compr, Eq, Ground, Mem, Power, Proj, Signature, Tuple, Var,
    alpha_eq, app, closed_term, elaborate, format_type, is_free_for, product, proj, substitute,
    simultaneous_substitute, tup, var_sort_key,
)
from services.sexpr import read_sexpr
from services.sugar import read_sugar

A, B = Ground('A'), Ground('B')


class TestTypes:
    def test_product_normalises_arity(self):
        assert product() == ONE
        assert product(A) == A
        assert product(A, B).factors() == (A, B)

    def test_format_type(self):
        assert format_type(Power(product(A, OMEGA))) == '(pow (prod A Omega))'

    def test_undeclared_ground_rejected(self):
        with pytest.raises(UnknownSymbol):
            Signature.build(['A'], [('f', A, B)])

    def test_duplicate_symbol_rejected(self):
        with pytest.raises(TypeMismatch):
            Signature.build(['A'], [('f', A, A), ('f', A, OMEGA)])


class TestTerms:
    def test_tuple_and_projection_provisos(self):
        x = Var('x', A)
        assert tup() == STAR
        assert tup(x) == x
        assert proj(1, x, arity=1) == x
        pair = tup(x, Var('y', B))
        assert proj(2, pair).type == B
        with pytest.raises(ArityError):
            Proj(3, pair)

    def test_equality_needs_matching_types(self):
        with pytest.raises(TypeMismatch):
            Eq(Var('x', A), Var('y', B))

    def test_membership_needs_power_type(self):
        x = Var('x', A)
        with pytest.raises(TypeMismatch):
            Mem(x, Var('s', Power(B)))
        assert Mem(x, Compr(Var('z', A), Eq(Var('z', A), x))).type == OMEGA

    def test_application_checks_argument_type(self, sig):
        with pytest.raises(TypeMismatch):
            app(sig, 'p', Var('y', B))
        assert app(sig, 'F', Var('x', A)).type == B

    def test_free_vars_respect_binders(self):
        x, y = Var('x', A), Var('y', A)
        t = Compr(x, Eq(x, y))
        assert t.free_vars == frozenset([y])
        assert t.names == frozenset(['x', 'y'])

    def test_variables_differ_by_type(self):
        assert Var('x', A) != Var('x', B)
        assert var_sort_key(Var('x', A)) < var_sort_key(Var('x', B))

    def test_closed_terms(self, sig):
        assert closed_term(sig, A) == App('c', STAR, A)
        assert closed_term(sig, B) is None
        assert closed_term(sig, product(A, OMEGA)).type == product(A, OMEGA)


class TestSubstitution:
    def test_alpha_equality(self):
        x, z = Var('x', A), Var('z', A)
        p = Var('q', Power(A))
        assert alpha_eq(Compr(x, Mem(x, p)), Compr(z, Mem(z, p)))
        assert not alpha_eq(Compr(x, Mem(x, p)), Compr(Var('x', B), Eq(Var('x', B), Var('x', B))))

    def test_capture_is_avoided(self):
        x, y = Var('x', A), Var('y', A)
        t = Compr(y, Eq(y, x))
        result = substitute(t, x, y)
        assert result.free_vars == frozenset([y])
        assert not alpha_eq(result, Compr(y, Eq(y, y)))
        assert result.var != y

    def test_strict_mode_refuses_capture(self):
        x, y = Var('x', A), Var('y', A)
        t = Compr(y, Eq(y, x))
        assert not is_free_for(y, x, t)
        with pytest.raises(NotFreeFor):
            substitute(t, x, y, STRICT)

    def test_bound_occurrences_untouched(self):
        x = Var('x', A)
        t = Compr(x, Eq(x, x))
        assert substitute(t, x, Var('y', A)) is t

    def test_simultaneous_swap(self):
        x, y = Var('x', A), Var('y', A)
        swapped = simultaneous_substitute(Tuple((x, y)), [(x, y), (y, x)])
        assert swapped == Tuple((y, x))

    def test_wrong_type_rejected(self):
        with pytest.raises(TypeMismatch):
            substitute(Var('x', A), Var('x', A), Var('y', B))

    def test_substitution_lemma(self, rng):
        """Value of t(x/s) is the value of t with x bound to the value of s."""
        checked = 0
        while checked < 500:
            sig = random_signature(rng, max_grounds=2, max_symbols=2)
            interp = random_interpretation(rng, sig, max_size=2, min_size=1)
            grounds = [Ground(g) for g in sig.ground_types]
            scope = [Var('x', rng.choice(grounds)), Var('y', rng.choice(grounds)), Var('z', OMEGA)]
            gen = TermGenerator(rng, sig, scope)
            t = gen.formula(rng.randint(0, 3))
            x = rng.choice(scope)
            s = gen.term(x.type, rng.randint(0, 2))
            variables = sorted(t.free_vars | s.free_vars | {x}, key=var_sort_key)
            env = [rng.choice(interp.carrier(v.type)) for v in variables]
            at_s = eval_term(interp, s, variables, env)
            shifted = [at_s if v == x else value for v, value in zip(variables, env)]
            assert eval_term(interp, substitute(t, x, s), variables, env) == \
                eval_term(interp, t, variables, shifted)
            checked += 1


class TestElaboration:
    def test_core_formers(self, sig):
        raw = read_sexpr('(mem (var x A) (compr (z A) (app p (var z A))))')
        t = elaborate(sig, raw)
        assert t.type == OMEGA
        assert t.elem == Var('x', A)

    def test_unknown_former(self, sig):
        with pytest.raises(UnknownSymbol):
            elaborate(sig, read_sexpr('(frobnicate (var x A))'))

    def test_projection_arity(self, sig):
        t = elaborate(sig, read_sexpr('(proj 2 (tuple (var x A) (var y B)))'))
        assert t.type == B

    @pytest.mark.parametrize('text', [
        '(proj one (tuple star star))',
        '(proj 1 (tuple star star) two)',
        '(proj (star) (tuple star star))',
    ])
    def test_projection_index_must_be_an_integer(self, sig, text):
        with pytest.raises(ArityError):
            elaborate(sig, read_sexpr(text))

    def test_sugar_through_extension(self, sig):
        t = elaborate(sig, read_sexpr('(forall (x A) (app p (var x A)))'), read_sugar)
        assert isinstance(t, Eq) and isinstance(t.left, Compr)
