import pytest

from services.deduction import Sequent
from services.errors import (
    BudgetExceeded, IllTypedTable, NotMonic, SideConditionViolated, TypeMismatch, UnknownSymbol,
)
from services.finset_model import (
    BOOLS, UNIT, Atom, Budget, FinArrow, FinInterpretation, SetV, TupleV, bar, char, compose, equivalent,
    eval_term, find_counterexample, format_value, identity, leq, th_entails, valid, T,
)
from services.language import OMEGA, ONE, STAR, App, Compr, Eq, Ground, Power, Signature, Var, product, tup
from services.sugar import TRUE, exists, forall, implies, not_, or_

A, B = Ground('A'), Ground('B')


class TestCarriers:
    def test_canonical_carriers(self, interp):
        assert interp.carrier(ONE) == (UNIT,)
        assert interp.carrier(OMEGA) == BOOLS
        assert interp.carrier(A) == (Atom('A', 0), Atom('A', 1), Atom('A', 2))
        assert len(interp.carrier(product(A, B))) == 6
        assert interp.carrier(product(A, B))[1] == TupleV((Atom('A', 0), Atom('B', 1)))
        powers = interp.carrier(Power(B))
        assert powers[0] == SetV(frozenset()) and len(powers) == 4

    def test_index_of(self, interp):
        assert interp.index_of(A, Atom('A', 2)) == 2
        assert interp.index_table('F') == [0, 1, 1]

    def test_format_values(self):
        assert format_value(True) == '#t'
        assert format_value(Atom('A', 0)) == 'A0'
        assert format_value(TupleV((UNIT, False))) == '<unit #f>'
        assert format_value(SetV(frozenset([Atom('B', 1), Atom('B', 0)]))) == '{B0 B1}'

    def test_carrier_cap(self, interp):
        small = interp.with_budget(Budget(max_carrier=8))
        assert len(small.carrier(Power(A))) == 8
        with pytest.raises(BudgetExceeded):
            small.carrier(Power(product(A, B)))


class TestTables:
    def test_partial_table_rejected(self, sig):
        with pytest.raises(IllTypedTable):
            FinInterpretation.from_index_tables(sig, {'A': 3, 'B': 2}, {'p': [1, 0], 'F': [0, 1, 1], 'c': [0]})

    def test_value_outside_codomain(self, sig):
        with pytest.raises(IllTypedTable):
            FinInterpretation.from_index_tables(sig, {'A': 3, 'B': 2}, {'p': [1, 0, 1], 'F': [0, 1, 2], 'c': [0]})

    def test_missing_table(self, sig):
        with pytest.raises(IllTypedTable):
            FinInterpretation.from_index_tables(sig, {'A': 3, 'B': 2}, {'p': [1, 0, 1], 'F': [0, 1, 1]})

    def test_undeclared_ground(self):
        with pytest.raises(UnknownSymbol):
            FinInterpretation(Signature.build(['A']), {'A': 1, 'C': 2}, {})

    def test_nullstellensatz_needs_inhabited_carriers(self):
        sig = Signature.build(['A'], [('k', ONE, A)], nullstellensatz=True)
        with pytest.raises(IllTypedTable):
            FinInterpretation(sig, {'A': 0}, {'k': {}})
        with pytest.raises(SideConditionViolated):
            Signature.build(['A'], [], nullstellensatz=True)


class TestEvaluation:
    def test_applications_and_tuples(self, interp, xa):
        fx = App('F', xa, B)
        assert eval_term(interp, fx, [xa], [Atom('A', 1)]) == Atom('B', 1)
        assert eval_term(interp, tup(STAR, xa), [xa], [Atom('A', 0)]) == TupleV((UNIT, Atom('A', 0)))

    def test_comprehension(self, interp, xa):
        assert eval_term(interp, Compr(xa, App('p', xa, OMEGA))) == \
            SetV(frozenset([Atom('A', 0), Atom('A', 2)]))

    def test_free_variables_need_values(self, interp, xa):
        with pytest.raises(TypeMismatch):
            eval_term(interp, Eq(xa, xa))
        with pytest.raises(TypeMismatch):
            eval_term(interp, Eq(xa, xa), [xa], [Atom('B', 0)])


class TestValidity:
    def test_excluded_middle_holds_classically(self, interp, xa):
        px = App('p', xa, OMEGA)
        assert valid(interp, Sequent((), or_(px, not_(px))))

    def test_counterexample_is_first_in_canonical_order(self, interp, xa):
        px = App('p', xa, OMEGA)
        assert find_counterexample(interp, [], px) == {xa: Atom('A', 1)}
        assert find_counterexample(interp, [px], px) is None

    def test_parallel_scan_agrees(self, interp, xa, yb):
        fx = App('F', xa, B)
        sequential = find_counterexample(interp, [], Eq(fx, yb), threads=1)
        parallel = find_counterexample(interp, [], Eq(fx, yb), threads=3)
        assert sequential == parallel

    def test_row_budget(self, interp, xa):
        tight = interp.with_budget(Budget(max_rows=2))
        with pytest.raises(BudgetExceeded):
            valid(tight, Sequent((), Eq(xa, xa)))

    def test_entailment_and_equivalence(self, interp, xa):
        px = App('p', xa, OMEGA)
        assert th_entails(interp, [forall(xa, px)], px)
        assert not th_entails(interp, [exists(xa, px)], px)
        assert equivalent(interp, implies(TRUE, px), px)

    def test_empty_carrier(self):
        sig = Signature.build(['A'], [('r', A, OMEGA)])
        empty = FinInterpretation.from_index_tables(sig, {'A': 0}, {'r': []})
        x = Var('x', A)
        assert valid(empty, Sequent((), forall(x, App('r', x, OMEGA))))
        assert not valid(empty, Sequent((), exists(x, TRUE)))


class TestArrows:
    def test_monic_epic_and_image(self, interp):
        F = FinArrow.from_function(interp.carrier(A), interp.carrier(B), interp.fn_tables['F'].__getitem__)
        assert not F.is_monic()
        assert F.is_epic()
        assert F.image() == interp.carrier(B)
        with pytest.raises(NotMonic):
            F.inverse()

    def test_characteristic_round_trip(self, interp, xa):
        p = FinArrow.of_formula(interp, App('p', xa, OMEGA), xa)
        sub = bar(p)
        assert sub.is_monic()
        assert char(sub) == p
        assert leq(p, T(interp.carrier(A)))
        assert not leq(T(interp.carrier(A)), p)

    def test_composition(self, interp):
        carrier = interp.carrier(A)
        shift = FinArrow(carrier, carrier, {carrier[i]: carrier[(i + 1) % 3] for i in range(3)})
        assert compose(shift.inverse(), shift) == identity(carrier)
        with pytest.raises(TypeMismatch):
            compose(shift, FinArrow(interp.carrier(B), interp.carrier(B), {b: b for b in interp.carrier(B)}))
