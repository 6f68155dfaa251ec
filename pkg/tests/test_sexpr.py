import pytest

from services.deduction import DEFAULT_UNIT_VAR, AxiomLeaf, AxiomSchema, Rule, RuleNode
from services.errors import SexprSyntaxError
from services.language import OMEGA, STAR, App, Ground, Var, elaborate
from services.sexpr import print_proof, print_term, read_sexpr, read_sexprs, write_sexpr
from services.sugar import TRUE, and_, exists, forall, read_sugar

A = Ground('A')
P, Q = Var('p', OMEGA), Var('q', OMEGA)


class TestReader:
    def test_nested_lists(self):
        assert read_sexpr('(a (b c) d)') == ['a', ['b', 'c'], 'd']
        assert read_sexprs('x (y) ()') == ['x', ['y'], []]

    def test_comments_are_skipped(self):
        assert read_sexprs('; heading\n(a ; inline\n b)') == [['a', 'b']]

    def test_parenthesis_in_comment_is_ignored(self):
        assert read_sexpr('(a) ; (unclosed') == ['a']

    @pytest.mark.parametrize('text,offset,line,column', [
        ('(a b))', 5, 1, 6),
        ('(a (b', 3, 1, 4),
        ('(a\n  (b', 5, 2, 3),
        (')', 0, 1, 1),
    ])
    def test_syntax_errors_carry_positions(self, text, offset, line, column):
        with pytest.raises(SexprSyntaxError) as info:
            read_sexprs(text)
        assert (info.value.offset, info.value.line, info.value.column) == (offset, line, column)
        assert info.value.to_dict()['error'] == 'syntax_error'

    def test_read_one_needs_exactly_one_form(self):
        with pytest.raises(SexprSyntaxError):
            read_sexpr('(a) (b)')

    def test_write(self):
        assert write_sexpr(['seq', ['ctx'], 'true']) == '(seq (ctx) true)'


class TestPrinter:
    def test_sugar_is_restored(self, xa):
        px = App('p', xa, OMEGA)
        assert print_term(forall(xa, px)) == '(forall (x A) (app p (var x A)))'
        assert print_term(and_(P, Q)) == '(and (var p Omega) (var q Omega))'
        assert print_term(TRUE) == 'true'
        assert print_term(TRUE, resugar=False) == '(eq star star)'

    def test_printed_terms_read_back(self, sig, xa):
        px = App('p', xa, OMEGA)
        for t in (forall(xa, px), exists(xa, px), and_(px, TRUE), App('F', App('c', STAR, A), Ground('B'))):
            assert elaborate(sig, read_sexpr(print_term(t)), read_sugar) == t

    def test_proof_trees(self):
        proof = RuleNode(Rule.SUBSTITUTION, (DEFAULT_UNIT_VAR, STAR), [AxiomLeaf(AxiomSchema.UNITY)])
        assert print_proof(proof) == '(rule substitution ((var x1 One) star) (axiom unity))'
