import pytest

from services.deduction import (
    CUT_PROVISO, DEFAULT_UNIT_VAR, EXTENSIONALITY_PROVISO, SUBSTITUTION_PROVISO, Accepted, AxiomLeaf,
    AxiomSchema, CheckMode, DerivedNode, HypothesisLeaf, Rejected, Rule, RuleNode, Sequent, Theory,
    apply_rule, basic_axiom, check_proof,
)
from services.errors import KernelError, TypeMismatch
from services.finset_model import valid
from services.generators import TermGenerator, random_interpretation, random_signature
from services.language import (
    OMEGA, STAR, App, Compr, Eq, Ground, Mem, Power, Signature, Tuple, Var, product,
)
from services.sugar import TRUE, and_, forall, iff, implies, intersection, not_, or_, union

A, B = Ground('A'), Ground('B')

TRUTH = RuleNode(Rule.SUBSTITUTION, (DEFAULT_UNIT_VAR, STAR), [AxiomLeaf(AxiomSchema.UNITY)])


def _random_world(rng, max_size=3):
    sig = random_signature(rng, max_grounds=2, max_symbols=2)
    interp = random_interpretation(rng, sig, max_size=max_size, min_size=1)
    grounds = [Ground(g) for g in sig.ground_types]
    return sig, interp, grounds


class TestSequents:
    def test_contexts_are_sets_up_to_alpha(self, xa):
        z = Var('z', A)
        a = Eq(Compr(xa, Eq(xa, xa)), Compr(xa, TRUE))
        b = Eq(Compr(z, Eq(z, z)), Compr(z, TRUE))
        assert Sequent((a, b), TRUE) == Sequent((a,), TRUE)
        assert len(Sequent((a, b), TRUE).context) == 1

    def test_conclusion_must_be_a_formula(self, xa):
        with pytest.raises(TypeMismatch):
            Sequent((), xa)


class TestChecker:
    def test_truth_from_unity_and_substitution(self):
        verdict = check_proof(Theory(Signature()), TRUTH)
        assert isinstance(verdict, Accepted)
        assert verdict.sequent == Sequent((), TRUE)
        assert verdict.to_dict()['sequent'] == '(seq (ctx) true)'

    def test_hypothesis_leaf(self, sig, xa):
        theory = Theory(sig, {'p-holds': Sequent((), App('p', xa, OMEGA))})
        verdict = check_proof(theory, HypothesisLeaf('p-holds'))
        assert verdict.ok
        assert check_proof(theory, HypothesisLeaf('missing')).ok is False

    def test_rejection_reports_the_node_path(self, xa):
        bad = AxiomLeaf(AxiomSchema.PRODUCT_PROJ, (3, xa, Var('y', A)))
        proof = RuleNode(Rule.THINNING, (TRUE,), [bad])
        verdict = check_proof(Theory(Signature.build(['A'])), proof)
        assert isinstance(verdict, Rejected)
        assert verdict.path == (0,)
        assert verdict.error == 'arity_error'

    def test_wrong_label_rejected(self):
        leaf = AxiomLeaf(AxiomSchema.UNITY, (), sequent=Sequent((), not_(TRUE)))
        verdict = check_proof(Theory(Signature()), leaf)
        assert not verdict.ok
        assert 'label' in verdict.reason

    def test_symbols_outside_the_signature_rejected(self, xa):
        proof = AxiomLeaf(AxiomSchema.TAUTOLOGY, (App('p', xa, OMEGA),))
        verdict = check_proof(Theory(Signature.build(['A'])), proof)
        assert verdict.error == 'unknown_symbol'

    def test_derived_nodes_need_extended_mode(self, sig, xa):
        body = App('p', xa, OMEGA)
        premise = AxiomLeaf(AxiomSchema.TAUTOLOGY, (implies(body, body),))
        node = DerivedNode('implication_elim', (), [premise])
        assert not check_proof(Theory(sig), node).ok
        verdict = check_proof(Theory(sig), node, CheckMode.EXTENDED)
        assert verdict.ok
        assert verdict.sequent == Sequent((implies(body, body), body), body)


class TestAxioms:
    def test_schema_shapes(self, xa):
        y, z = Var('y', A), Var('z', A)
        assert basic_axiom(AxiomSchema.UNITY) == Sequent((), Eq(DEFAULT_UNIT_VAR, STAR))
        pair = basic_axiom(AxiomSchema.PRODUCT_PROJ, (2, xa, y)).conclusion
        assert pair.right == y
        w = Var('w', product(A, A))
        eta = basic_axiom(AxiomSchema.PRODUCT_ETA, (2, w)).conclusion
        assert isinstance(eta.right, Tuple)
        assert basic_axiom(AxiomSchema.PRODUCT_ETA, (0, DEFAULT_UNIT_VAR)).conclusion == \
            Eq(DEFAULT_UNIT_VAR, STAR)
        leibniz = basic_axiom(AxiomSchema.EQUALITY, (xa, y, z, Eq(z, z)))
        assert leibniz.conclusion == Eq(y, y)

    def test_axiom_soundness_sweep(self, rng):
        """Every instance of every schema is valid in random interpretations."""
        for _ in range(40):
            self._sweep(rng, instances=10)

    @pytest.mark.slow
    def test_axiom_soundness_full(self, rng):
        for _ in range(200):
            self._sweep(rng, instances=50)

    def _sweep(self, rng, instances):
        sig, interp, grounds = _random_world(rng)
        for _ in range(instances):
            t = rng.choice(grounds + [OMEGA])
            z = Var('z', t)
            gen = TermGenerator(rng, sig, [z], power_depth=2)
            a = gen.formula(rng.randint(0, 2))
            u, v = Var('u', t), Var('v', t)
            pair_type = rng.choice(grounds)
            xs = [Var('u', pair_type), Var('v', rng.choice(grounds)), Var('w', OMEGA)]
            instances_of = [
                (AxiomSchema.TAUTOLOGY, (a,)),
                (AxiomSchema.UNITY, ()),
                (AxiomSchema.EQUALITY, (u, v, z, a)),
                (AxiomSchema.PRODUCT_PROJ, (rng.randint(1, 3), *xs)),
                (AxiomSchema.PRODUCT_ETA, (2, Var('q', product(pair_type, OMEGA)))),
                (AxiomSchema.COMPREHENSION, (z, a)),
            ]
            for schema, params in instances_of:
                assert valid(interp, basic_axiom(schema, params)), (schema, params)


def _premise_valid_instances(rng, rule):
    """(premises, params) for rule whose premises hold in the interpretation."""
    sig, interp, grounds = _random_world(rng)
    t = rng.choice(grounds)
    x, z = Var('x', t), Var('z', rng.choice(grounds))
    gen = TermGenerator(rng, sig, [x, z], power_depth=1)
    a = gen.formula(rng.randint(0, 2))
    b = gen.formula(rng.randint(0, 2))
    gamma = [gen.formula(1)] if rng.random() < 0.5 else []
    tautology = rng.choice([or_(a, not_(a)), implies(a, a), iff(b, b)])
    if rule == Rule.THINNING:
        return interp, [Sequent(tuple(gamma), tautology)], (b,)
    if rule == Rule.SUBSTITUTION:
        return interp, [Sequent(tuple(gamma), tautology)], (x, gen.term(t, rng.randint(0, 2)))
    if rule == Rule.CUT:
        first = Sequent((and_(a, b),), a)
        second = Sequent((and_(a, b), a), b)
        return interp, [first, second], ()
    if rule == Rule.EXTENSIONALITY:
        s = gen.term(Power(t), 2)
        tau = rng.choice([intersection(s, s), union(s, s), Compr(Var('k', t), Mem(Var('k', t), s))])
        u = Var('u', t)
        if u in s.free_vars:
            return None
        context = tuple(g for g in gamma if u not in g.free_vars)
        return interp, [Sequent(context, iff(Mem(u, s), Mem(u, tau)))], (u,)
    same = rng.choice([and_(a, a), or_(a, a), not_(not_(a)), and_(a, TRUE)])
    return interp, [Sequent(tuple(gamma) + (a,), same), Sequent(tuple(gamma) + (same,), a)], ()


class TestRules:
    @pytest.mark.parametrize('rule', list(Rule))
    def test_rules_preserve_validity(self, rng, rule):
        instances = 0
        for _ in range(400):
            found = _premise_valid_instances(rng, rule)
            if found is None:
                continue
            interp, premises, params = found
            if not all(valid(interp, p) for p in premises):
                continue
            try:
                conclusion = apply_rule(rule, premises, params)
            except KernelError:
                continue
            assert valid(interp, conclusion), (rule, conclusion)
            instances += 1
            if instances >= 100:
                break
        assert instances >= 100

    def test_extensionality_conclusion(self, xa):
        s = Compr(Var('k', A), Eq(Var('k', A), Var('k', A)))
        u = Var('u', A)
        premise = Sequent((), iff(Mem(u, s), Mem(u, intersection(s, s))))
        assert apply_rule(Rule.EXTENSIONALITY, [premise]).conclusion == Eq(s, intersection(s, s))

    def test_equivalence_when_context_already_holds_both(self):
        p, q = Var('p', OMEGA), Var('q', OMEGA)
        first, second = Sequent((p, q), q), Sequent((q, p), p)
        assert apply_rule(Rule.EQUIVALENCE, [first, second]) == Sequent((p, q), Eq(p, q))

    def test_equivalence_picks_the_shared_context(self):
        p, q, r = Var('p', OMEGA), Var('q', OMEGA), Var('r', OMEGA)
        assert apply_rule(Rule.EQUIVALENCE, [Sequent((p, r), q), Sequent((q, r), p)]) == Sequent((r,), Eq(p, q))
        with pytest.raises(KernelError):
            apply_rule(Rule.EQUIVALENCE, [Sequent((p, r), q), Sequent((q,), p)])


def _violations():
    """Twenty proofs that each break exactly one proviso, with the proviso named."""
    cases = []
    for i in range(4):
        y = Var(f"y{i}", [A, B, OMEGA, Power(A)][i])
        thinned_truth = RuleNode(Rule.THINNING, (Eq(y, y),), [TRUTH])
        loose = AxiomLeaf(AxiomSchema.PRODUCT_ETA, (1, y))
        cases.append((RuleNode(Rule.CUT, (), [loose, thinned_truth]), CUT_PROVISO))
    for i in range(4):
        x, y = Var('x', A), Var(f"y{i}", A)
        inner = AxiomLeaf(AxiomSchema.COMPREHENSION, (x, Eq(x, y)))
        cases.append((RuleNode(Rule.SUBSTITUTION, (y, x), [inner]), SUBSTITUTION_PROVISO))
        held = AxiomLeaf(AxiomSchema.TAUTOLOGY, (forall(x, Eq(x, y)),))
        cases.append((RuleNode(Rule.SUBSTITUTION, (y, x), [held]), SUBSTITUTION_PROVISO))
    for i in range(4):
        u = Var(f"u{i}", A)
        s = Compr(Var('k', A), Eq(Var('k', A), u))
        held = AxiomLeaf(AxiomSchema.TAUTOLOGY, (iff(Mem(u, s), Mem(u, s)),))
        cases.append((RuleNode(Rule.EXTENSIONALITY, (u,), [held]), EXTENSIONALITY_PROVISO))
    for i in range(4):
        x, y, z = Var('x', A), Var(f"y{i}", A), Var('z', A)
        captured = Compr(y, Eq(y, z))
        cases.append((AxiomLeaf(AxiomSchema.EQUALITY, (x, y, z, Eq(captured, captured))),
                      'equality: x, y free for z in the formula'))
    return cases


class TestProvisos:
    def test_twenty_violations_each_named(self):
        cases = _violations()
        assert len(cases) == 20
        theory = Theory(Signature.build(['A', 'B']))
        for proof, proviso in cases:
            verdict = check_proof(theory, proof)
            assert isinstance(verdict, Rejected)
            assert verdict.error == 'side_condition_violated'
            assert verdict.proviso == proviso

    def test_distinct_product_variables(self, xa):
        leaf = AxiomLeaf(AxiomSchema.PRODUCT_PROJ, (1, xa, xa))
        verdict = check_proof(Theory(Signature.build(['A'])), leaf)
        assert verdict.proviso == 'product: distinct variables'
