"""Derived rules, expanded into primitive proof trees.

Every function here builds ``ProofNode`` trees out of the basic axioms and the
five primitive rules only, so whatever it returns is re-checkable by
``check_proof`` in kernel mode. The small equational lemmas at the top
(reflexivity, symmetry, congruence, ...) are the building blocks of the named
tactics further down.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence

from services.deduction import (
    DEFAULT_UNIT_VAR, AssumedLeaf, AxiomSchema, CheckMode, DerivedNode, ProofNode, Rule, Sequent,
    context_minus, context_union, mk_axiom, mk_rule, same_context,
)
from services.errors import ArityError, NoClosedTerm, ShapeMismatch, SideConditionViolated, TypeMismatch
from services.language import (
    OMEGA, STAR, STRICT, Compr, Eq, Mem, Power, Proj, Signature, Term, Tuple, Var,
    alpha_eq, closed_term, first_unused, free_vars_of, is_free_for, names_of, product,
    rename_bound_apart, substitute, var_sort_key,
)
from services.sugar import TRUE, _match_and, _match_forall, _match_implies, and_, exists, forall, implies

logger = logging.getLogger(__name__)


def _concl(node: ProofNode) -> Term:
    return node.sequent.conclusion


def _ctx(node: ProofNode):
    return node.sequent.context


def _names(*things) -> set:
    names = set()
    for t in things:
        if isinstance(t, ProofNode):
            names |= t.sequent.names
        elif isinstance(t, Sequent):
            names |= t.names
        elif isinstance(t, Term):
            names |= t.names
        elif isinstance(t, (list, tuple)):
            names |= _names(*t)
    return names


# ---------------------------------------------------------------------------
# Structural helpers
# ---------------------------------------------------------------------------

def thin(node: ProofNode, *formulas: Term) -> ProofNode:
    for f in formulas:
        if not node.sequent.has_hypothesis(f):
            node = mk_rule(Rule.THINNING, (f,), node)
    return node


def thin_to(node: ProofNode, context: Sequence[Term]) -> ProofNode:
    return thin(node, *context)


def cut(first: ProofNode, second: ProofNode) -> ProofNode:
    return mk_rule(Rule.CUT, (), first, second)


def subst(node: ProofNode, x: Var, t: Term) -> ProofNode:
    return mk_rule(Rule.SUBSTITUTION, (x, t), node)


def tautology(a: Term, context: Sequence[Term] = ()) -> ProofNode:
    return thin_to(mk_axiom(AxiomSchema.TAUTOLOGY, a), context)


def _align(*nodes: ProofNode) -> List[ProofNode]:
    """Thin every node up to the union of their contexts."""
    union = context_union(f for n in nodes for f in _ctx(n))
    return [thin_to(n, union) for n in nodes]


# ---------------------------------------------------------------------------
# Equational lemmas
# ---------------------------------------------------------------------------

def truth(context: Sequence[Term] = ()) -> ProofNode:
    """Gamma : true, from Unity at x1 and Substitution x1/*."""
    return thin_to(subst(mk_axiom(AxiomSchema.UNITY), DEFAULT_UNIT_VAR, STAR), context)


def refl(t: Term, context: Sequence[Term] = ()) -> ProofNode:
    """Gamma : t = t, from the one-factor product axiom."""
    x = first_unused('x', t.type, t.names)
    return thin_to(subst(mk_axiom(AxiomSchema.PRODUCT_ETA, 1, x), x, t), context)


def rewrite(eq_node: ProofNode, phi_node: ProofNode, z: Var, phi: Term) -> ProofNode:
    """From Gamma : s = t and Gamma : phi(z/s) conclude Gamma : phi(z/t)."""
    e = _concl(eq_node)
    if not isinstance(e, Eq):
        raise ShapeMismatch("rewriting needs an equation")
    if not same_context(_ctx(eq_node), _ctx(phi_node)):
        eq_node, phi_node = _align(eq_node, phi_node)
    gamma = _ctx(eq_node)
    s, t = e.left, e.right
    phi = rename_bound_apart(phi, s.names | t.names)
    avoid = phi.names | s.names | t.names | {z.name} | names_of(gamma)
    u = first_unused('u', z.type, avoid)
    v = first_unused('v', z.type, avoid | {u.name})
    law = subst(subst(mk_axiom(AxiomSchema.EQUALITY, u, v, z, phi), u, s), v, t)
    step = cut(thin(phi_node, e), thin_to(law, gamma))
    return cut(eq_node, step)


def sym(node: ProofNode) -> ProofNode:
    e = _concl(node)
    if not isinstance(e, Eq):
        raise ShapeMismatch("symmetry needs an equation")
    z = first_unused('z', e.left.type, _names(node))
    return rewrite(node, refl(e.left, _ctx(node)), z, Eq(z, e.left))


def trans(first: ProofNode, second: ProofNode) -> ProofNode:
    a, b = _concl(first), _concl(second)
    if not (isinstance(a, Eq) and isinstance(b, Eq) and alpha_eq(a.right, b.left)):
        raise ShapeMismatch("transitivity needs a = b and b = c")
    z = first_unused('z', a.left.type, _names(first, second))
    return rewrite(second, first, z, Eq(a.left, z))


def cong(node: ProofNode, z: Var, body: Term) -> ProofNode:
    """From Gamma : s = t conclude Gamma : body(z/s) = body(z/t)."""
    e = _concl(node)
    if not isinstance(e, Eq):
        raise ShapeMismatch("congruence needs an equation")
    at_left = substitute(body, z, e.left)
    return rewrite(node, refl(at_left, _ctx(node)), z, Eq(at_left, body))


def eq_mp(eq_node: ProofNode, node: ProofNode) -> ProofNode:
    """From Gamma : a <=> b and Gamma : a conclude Gamma : b."""
    z = first_unused('z', OMEGA, _names(eq_node, node))
    return rewrite(eq_node, node, z, z)


def to_true(node: ProofNode) -> ProofNode:
    a, gamma = _concl(node), _ctx(node)
    return mk_rule(Rule.EQUIVALENCE, gamma, truth(context_union(gamma, a)), thin(node, TRUE))


def from_true(node: ProofNode) -> ProofNode:
    return eq_mp(sym(node), truth(_ctx(node)))


def and_intro(first: ProofNode, second: ProofNode) -> ProofNode:
    first, second = _align(first, second)
    a, b = _concl(first), _concl(second)
    z = first_unused('z', OMEGA, _names(first, second))
    left = cong(to_true(first), z, Tuple((z, b)))
    right = cong(to_true(second), z, Tuple((TRUE, z)))
    return trans(left, right)


def and_elim(node: ProofNode, index: int) -> ProofNode:
    """From Gamma : a1 and a2 conclude Gamma : a_index."""
    parts = _match_and(_concl(node))
    if parts is None:
        raise ShapeMismatch("and-elimination needs a conjunction")
    if index not in (1, 2):
        raise ArityError("a conjunction has two sides")
    a, b = parts
    gamma = _ctx(node)
    avoid = _names(node)
    p = first_unused('p', OMEGA, avoid)
    q = first_unused('q', OMEGA, avoid | {p.name})
    law = mk_axiom(AxiomSchema.PRODUCT_PROJ, index, p, q)
    picked = thin_to(subst(subst(law, p, a), q, b), gamma)
    at_true = thin_to(subst(subst(law, p, TRUE), q, TRUE), gamma)
    z = first_unused('z', product(OMEGA, OMEGA), avoid)
    moved = cong(node, z, Proj(index, z))
    return from_true(trans(trans(sym(picked), moved), at_true))


def imp_intro(node: ProofNode, a: Term, gamma: Sequence[Term]) -> ProofNode:
    """From a, Gamma : b conclude Gamma : a => b."""
    b = _concl(node)
    conj = and_(a, b)
    to_a = and_elim(tautology(conj, gamma), 1)
    to_conj = and_intro(tautology(a, gamma), node)
    return mk_rule(Rule.EQUIVALENCE, tuple(gamma), to_a, to_conj)


def imp_elim(node: ProofNode) -> ProofNode:
    """From Gamma : a => b conclude a, Gamma : b."""
    parts = _match_implies(_concl(node))
    if parts is None:
        raise ShapeMismatch("implication-elimination needs an implication")
    a, _ = parts
    widened = thin(node, a)
    conj = eq_mp(sym(widened), tautology(a, _ctx(widened)))
    return and_elim(conj, 2)


def modus_ponens(imp_node: ProofNode, a_node: ProofNode) -> ProofNode:
    imp_node, a_node = _align(imp_node, a_node)
    return cut(a_node, imp_elim(imp_node))


# ---------------------------------------------------------------------------
# Quantifier lemmas
# ---------------------------------------------------------------------------

def _point_comprehension(x: Var, body: Term, point: Term, gamma) -> ProofNode:
    law = mk_axiom(AxiomSchema.COMPREHENSION, x, body)
    if point != x:
        law = subst(law, x, point)
    return thin_to(law, gamma)


def _members_agree(node: ProofNode, point: Term) -> ProofNode:
    """From Gamma : {x:a} = {x:b} conclude Gamma : a(x/point) <=> b(x/point)."""
    e = _concl(node)
    x, a, b = e.left.var, e.left.body, e.right.body
    gamma = _ctx(node)
    z = first_unused('z', Power(x.type), _names(node) | point.names)
    moved = cong(node, z, Mem(point, z))
    left = _point_comprehension(x, a, point, gamma)
    right = _point_comprehension(x, b, point, gamma)
    return trans(trans(sym(left), moved), right)


def _require_closed(sig: Optional[Signature], v: Var, proviso: str) -> Term:
    c = closed_term(sig or Signature.build(), v.type)
    if c is None:
        raise NoClosedTerm(f"no closed term of type {v.type} to instantiate {v.name}", variable=v.name,
                           proviso=proviso)
    return c


def forall_elim_from(node: ProofNode, sig: Optional[Signature] = None) -> ProofNode:
    """From Gamma : forall x. a conclude Gamma : a."""
    q = _match_forall(_concl(node))
    if q is None:
        raise ShapeMismatch("forall-elimination needs a universal formula")
    x, a = q
    if x in a.free_vars or x in node.sequent.context_free_vars:
        point = x
    else:
        point = _require_closed(sig, x, 'forall_elim: the variable must be free in the formula '
                                        'unless its type has a closed term')
    return from_true(_members_agree(node, point))


# ---------------------------------------------------------------------------
# Named tactics
# ---------------------------------------------------------------------------

def implication_left(first: ProofNode, second: ProofNode, b: Term) -> ProofNode:
    """Gamma : a and b, Gamma : c give a => b, Gamma : c."""
    a, gamma = _concl(first), _ctx(first)
    if not same_context(_ctx(second), context_union(gamma, b)):
        raise ShapeMismatch("second premise must have the first premise's context plus b")
    imp = implies(a, b)
    reached = modus_ponens(tautology(imp, gamma), thin(first, imp))
    return cut(reached, thin(second, imp))


def implication_elim(node: ProofNode) -> ProofNode:
    """Gamma : a => b gives a, Gamma : b."""
    return imp_elim(node)


def forall_intro(node: ProofNode, x: Var) -> ProofNode:
    """Gamma : a gives Gamma : forall x. a, provided x is not free in Gamma or x is not free in a."""
    a, gamma = _concl(node), _ctx(node)
    if x in node.sequent.context_free_vars and x in a.free_vars:
        raise SideConditionViolated(f"{x.name} is free in the context and in the formula",
                                    proviso='forall_intro: x must not be free in the context, '
                                            'or must not be free in a')
    w = first_unused(x.name, x.type, _names(node) | {x.name})
    at_w = subst(node, x, w) if x in a.free_vars else node
    member = trans(_point_comprehension(x, a, w, gamma), to_true(at_w))
    full = sym(_point_comprehension(x, TRUE, w, gamma))
    both = trans(member, full)
    return mk_rule(Rule.EXTENSIONALITY, (w,), both)


def comprehension_iff(node: ProofNode) -> ProofNode:
    """Gamma : {x:a} = {x:b} gives Gamma : a <=> b when x is free in a or b."""
    e = _concl(node)
    if not (isinstance(e, Eq) and isinstance(e.left, Compr) and isinstance(e.right, Compr)
            and e.left.var == e.right.var):
        raise ShapeMismatch("comprehension_iff needs {x:a} = {x:b} over the same variable")
    x = e.left.var
    if x not in (e.left.body.free_vars | e.right.body.free_vars | node.sequent.context_free_vars):
        raise SideConditionViolated(f"{x.name} is free in neither formula",
                                    proviso='comprehension_iff: the variable must be free in a or b')
    return _members_agree(node, x)


def forall_elim(x: Var, a: Term, sig: Optional[Signature] = None) -> ProofNode:
    """forall x. a : a."""
    return forall_elim_from(tautology(forall(x, a)), sig)


def exists_witness(node: ProofNode, x: Var, a: Term, witness: Term,
                   sig: Optional[Signature] = None) -> ProofNode:
    """Gamma : a(x/t) gives Gamma : exists x. a."""
    if witness.type != x.type:
        raise TypeMismatch(f"witness has type {witness.type}, expected {x.type}")
    if not is_free_for(witness, x, a):
        raise SideConditionViolated("witness is not free for the variable",
                                    proviso='exists_witness: the witness must be free for x in a')
    if not alpha_eq(_concl(node), substitute(a, x, witness, STRICT)):
        raise ShapeMismatch("premise is not the formula at the witness")
    gamma = _ctx(node)
    loose = witness.free_vars - node.sequent.context_free_vars - (a.free_vars - {x})
    if loose:
        raise SideConditionViolated("witness has variables free in neither the context nor the conclusion",
                                    proviso='exists_witness: variables of the witness must be free in the '
                                            'context or in exists x. a')
    w = first_unused('w', OMEGA, _names(node, a, witness) | {x.name})
    hyp = forall(x, implies(a, w))
    step = forall_elim_from(tautology(hyp), sig)
    if x in a.free_vars:
        step = subst(step, x, witness)
    reached = modus_ponens(thin_to(step, gamma), thin(node, hyp))
    return forall_intro(imp_intro(reached, hyp, gamma), w)


def exists_intro(x: Var, a: Term, sig: Optional[Signature] = None) -> ProofNode:
    """a : exists x. a."""
    if x in a.free_vars:
        witness = x
    else:
        witness = _require_closed(sig, x, 'exists_intro: the variable must be free in the formula '
                                          'unless its type has a closed term')
    return exists_witness(tautology(a), x, a, witness, sig)


def exists_left(node: ProofNode, x: Var, a: Term, sig: Optional[Signature] = None) -> ProofNode:
    """a, Gamma : b gives exists x. a, Gamma : b."""
    b = _concl(node)
    if not node.sequent.has_hypothesis(a):
        raise ShapeMismatch("premise context does not contain the quantified formula")
    gamma = context_minus(_ctx(node), a)
    if x not in free_vars_of(gamma) and x not in b.free_vars:
        bound = x
    elif x not in a.free_vars:
        bound = first_unused(x.name, x.type, _names(node) | {x.name})
    else:
        raise SideConditionViolated(f"{x.name} is free in the context or conclusion and in the formula",
                                    proviso='exists_left: x must not be free in the context and conclusion, '
                                            'or must not be free in a')
    w = first_unused('w', OMEGA, _names(node) | {x.name, bound.name})
    witness_form = forall(w, implies(forall(bound, implies(a, w)), w))
    lifted = forall_intro(imp_intro(node, a, gamma), bound)
    use = subst(forall_elim_from(tautology(witness_form), sig), w, b)
    return modus_ponens(thin_to(use, gamma), thin(lifted, witness_form))


def exists_conjunction(x: Var, a: Term, b: Term, sig: Optional[Signature] = None) -> ProofNode:
    """: (exists x. a and b) <=> (a and exists x. b) when x is free in b but not in a."""
    if x in a.free_vars or x not in b.free_vars:
        raise SideConditionViolated("x must be free in the second conjunct only",
                                    proviso='exists_conjunction: x free in b and not free in a')
    conj = and_(a, b)
    both = tautology(conj)
    some_b = exists_witness(and_elim(both, 2), x, b, x, sig)
    forward = exists_left(and_intro(and_elim(both, 1), some_b), x, conj, sig)

    right = and_(a, exists(x, b))
    held = tautology(right)
    with_b = and_intro(thin(and_elim(held, 1), b), tautology(b, [right]))
    witnessed = exists_witness(with_b, x, conj, x, sig)
    backward = cut(and_elim(held, 2), exists_left(witnessed, x, b, sig))
    return mk_rule(Rule.EQUIVALENCE, (), forward, backward)


def unrestricted_cut(first: ProofNode, second: ProofNode, sig: Optional[Signature] = None) -> ProofNode:
    """Cut without the free-variable proviso, closing loose variables with closed terms."""
    a, gamma, b = _concl(first), _ctx(first), _concl(second)
    if not same_context(_ctx(second), context_union(gamma, a)):
        raise ShapeMismatch("second premise must have the first premise's context plus its conclusion")
    loose = sorted(a.free_vars - free_vars_of(gamma) - b.free_vars, key=var_sort_key)
    for v in loose:
        c = _require_closed(sig, v, 'unrestricted_cut: a closed term is needed for each loose variable')
        first, second = subst(first, v, c), subst(second, v, c)
    return cut(first, second)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def _expect(name: str, params, premises, n_params, n_premises):
    if len(params) not in n_params or len(premises) not in n_premises:
        raise ArityError(f"{name} takes {'/'.join(map(str, n_params))} parameter(s) and "
                         f"{'/'.join(map(str, n_premises))} premise(s)")


def _t_implication_left(params, premises, sig):
    _expect('implication_left', params, premises, (1,), (2,))
    return implication_left(premises[0], premises[1], params[0])


def _t_implication_elim(params, premises, sig):
    _expect('implication_elim', params, premises, (0,), (1,))
    return implication_elim(premises[0])


def _t_forall_intro(params, premises, sig):
    _expect('forall_intro', params, premises, (1,), (1,))
    return forall_intro(premises[0], params[0])


def _t_comprehension_iff(params, premises, sig):
    _expect('comprehension_iff', params, premises, (0,), (1,))
    return comprehension_iff(premises[0])


def _t_forall_elim(params, premises, sig):
    _expect('forall_elim', params, premises, (0, 2), (0, 1))
    if premises:
        return forall_elim_from(premises[0], sig)
    if len(params) != 2:
        raise ArityError("forall_elim without a premise takes a variable and a formula")
    return forall_elim(params[0], params[1], sig)


def _t_exists_intro(params, premises, sig):
    _expect('exists_intro', params, premises, (2,), (0,))
    return exists_intro(params[0], params[1], sig)


def _t_exists_left(params, premises, sig):
    _expect('exists_left', params, premises, (2,), (1,))
    return exists_left(premises[0], params[0], params[1], sig)


def _t_exists_witness(params, premises, sig):
    _expect('exists_witness', params, premises, (3,), (1,))
    return exists_witness(premises[0], params[0], params[1], params[2], sig)


def _t_exists_conjunction(params, premises, sig):
    _expect('exists_conjunction', params, premises, (3,), (0,))
    return exists_conjunction(params[0], params[1], params[2], sig)


def _t_unrestricted_cut(params, premises, sig):
    _expect('unrestricted_cut', params, premises, (0,), (2,))
    return unrestricted_cut(premises[0], premises[1], sig)


TACTICS: Dict[str, Callable[[tuple, List[ProofNode], Optional[Signature]], ProofNode]] = {
    'implication_left': _t_implication_left,
    'implication_elim': _t_implication_elim,
    'forall_intro': _t_forall_intro,
    'comprehension_iff': _t_comprehension_iff,
    'forall_elim': _t_forall_elim,
    'exists_intro': _t_exists_intro,
    'exists_left': _t_exists_left,
    'exists_witness': _t_exists_witness,
    'exists_conjunction': _t_exists_conjunction,
    'unrestricted_cut': _t_unrestricted_cut,
}


def tactic(name: str, params: Sequence[object] = (), premises: Sequence[ProofNode] = (),
           sig: Optional[Signature] = None, mode: CheckMode = CheckMode.KERNEL) -> ProofNode:
    """Run a named tactic; kernel mode returns the primitive tree, extended mode a DerivedNode."""
    if name not in TACTICS:
        raise ShapeMismatch(f"unknown tactic: {name}")
    for p in premises:
        if p.sequent is None:
            raise ShapeMismatch(f"{name}: premises must be labelled with their sequents")
    tree = TACTICS[name](tuple(params), list(premises), sig)
    logger.debug(f"Tactic {name} expanded to {tree.size()} primitive nodes")
    if mode == CheckMode.KERNEL:
        return tree
    return DerivedNode(name, tuple(params), list(premises), sequent=tree.sequent)


def derive(name: str, params: Sequence[object], premises: Sequence[Sequent],
           sig: Optional[Signature] = None) -> Sequent:
    """Conclusion of a named tactic applied to already checked premises."""
    return tactic(name, params, [AssumedLeaf(sequent=s) for s in premises], sig).sequent
