"""Sequents, basic axioms, inference rules and the proof checker.

Contexts are finite sets of formulas, kept as canonically sorted tuples with
duplicates removed up to alpha-equality. Every comparison between sequents is
alpha-equality.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple as Tup, Union

from services.errors import (
    ArityError, KernelError, NotFreeFor, ShapeMismatch, SideConditionViolated, TypeMismatch,
)
from services.language import (
    ONE, STRICT, App, Compr, Eq, Mem, Product, Signature, Term, Var,
    alpha_sort_key, free_vars_of, is_free_for, proj, substitute, tup,
)

logger = logging.getLogger(__name__)


class CheckMode(Enum):
    KERNEL = "kernel"
    EXTENDED = "extended"


# ---------------------------------------------------------------------------
# Sequents and theories
# ---------------------------------------------------------------------------

def _canonical_context(formulas: Iterable[Term]) -> Tup[Term, ...]:
    seen = {}
    for f in formulas:
        if not f.is_formula():
            raise TypeMismatch(f"context members must be formulas, got a term of type {f.type}")
        seen.setdefault(f.alpha_key, f)
    return tuple(sorted(seen.values(), key=alpha_sort_key))


@dataclass(frozen=True, eq=False)
class Sequent:
    context: Tup[Term, ...]
    conclusion: Term

    def __post_init__(self):
        object.__setattr__(self, 'context', _canonical_context(self.context))
        if not self.conclusion.is_formula():
            raise TypeMismatch(f"conclusion must be a formula, got a term of type {self.conclusion.type}")

    @property
    def key(self):
        return frozenset(f.alpha_key for f in self.context), self.conclusion.alpha_key

    def __eq__(self, other):
        return isinstance(other, Sequent) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def free_vars(self):
        return free_vars_of(self.context + (self.conclusion,))

    @property
    def context_free_vars(self):
        return free_vars_of(self.context)

    @property
    def names(self):
        names = set(self.conclusion.names)
        for f in self.context:
            names |= f.names
        return frozenset(names)

    def context_keys(self):
        return frozenset(f.alpha_key for f in self.context)

    def has_hypothesis(self, f: Term) -> bool:
        return f.alpha_key in self.context_keys()

    def __str__(self):
        from services.sexpr import print_sequent
        return print_sequent(self)


def context_union(gamma: Iterable[Term], *extra: Term) -> Tup[Term, ...]:
    return _canonical_context(list(gamma) + list(extra))


def same_context(a: Iterable[Term], b: Iterable[Term]) -> bool:
    return frozenset(f.alpha_key for f in a) == frozenset(f.alpha_key for f in b)


def context_minus(gamma: Iterable[Term], f: Term) -> Tup[Term, ...]:
    return tuple(g for g in gamma if g.alpha_key != f.alpha_key)


@dataclass(frozen=True, eq=False)
class Theory:
    signature: Signature
    axioms: Mapping[str, Sequent] = field(default_factory=dict)

    @classmethod
    def of(cls, signature: Signature, axioms: Sequence[Sequent]) -> 'Theory':
        return cls(signature, {f"ax{i}": s for i, s in enumerate(axioms)})

    def __post_init__(self):
        for name, s in self.axioms.items():
            for f in s.context + (s.conclusion,):
                check_signature(self.signature, f)


def check_signature(sig: Signature, t: Term) -> None:
    """Every symbol and ground type in t is declared in sig with the right type."""
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            sig.check_type(node.type)
        elif isinstance(node, App):
            sym = sig.symbol(node.symbol)
            if sym.arg_type != node.arg.type or sym.result_type != node.type:
                raise TypeMismatch(f"{node.symbol} used at the wrong type", symbol=node.symbol)
        elif isinstance(node, Compr):
            sig.check_type(node.var.type)
        stack.extend(node.children())


# ---------------------------------------------------------------------------
# Basic axioms
# ---------------------------------------------------------------------------

class AxiomSchema(Enum):
    TAUTOLOGY = "tautology"
    UNITY = "unity"
    EQUALITY = "equality"
    PRODUCT_PROJ = "product-proj"
    PRODUCT_ETA = "product-eta"
    COMPREHENSION = "comprehension"


DEFAULT_UNIT_VAR = Var('x1', ONE)


def _formula_param(p, what: str) -> Term:
    if not isinstance(p, Term) or not p.is_formula():
        raise TypeMismatch(f"{what} must be a formula")
    return p


def _var_param(p, what: str) -> Var:
    if not isinstance(p, Var):
        raise TypeMismatch(f"{what} must be a variable")
    return p


def _int_param(p, what: str) -> int:
    if not isinstance(p, int) or isinstance(p, bool):
        raise ArityError(f"{what} must be an integer")
    return p



def basic_axiom(schema: AxiomSchema, params: Sequence[object] = ()) -> Sequent:
    params = tuple(params)
    if schema == AxiomSchema.TAUTOLOGY:
        if len(params) != 1:
            raise ArityError("tautology takes one formula")
        a = _formula_param(params[0], 'tautology parameter')
        return Sequent((a,), a)

    if schema == AxiomSchema.UNITY:
        x = _var_param(params[0], 'unity parameter') if params else DEFAULT_UNIT_VAR
        if x.type != ONE:
            raise TypeMismatch("unity needs a variable of type One")
        return Sequent((), Eq(x, tup()))

    if schema == AxiomSchema.EQUALITY:
        if len(params) != 4:
            raise ArityError("equality takes x, y, z and a formula")
        x, y, z = (_var_param(p, 'equality variable') for p in params[:3])
        a = _formula_param(params[3], 'equality formula')
        if not (x.type == y.type == z.type):
            raise TypeMismatch("equality variables must share a type")
        for v in (x, y):
            if not is_free_for(v, z, a):
                raise SideConditionViolated(f"{v.name} is not free for {z.name} in the formula",
                                            proviso='equality: x, y free for z in the formula')
        return Sequent((Eq(x, y), substitute(a, z, x, STRICT)), substitute(a, z, y, STRICT))

    if schema == AxiomSchema.PRODUCT_PROJ:
        if len(params) < 2:
            raise ArityError("product-proj takes an index and at least one variable")
        index = _int_param(params[0], 'product-proj index')
        xs = [_var_param(p, 'product variable') for p in params[1:]]
        if len(set(xs)) != len(xs):
            raise SideConditionViolated("product variables must be distinct", proviso='product: distinct variables')
        if not 1 <= index <= len(xs):
            raise ArityError(f"index {index} out of range for {len(xs)} variables")
        return Sequent((), Eq(proj(index, tup(*xs), arity=len(xs)), xs[index - 1]))

    if schema == AxiomSchema.PRODUCT_ETA:
        if len(params) != 2:
            raise ArityError("product-eta takes an arity and a variable")
        n, x = _int_param(params[0], 'product-eta arity'), _var_param(params[1], 'product-eta variable')
        if n == 1:
            return Sequent((), Eq(x, x))
        if n == 0 and x.type != ONE:
            raise TypeMismatch("a 0-fold product is One")
        if n >= 2 and not (isinstance(x.type, Product) and len(x.type.items) == n):
            raise TypeMismatch(f"{x.name} is not of a {n}-fold product type")
        return Sequent((), Eq(x, tup(*(proj(i, x, arity=n) for i in range(1, n + 1)))))

    if schema == AxiomSchema.COMPREHENSION:
        if len(params) != 2:
            raise ArityError("comprehension takes a variable and a formula")
        x = _var_param(params[0], 'comprehension variable')
        a = _formula_param(params[1], 'comprehension formula')
        return Sequent((), Eq(Mem(x, Compr(x, a)), a))

    raise ShapeMismatch(f"unknown axiom schema: {schema}")


# ---------------------------------------------------------------------------
# Inference rules
# ---------------------------------------------------------------------------

class Rule(Enum):
    THINNING = "thinning"
    CUT = "cut"
    SUBSTITUTION = "substitution"
    EXTENSIONALITY = "extensionality"
    EQUIVALENCE = "equivalence"


_PREMISE_COUNT = {Rule.THINNING: 1, Rule.CUT: 2, Rule.SUBSTITUTION: 1, Rule.EXTENSIONALITY: 1,
                  Rule.EQUIVALENCE: 2}

CUT_PROVISO = 'cut: free variables of the cut formula must be free in the context or the conclusion'
SUBSTITUTION_PROVISO = 'substitution: the term must be free for the variable in the context and conclusion'
EXTENSIONALITY_PROVISO = 'extensionality: the variable must not be free in the context or either set'


def apply_rule(rule: Rule, premises: Sequence[Sequent], params: Sequence[object] = ()) -> Sequent:
    params = tuple(params)
    if len(premises) != _PREMISE_COUNT[rule]:
        raise ShapeMismatch(f"{rule.value} takes {_PREMISE_COUNT[rule]} premise(s), got {len(premises)}")

    if rule == Rule.THINNING:
        if len(params) != 1:
            raise ArityError("thinning takes one formula")
        b = _formula_param(params[0], 'thinning formula')
        p = premises[0]
        return Sequent(p.context + (b,), p.conclusion)

    if rule == Rule.CUT:
        first, second = premises
        cut_formula = first.conclusion
        if not same_context(second.context, context_union(first.context, cut_formula)):
            raise ShapeMismatch("cut: the second premise must have the first premise's context plus its conclusion")
        loose = cut_formula.free_vars - first.context_free_vars - second.conclusion.free_vars
        if loose:
            names = ', '.join(sorted(v.name for v in loose))
            raise SideConditionViolated(f"cut formula has free variable(s) {names} not free in context or conclusion",
                                        proviso=CUT_PROVISO)
        return Sequent(first.context, second.conclusion)

    if rule == Rule.SUBSTITUTION:
        if len(params) != 2:
            raise ArityError("substitution takes a variable and a term")
        x, t = _var_param(params[0], 'substituted variable'), params[1]
        if not isinstance(t, Term) or t.type != x.type:
            raise TypeMismatch(f"substitution of a term of the wrong type for {x.name}")
        p = premises[0]
        try:
            context = [substitute(f, x, t, STRICT) for f in p.context]
            conclusion = substitute(p.conclusion, x, t, STRICT)
        except NotFreeFor as e:
            raise SideConditionViolated(e.message, proviso=SUBSTITUTION_PROVISO)
        return Sequent(tuple(context), conclusion)

    if rule == Rule.EXTENSIONALITY:
        p = premises[0]
        c = p.conclusion
        if not (isinstance(c, Eq) and isinstance(c.left, Mem) and isinstance(c.right, Mem)
                and isinstance(c.left.elem, Var) and c.left.elem == c.right.elem):
            raise ShapeMismatch("extensionality needs a premise of the form x in s <=> x in t")
        x = c.left.elem
        if params and _var_param(params[0], 'extensionality variable') != x:
            raise ShapeMismatch(f"extensionality variable {params[0].name} does not match the premise")
        sigma, tau = c.left.set, c.right.set
        if x in p.context_free_vars or x in sigma.free_vars or x in tau.free_vars:
            raise SideConditionViolated(f"{x.name} is free in the context or one of the sets",
                                        proviso=EXTENSIONALITY_PROVISO)
        return Sequent(p.context, Eq(sigma, tau))

    if rule == Rule.EQUIVALENCE:
        first, second = premises
        a, b = second.conclusion, first.conclusion
        candidates = []
        if params:
            candidates.append(tuple(_formula_param(f, 'equivalence context') for f in params))
        else:
            # smallest shared context; any valid one contains both remainders
            candidates.append(context_union(context_minus(first.context, a), *context_minus(second.context, b)))
        for gamma in candidates:
            if (same_context(first.context, context_union(gamma, a))
                    and same_context(second.context, context_union(gamma, b))):
                return Sequent(gamma, Eq(a, b))
        raise ShapeMismatch("equivalence needs premises a, G : b and b, G : a over a shared context G")

    raise ShapeMismatch(f"unknown rule: {rule}")


# ---------------------------------------------------------------------------
# Proof trees
# ---------------------------------------------------------------------------

class ProofNode:
    """Base of the proof tree nodes; ``sequent`` is the label, filled in by the builders."""

    sequent: Optional[Sequent] = None

    @property
    def children(self) -> List['ProofNode']:
        return []

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


@dataclass(eq=False)
class AxiomLeaf(ProofNode):
    schema: AxiomSchema
    params: Tup[object, ...] = ()
    sequent: Optional[Sequent] = None


@dataclass(eq=False)
class HypothesisLeaf(ProofNode):
    tag: str
    sequent: Optional[Sequent] = None


@dataclass(eq=False)
class RuleNode(ProofNode):
    rule: Rule
    params: Tup[object, ...] = ()
    premises: List[ProofNode] = field(default_factory=list)
    sequent: Optional[Sequent] = None

    @property
    def children(self):
        return self.premises


@dataclass(eq=False)
class DerivedNode(ProofNode):
    tactic: str
    params: Tup[object, ...] = ()
    premises: List[ProofNode] = field(default_factory=list)
    sequent: Optional[Sequent] = None

    @property
    def children(self):
        return self.premises


@dataclass(eq=False)
class AssumedLeaf(ProofNode):
    """Stand-in for an already checked premise while a derived node is re-validated."""
    sequent: Optional[Sequent] = None


ProofTree = ProofNode


def mk_axiom(schema: AxiomSchema, *params) -> AxiomLeaf:
    return AxiomLeaf(schema, tuple(params), sequent=basic_axiom(schema, params))


def mk_rule(rule: Rule, params: Sequence[object], *premises: ProofNode) -> RuleNode:
    conclusion = apply_rule(rule, [p.sequent for p in premises], params)
    return RuleNode(rule, tuple(params), list(premises), sequent=conclusion)


def mk_hypothesis(theory: Theory, tag: str) -> HypothesisLeaf:
    if tag not in theory.axioms:
        raise ShapeMismatch(f"theory has no axiom named {tag}")
    return HypothesisLeaf(tag, sequent=theory.axioms[tag])


# ---------------------------------------------------------------------------
# Checker
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Accepted:
    sequent: Sequent

    @property
    def ok(self) -> bool:
        return True

    def to_dict(self) -> dict:
        from services.sexpr import print_sequent
        return {'verdict': 'accepted', 'sequent': print_sequent(self.sequent)}


@dataclass(frozen=True)
class Rejected:
    path: Tup[int, ...]
    reason: str
    error: str = 'shape_mismatch'
    proviso: Optional[str] = None

    @property
    def ok(self) -> bool:
        return False

    def to_dict(self) -> dict:
        data = {'verdict': 'rejected', 'path': list(self.path), 'reason': self.reason, 'error': self.error}
        if self.proviso:
            data['proviso'] = self.proviso
        return data


Verdict = Union[Accepted, Rejected]


class _Rejection(Exception):
    def __init__(self, verdict: Rejected):
        super().__init__(verdict.reason)
        self.verdict = verdict


def _reject(path, error: KernelError) -> _Rejection:
    return _Rejection(Rejected(tuple(path), error.message, error.code, getattr(error, 'proviso', None)))


def _terms_in(params) -> List[Term]:
    found = []
    for p in params:
        if isinstance(p, Term):
            found.append(p)
        elif isinstance(p, (list, tuple)):
            found.extend(_terms_in(p))
    return found


def check_proof(theory: Theory, proof: ProofNode, mode: CheckMode = CheckMode.KERNEL) -> Verdict:
    """Re-validate every node; rejection is a verdict naming the node path and reason."""
    try:
        sequent = _check(theory, proof, mode, [])
    except _Rejection as r:
        logger.debug(f"Proof rejected at {list(r.verdict.path)}: {r.verdict.reason}")
        return r.verdict
    return Accepted(sequent)


def _check(theory: Theory, node: ProofNode, mode: CheckMode, path: List[int]) -> Sequent:
    try:
        params = getattr(node, 'params', ())
        for t in _terms_in(params):
            check_signature(theory.signature, t)
        if node.sequent is not None:
            for f in node.sequent.context + (node.sequent.conclusion,):
                check_signature(theory.signature, f)
    except KernelError as e:
        raise _reject(path, e)

    children = [_check(theory, c, mode, path + [i]) for i, c in enumerate(node.children)]

    try:
        if isinstance(node, AxiomLeaf):
            concluded = basic_axiom(node.schema, node.params)
        elif isinstance(node, HypothesisLeaf):
            if node.tag not in theory.axioms:
                raise ShapeMismatch(f"theory has no axiom named {node.tag}")
            concluded = theory.axioms[node.tag]
        elif isinstance(node, RuleNode):
            concluded = apply_rule(node.rule, children, node.params)
        elif isinstance(node, DerivedNode):
            if mode != CheckMode.EXTENDED:
                raise ShapeMismatch(f"derived node {node.tactic} is not allowed in kernel mode")
            from services.tactics import derive
            concluded = derive(node.tactic, node.params, children, theory.signature)
        else:
            raise ShapeMismatch(f"{type(node).__name__} cannot appear in a checked proof")
    except KernelError as e:
        raise _reject(path, e)

    if node.sequent is not None and node.sequent != concluded:
        raise _Rejection(Rejected(tuple(path), "node label does not match the sequent it concludes",
                                  'shape_mismatch'))
    return concluded
