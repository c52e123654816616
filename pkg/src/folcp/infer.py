"""The pluggable inference operator: state-set transformers modeling
constraint propagation and search.

Operators built with `lift_pointwise` are continuous by construction and
propagate the error state unchanged. Whether an operator satisfies the
sound-search laws (pointwise equivalence, alphabetic invariance,
inconsistency and error propagation) is certified by `lawcheck`, not
assumed here; `regroup_fixture` is a deliberate violator kept as a
negative test subject.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable

from .algebra import Algebra, EvaluationError
from .syntax import (
    App,
    Atom,
    Bot,
    Eq,
    Formula,
    IntValue,
    IN_PRED,
    Lit,
    Or,
    SubstitutionError,
    Term,
    TermValue,
    Top,
    Value,
    Var,
    Variable,
    FolcpError,
    conj,
    term_vars,
)
from .state import (
    CSP,
    ERROR,
    ErrorState,
    Pair,
    State,
    StateSet,
    Substitution,
    apply_subst,
    apply_subst_formula,
)


class PipelineError(FolcpError):
    """A pipeline spec string does not parse or names an unknown operator."""


class InferOp:
    """A named function from state sets to state sets.

    `pointwise_core` is present exactly when the operator was built by
    lift_pointwise; law checks use it to read off per-state descendants.
    """

    def __init__(self, name: str, apply_fn: Callable[[StateSet], StateSet],
                 pointwise_core: Callable[[State], tuple[State, ...]] | None = None,
                 fixture: bool = False):
        self.name = name
        self._apply = apply_fn
        self.pointwise_core = pointwise_core
        self.fixture = fixture

    def apply(self, S: StateSet) -> StateSet:
        return self._apply(S)

    def __repr__(self) -> str:
        return f"InferOp({self.name})"


def lift_pointwise(name: str, pw: Callable[[Pair], Iterable[State]]) -> InferOp:
    """Lift a per-state function to state sets.

    The error state maps to itself without consulting the core, so the
    error condition holds by construction; continuity holds because the
    set application is defined as the union of the per-state images.
    """

    def core(s: State) -> tuple[State, ...]:
        if isinstance(s, ErrorState):
            return (ERROR,)
        return tuple(pw(s))

    def apply_fn(S: StateSet) -> StateSet:
        out: list[State] = []
        for s in S:
            out.extend(core(s))
        return StateSet.of(out)

    return InferOp(name, apply_fn, pointwise_core=core)


def identity_infer() -> InferOp:
    return lift_pointwise("id", lambda s: (s,))


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _ground_atom_truth(f: Formula, alg: Algebra) -> bool | None:
    """Truth value of a fully evaluated ground atom, None when not ground."""
    if isinstance(f, Eq):
        if isinstance(f.lhs, Lit) and isinstance(f.rhs, Lit):
            return f.lhs.value == f.rhs.value
        return None
    if isinstance(f, Atom):
        if all(isinstance(t, Lit) for t in f.args):
            return alg.eval_pred(f.pred, [t.value for t in f.args])
        return None
    return None


def _solved_binding(f: Formula, bound: set[Var]) -> tuple[Var, Term] | None:
    if not isinstance(f, Eq):
        return None
    if isinstance(f.lhs, Variable) and isinstance(f.rhs, Lit) and f.lhs.var not in bound:
        return (f.lhs.var, f.rhs)
    if isinstance(f.rhs, Variable) and isinstance(f.lhs, Lit) and f.rhs.var not in bound:
        return (f.rhs.var, f.lhs)
    return None


def eval_normalize(alg: Algebra, decider=None) -> InferOp:
    """Apply the answer substitution to the store and evaluate what grounds.

    True ground atoms and the top constant are dropped; a false ground atom
    or the bottom constant collapses the state to the empty set; evaluation
    failures of partial operations turn the state into the error state.
    Equations solved to a literal (x = v) move into the substitution, which
    is what turns the paper-style split states into computed answers.
    """

    def pw(s: Pair) -> tuple[State, ...]:
        bindings = s.subst.as_dict()
        work = list(s.csp)
        try:
            while True:
                theta = Substitution.of(bindings)
                applied = [apply_subst_formula(theta, f, alg) for f in work]
                kept: list[Formula] = []
                new_binding = False
                for f in applied:
                    if isinstance(f, Bot):
                        return ()
                    if isinstance(f, Top):
                        continue
                    truth = _ground_atom_truth(f, alg)
                    if truth is True:
                        continue
                    if truth is False:
                        return ()
                    solved = _solved_binding(f, set(bindings))
                    if solved is not None and not new_binding:
                        bindings[solved[0]] = solved[1]
                        new_binding = True
                        continue
                    kept.append(f)
                work = kept
                if not new_binding:
                    break
        except (EvaluationError, SubstitutionError):
            return (ERROR,)
        return (Pair(CSP.of(work), Substitution.of(bindings)),)

    return lift_pointwise("normalize", pw)


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------

def _unfreeze(t: Term) -> Term:
    """Expose ground term values as plain syntax for unification."""
    if isinstance(t, Lit) and isinstance(t.value, TermValue):
        return t.value.term
    if isinstance(t, App):
        return App(t.fun, tuple(_unfreeze(a) for a in t.args))
    return t


class UnifyFailure(Exception):
    pass


def robinson_unify(equations: list[tuple[Term, Term]]) -> dict[Var, Term]:
    """Most general unifier of the equation set, with occurs check.

    Raises UnifyFailure on clash or occurs violation. Literal values of
    non-term algebras act as constants.
    """
    work = [(l, r) for l, r in equations]
    unifier: dict[Var, Term] = {}

    def substitute(t: Term, v: Var, replacement: Term) -> Term:
        if isinstance(t, Variable):
            return replacement if t.var == v else t
        if isinstance(t, App):
            return App(t.fun, tuple(substitute(a, v, replacement) for a in t.args))
        return t

    while work:
        lhs, rhs = work.pop()
        if lhs == rhs:
            continue
        if isinstance(lhs, App) and isinstance(rhs, App):
            if lhs.fun != rhs.fun or len(lhs.args) != len(rhs.args):
                raise UnifyFailure(f"clash: {lhs.fun}/{len(lhs.args)} vs {rhs.fun}/{len(rhs.args)}")
            work.extend(zip(lhs.args, rhs.args))
            continue
        if isinstance(lhs, Lit) and isinstance(rhs, Lit):
            raise UnifyFailure("clash: distinct values")
        if not isinstance(lhs, Variable):
            lhs, rhs = rhs, lhs
        if not isinstance(lhs, Variable):
            raise UnifyFailure("clash: value vs application")
        v = lhs.var
        if v in term_vars(rhs):
            raise UnifyFailure(f"occurs check: {v} in {rhs}")
        work = [(substitute(l, v, rhs), substitute(r, v, rhs)) for l, r in work]
        unifier = {w: substitute(t, v, rhs) for w, t in unifier.items()}
        unifier[v] = rhs
    return unifier


def unify_infer(alg: Algebra | None = None) -> InferOp:
    """Solve the store's equations by unification.

    The answer substitution is read as equations and solved together with
    the store's equations; on success the equations disappear and the
    composed most general unifier becomes the answer. Clash or occurs
    failure collapses the state to the empty set. Non-equation constraints
    pass through untouched.
    """

    def pw(s: Pair) -> tuple[State, ...]:
        eqs = [f for f in s.csp if isinstance(f, Eq)]
        rest = [f for f in s.csp if not isinstance(f, Eq)]
        problem = [(_unfreeze(f.lhs), _unfreeze(f.rhs)) for f in eqs]
        problem += [(Variable(v), _unfreeze(t)) for v, t in s.subst.bindings]
        try:
            mgu = robinson_unify(problem)
        except UnifyFailure:
            return ()
        if alg is not None:
            mgu = {v: apply_subst(Substitution(), t, alg) for v, t in mgu.items()}
        return (Pair(CSP.of(rest), Substitution.of(mgu)),)

    return lift_pointwise("unify", pw)


# ---------------------------------------------------------------------------
# Quadratic equations over the integers
# ---------------------------------------------------------------------------

def _square_of(t: Term) -> Var | None:
    if isinstance(t, App) and t.fun == "pow" and len(t.args) == 2:
        base, expo = t.args
        if isinstance(base, Variable) and expo == Lit(IntValue(2)):
            return base.var
    if isinstance(t, App) and t.fun == "*" and len(t.args) == 2:
        lhs, rhs = t.args
        if isinstance(lhs, Variable) and lhs == rhs:
            return lhs.var
    return None


def quadratic_infer() -> InferOp:
    """Solve x*x = k and pow(x, 2) = k for integer literals k.

    A positive perfect square becomes the disjunction x = root \\/ x = -root,
    zero becomes x = 0, and anything else collapses the state (no integer
    root exists). Splitting the disjunction is left to the case splitter.
    """

    def pw(s: Pair) -> tuple[State, ...]:
        out: list[Formula] = []
        for f in s.csp:
            x = None
            k = None
            if isinstance(f, Eq) and isinstance(f.rhs, Lit) and isinstance(f.rhs.value, IntValue):
                x = _square_of(f.lhs)
                k = f.rhs.value.n
            if x is None:
                out.append(f)
                continue
            if k == 0:
                out.append(Eq(Variable(x), Lit(IntValue(0))))
                continue
            if k < 0:
                return ()
            root = math.isqrt(k)
            if root * root != k:
                return ()
            out.append(Or(Eq(Variable(x), Lit(IntValue(root))),
                          Eq(Variable(x), Lit(IntValue(-root)))))
        return (Pair(CSP.of(out), s.subst),)

    return lift_pointwise("quadratic", pw)


# ---------------------------------------------------------------------------
# Case splitting
# ---------------------------------------------------------------------------

def case_split_infer() -> InferOp:
    """Split the first disjunctive constraint into two states, left first.

    One disjunction per application; compose with the fixpoint combinator
    to split exhaustively.
    """

    def pw(s: Pair) -> tuple[State, ...]:
        for f in s.csp:
            if isinstance(f, Or):
                others = [g for g in s.csp if g != f]
                left = Pair(CSP.of(others + [f.lhs]), s.subst)
                right = Pair(CSP.of(others + [f.rhs]), s.subst)
                return (left, right)
        return (s,)

    return lift_pointwise("split", pw)


# ---------------------------------------------------------------------------
# Ranked domain splitting
# ---------------------------------------------------------------------------

def domain_split_infer(ranking: Callable[[Value], Fraction | int | float],
                       threshold: Fraction | int | float) -> InferOp:
    """Split the first membership constraint into promising and remaining
    value sets, promising first.

    The promising part collects values scoring at least the threshold; when
    that makes one side empty, a complete tie still splits off the first
    half of the values, and anything else leaves the state unchanged.
    """

    def pw(s: Pair) -> tuple[State, ...]:
        for f in s.csp:
            if not (isinstance(f, Atom) and f.pred == IN_PRED and len(f.args) >= 3):
                continue
            if not all(isinstance(t, Lit) for t in f.args[1:]):
                continue
            head = f.args[0]
            values: list[Lit] = []
            for t in f.args[1:]:
                if t not in values:
                    values.append(t)
            if len(values) < 2:
                continue
            scores = [ranking(v.value) for v in values]
            good = [v for v, sc in zip(values, scores) if sc >= threshold]
            bad = [v for v, sc in zip(values, scores) if sc < threshold]
            if not good or not bad:
                if len(set(scores)) == 1:
                    half = math.ceil(len(values) / 2)
                    good, bad = values[:half], values[half:]
                else:
                    continue
            others = [g for g in s.csp if g != f]
            good_state = Pair(CSP.of(others + [Atom(IN_PRED, (head, *good))]), s.subst)
            bad_state = Pair(CSP.of(others + [Atom(IN_PRED, (head, *bad))]), s.subst)
            return (good_state, bad_state)
        return (s,)

    return lift_pointwise("domsplit", pw)


def value_ranking(alg: Algebra | None = None) -> Callable[[Value], Fraction]:
    """Score a value by its numeric payload, or by domain position."""

    def rank(v: Value) -> Fraction:
        if isinstance(v, IntValue):
            return Fraction(v.n)
        if alg is not None and hasattr(alg, "domain"):
            try:
                return Fraction(alg.domain.index(str(v)))
            except ValueError:
                pass
        return Fraction(0)

    return rank


RANKINGS: dict[str, Callable[[Algebra | None], Callable[[Value], Fraction]]] = {
    "value": value_ranking,
    "negvalue": lambda alg: (lambda v, _r=value_ranking(alg): -_r(v)),
}


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------

def compose_infer(i1: InferOp, i2: InferOp) -> InferOp:
    return InferOp(
        f"{i1.name};{i2.name}",
        lambda S: i2.apply(i1.apply(S)),
        fixture=i1.fixture or i2.fixture,
    )


class FixpointInfer(InferOp):
    """Apply an operator until the state set stops changing.

    `last_converged` reports whether the most recent application reached a
    fixpoint within the round budget.
    """

    def __init__(self, inner: InferOp, max_rounds: int):
        if max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        self.inner = inner
        self.max_rounds = max_rounds
        self.last_converged: bool | None = None
        super().__init__(f"fix({inner.name},{max_rounds})", self._run,
                         fixture=inner.fixture)

    def _run(self, S: StateSet) -> StateSet:
        current = S
        for _ in range(self.max_rounds):
            nxt = self.inner.apply(current)
            if nxt == current:
                self.last_converged = True
                return current
            current = nxt
        self.last_converged = False
        return current


def fixpoint_infer(inner: InferOp, max_rounds: int) -> FixpointInfer:
    return FixpointInfer(inner, max_rounds)


# ---------------------------------------------------------------------------
# The regrouping fixture (deliberate law violator)
# ---------------------------------------------------------------------------

def regroup_fixture() -> InferOp:
    """Merge pair states sharing an answer into one disjunctive state.

    This set-level regrouping preserves the whole set's logical content
    (set equivalence) while individual states stop accounting for their
    own descendants (pointwise equivalence fails); singleton inputs have
    nothing to merge, so continuity fails too. Kept as a negative fixture;
    never certified for search.
    """

    def apply_fn(S: StateSet) -> StateSet:
        groups: dict[Substitution, list[Pair]] = {}
        for s in S:
            if isinstance(s, Pair):
                groups.setdefault(s.subst, []).append(s)
        merged_emitted: set[int] = set()
        out: list[State] = []
        for s in S:
            if isinstance(s, ErrorState):
                out.append(s)
                continue
            group = groups[s.subst]
            if len(group) < 2:
                out.append(s)
                continue
            if id(group) in merged_emitted:
                continue
            merged_emitted.add(id(group))
            parts = [conj(g.csp.constraints) for g in group]
            merged = parts[0]
            for p in parts[1:]:
                merged = Or(merged, p)
            out.append(Pair(CSP.of([merged]), s.subst))
        return StateSet.of(out)

    return InferOp("regroup-fixture", apply_fn, fixture=True)


# ---------------------------------------------------------------------------
# Pipeline spec strings
# ---------------------------------------------------------------------------

def _split_top_level(text: str, sep: str) -> list[str]:
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise PipelineError(f"unbalanced parentheses in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if depth != 0:
        raise PipelineError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(current))
    return parts


def build_pipeline(text: str, alg: Algebra, decider=None) -> InferOp:
    """Build an operator from a pipeline spec string.

    Grammar: op (';' op)* with op one of id, normalize, unify, quadratic,
    split, regroup-fixture, domsplit(rank=<name>,thr=<q>), fix(<op>,<n>).
    """
    ops = [_build_op(part.strip(), alg, decider) for part in _split_top_level(text, ";")]
    if not ops or any(o is None for o in ops):
        raise PipelineError(f"empty pipeline in {text!r}")
    op = ops[0]
    for nxt in ops[1:]:
        op = compose_infer(op, nxt)
    return op


def _build_op(spec: str, alg: Algebra, decider) -> InferOp:
    if not spec:
        raise PipelineError("empty operator name")
    if spec == "id":
        return identity_infer()
    if spec == "normalize":
        return eval_normalize(alg, decider)
    if spec == "unify":
        return unify_infer(alg)
    if spec == "quadratic":
        return quadratic_infer()
    if spec == "split":
        return case_split_infer()
    if spec == "regroup-fixture":
        return regroup_fixture()
    if spec.startswith("domsplit(") and spec.endswith(")"):
        args = _split_top_level(spec[len("domsplit("):-1], ",")
        rank_name = None
        threshold = None
        for a in args:
            key, _, val = a.strip().partition("=")
            if key == "rank":
                rank_name = val.strip()
            elif key == "thr":
                try:
                    threshold = Fraction(val.strip())
                except (ValueError, ZeroDivisionError):
                    raise PipelineError(f"bad threshold {val!r}") from None
            else:
                raise PipelineError(f"unknown domsplit argument {key!r}")
        if rank_name not in RANKINGS or threshold is None:
            raise PipelineError(f"domsplit needs rank=<name> and thr=<q>, got {spec!r}")
        return domain_split_infer(RANKINGS[rank_name](alg), threshold)
    if spec.startswith("fix(") and spec.endswith(")"):
        args = _split_top_level(spec[len("fix("):-1], ",")
        if len(args) < 2:
            raise PipelineError("fix needs an operator and a round bound")
        rounds_text = args[-1].strip()
        try:
            rounds = int(rounds_text)
        except ValueError:
            raise PipelineError(f"bad round bound {rounds_text!r}") from None
        inner = build_pipeline(",".join(args[:-1]), alg, decider)
        return fixpoint_infer(inner, rounds)
    raise PipelineError(f"unknown operator {spec!r}")
