"""The denotational evaluator over state sets.

Formulas act on states: an atom joins the store and triggers inference,
disjunction is nondeterministic choice, conjunction is sequential
composition, negation resolves by consistency of the subresult, and the
existential quantifier substitutes a fresh variable and drops it again
afterwards. Error admits no recovery. The whole evaluator is parameterized
by algebra, inference operator, decider, and fresh supply.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import Algebra
from .infer import InferOp
from .oracle import Decider, Verdict
from .state import (
    CSP,
    ERROR,
    ErrorState,
    Pair,
    State,
    StateSet,
    Substitution,
    cons,
    cons_plus,
    drop_u,
    singleton,
)
from .syntax import (
    And,
    Atom,
    Bot,
    Eq,
    Exists,
    Formula,
    FreshSupply,
    Not,
    Or,
    Top,
    subst_var,
)


@dataclass
class EvalLimits:
    max_depth: int = 200
    max_states: int = 2000

    def __post_init__(self):
        if self.max_depth < 1 or self.max_states < 1:
            raise ValueError("limits must be positive")


@dataclass
class EvalStats:
    infer_calls: int = 0
    splits: int = 0
    oracle_calls: int = 0


@dataclass
class EvalConfig:
    algebra: Algebra
    infer: InferOp
    decider: Decider
    fresh: FreshSupply = field(default_factory=FreshSupply)
    limits: EvalLimits = field(default_factory=EvalLimits)


@dataclass
class EvalOutcome:
    result: StateSet
    stats: EvalStats
    truncated: bool

    def __str__(self) -> str:
        flag = " (truncated)" if self.truncated else ""
        return f"{self.result}{flag}"


class _CountingDecider(Decider):
    def __init__(self, inner: Decider, stats: EvalStats):
        self.inner = inner
        self.stats = stats

    def is_consistent(self, s) -> Verdict:
        self.stats.oracle_calls += 1
        return self.inner.is_consistent(s)

    def are_equivalent(self, s, t) -> Verdict:
        self.stats.oracle_calls += 1
        return self.inner.are_equivalent(s, t)

    def entails(self, psi, phi) -> Verdict:
        self.stats.oracle_calls += 1
        return self.inner.entails(psi, phi)


class _Evaluator:
    def __init__(self, cfg: EvalConfig):
        self.cfg = cfg
        self.stats = EvalStats()
        self.decider = _CountingDecider(cfg.decider, self.stats)
        self.truncated = False

    def _infer(self, S: StateSet) -> StateSet:
        self.stats.infer_calls += 1
        out = self.cfg.infer.apply(S)
        if getattr(self.cfg.infer, "last_converged", None) is False:
            self.truncated = True
        return self._cap(out)

    def _cap(self, S: StateSet) -> StateSet:
        if len(S) > self.cfg.limits.max_states:
            self.truncated = True
            return StateSet(S.states[: self.cfg.limits.max_states])
        return S

    def eval_set(self, S: StateSet, phi: Formula, depth: int) -> StateSet:
        out: list[State] = []
        for s in S:
            out.extend(self.eval_state(s, phi, depth))
        return self._cap(StateSet.of(out))

    def eval_state(self, s: State, phi: Formula, depth: int) -> StateSet:
        if depth > self.cfg.limits.max_depth:
            self.truncated = True
            return StateSet()
        if isinstance(s, ErrorState):
            return singleton(ERROR)
        assert isinstance(s, Pair)

        if isinstance(phi, (Atom, Eq, Bot, Top)):
            return self._infer(singleton(Pair(s.csp.add(phi), s.subst)))

        if isinstance(phi, Or):
            self.stats.splits += 1
            left = self.eval_state(s, phi.lhs, depth + 1)
            right = self.eval_state(s, phi.rhs, depth + 1)
            return self._cap(left.union(right))

        if isinstance(phi, And):
            first = self.eval_state(s, phi.lhs, depth + 1)
            return self.eval_set(first, phi.rhs, depth + 1)

        if isinstance(phi, Not):
            sub = self.eval_state(s, phi.body, depth + 1)
            kept_plus = cons_plus(sub, self.decider)
            if len(kept_plus) == 0:
                return self._infer(singleton(s))
            for member in cons(sub, self.decider):
                if self.decider.are_equivalent(member, s).is_true():
                    return StateSet()
            return self._infer(singleton(Pair(s.csp.add(phi), s.subst)))

        if isinstance(phi, Exists):
            u = self.cfg.fresh.draw()
            body = subst_var(phi.body, phi.var, u)
            sub = cons_plus(self.eval_state(s, body, depth + 1), self.decider)
            out: list[State] = []
            for sigma in sub:
                out.extend(self._infer(singleton(drop_u(u, sigma))))
            return self._cap(StateSet.of(out))

        raise TypeError(f"not a formula: {phi!r}")


def sem_eval(cfg: EvalConfig, S: StateSet, phi: Formula) -> EvalOutcome:
    """Evaluate a formula over every state of the set; ordered dedup union."""
    ev = _Evaluator(cfg)
    result = ev.eval_set(S, phi, depth=1)
    return EvalOutcome(result, ev.stats, ev.truncated)


def sem_eval_state(cfg: EvalConfig, s: State, phi: Formula) -> StateSet:
    """Evaluate a formula in a single state."""
    return sem_eval(cfg, singleton(s), phi).result


@dataclass
class Answers:
    """Computed answers: substitution plus residual store, in search order."""

    answers: list[tuple[Substitution, CSP]]
    error: bool

    def __len__(self) -> int:
        return len(self.answers)


def answers(outcome: EvalOutcome, decider: Decider) -> Answers:
    """Extract consistent answers; the error state is excluded but flagged."""
    kept = cons_plus(outcome.result, decider)
    out = [(s.subst, s.csp) for s in kept.pairs()]
    return Answers(out, outcome.result.has_error())
