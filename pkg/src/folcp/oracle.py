"""Brute-force model checking over enumerable algebras and the three-valued
decision interface used by consistency filtering and the law checks.

The exact decider enumerates assignments exhaustively, so queries are
budgeted: oversized domains or too many free variables raise BudgetError
instead of silently truncating.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .algebra import Algebra, EvaluationError
from .syntax import (
    And,
    Atom,
    Bot,
    Eq,
    Exists,
    Formula,
    Lit,
    Not,
    Or,
    Term,
    Top,
    Value,
    Var,
    Variable,
    App,
    FolcpError,
    conjuncts,
    free_vars,
    term_vars,
)
from .state import (
    ErrorState,
    Pair,
    State,
    apply_subst_formula,
    state_formula,
)


class BudgetError(FolcpError):
    """An oracle query exceeds the enumeration budget."""


class Verdict(Enum):
    TRUE = "definitely-true"
    FALSE = "definitely-false"
    UNKNOWN = "unknown"

    def is_true(self) -> bool:
        return self is Verdict.TRUE

    def is_false(self) -> bool:
        return self is Verdict.FALSE

    def is_unknown(self) -> bool:
        return self is Verdict.UNKNOWN

    @staticmethod
    def from_bool(b: bool) -> "Verdict":
        return Verdict.TRUE if b else Verdict.FALSE


@dataclass(frozen=True)
class OracleBudget:
    """Limits on exhaustive enumeration per query."""

    max_domain: int = 4
    max_free_vars: int = 5

    def check(self, domain_size: int, n_vars: int) -> None:
        if domain_size > self.max_domain:
            raise BudgetError(
                f"domain of size {domain_size} exceeds the budget of {self.max_domain}"
            )
        if n_vars > self.max_free_vars:
            raise BudgetError(
                f"{n_vars} free variables exceed the budget of {self.max_free_vars}"
            )


DEFAULT_BUDGET = OracleBudget()

# integer-slice checks are heuristic and use a wider enumeration window
SLICE_BUDGET = OracleBudget(max_domain=16, max_free_vars=3)


Assignment = dict  # Var -> Value


def eval_term(alg: Algebra, t: Term, asg: Assignment) -> Value:
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Variable):
        if t.var not in asg:
            raise FolcpError(f"assignment does not cover variable {t.var}")
        return asg[t.var]
    if isinstance(t, App):
        return alg.eval_fun(t.fun, [eval_term(alg, a, asg) for a in t.args])
    raise TypeError(f"not a term: {t!r}")


def eval_formula(alg: Algebra, phi: Formula, asg: Assignment) -> bool:
    """Tarskian truth value; quantifiers enumerate the domain.

    Evaluation errors from partial operations propagate to the caller as a
    distinguished failure, never as a truth value.
    """
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Bot):
        return False
    if isinstance(phi, Atom):
        return alg.eval_pred(phi.pred, [eval_term(alg, t, asg) for t in phi.args])
    if isinstance(phi, Eq):
        return eval_term(alg, phi.lhs, asg) == eval_term(alg, phi.rhs, asg)
    if isinstance(phi, Not):
        return not eval_formula(alg, phi.body, asg)
    if isinstance(phi, And):
        return eval_formula(alg, phi.lhs, asg) and eval_formula(alg, phi.rhs, asg)
    if isinstance(phi, Or):
        return eval_formula(alg, phi.lhs, asg) or eval_formula(alg, phi.rhs, asg)
    if isinstance(phi, Exists):
        inner = dict(asg)
        for val in alg.enumerate_domain():
            inner[phi.var] = val
            if eval_formula(alg, phi.body, inner):
                return True
        return False
    raise TypeError(f"not a formula: {phi!r}")


def _assignments(alg: Algebra, variables: list[Var], budget: OracleBudget):
    domain = alg.enumerate_domain()
    budget.check(len(domain), len(variables))
    for combo in itertools.product(domain, repeat=len(variables)):
        yield dict(zip(variables, combo))


def satisfiable(alg: Algebra, phi: Formula, budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """True iff some assignment over the free variables satisfies phi."""
    fv = sorted(free_vars(phi), key=lambda v: v.name)
    for asg in _assignments(alg, fv, budget):
        if eval_formula(alg, phi, asg):
            return True
    return False


def entails(alg: Algebra, psi: Formula, phi: Formula,
            budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """True iff every assignment satisfying psi satisfies phi."""
    fv = sorted(free_vars(psi) | free_vars(phi), key=lambda v: v.name)
    for asg in _assignments(alg, fv, budget):
        if eval_formula(alg, psi, asg) and not eval_formula(alg, phi, asg):
            return False
    return True


def equivalent_formulas(alg: Algebra, phi: Formula, psi: Formula,
                        budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """Mutual entailment, checked in one enumeration pass."""
    fv = sorted(free_vars(phi) | free_vars(psi), key=lambda v: v.name)
    for asg in _assignments(alg, fv, budget):
        if eval_formula(alg, phi, asg) != eval_formula(alg, psi, asg):
            return False
    return True


# ---------------------------------------------------------------------------
# Deciders
# ---------------------------------------------------------------------------

class Decider:
    """Three-valued consistency / equivalence / entailment answers.

    Definite answers must agree with the semantic facts; unknown is always
    allowed (and is all an inexact decider can say about non-ground states).
    """

    name = "decider"

    def is_consistent(self, s: State) -> Verdict:
        raise NotImplementedError

    def are_equivalent(self, s: State, t: State) -> Verdict:
        raise NotImplementedError

    def entails(self, psi: Formula, phi: Formula) -> Verdict:
        raise NotImplementedError


class FiniteDecider(Decider):
    """Exact decider over an enumerable algebra; never answers unknown."""

    name = "finite"

    def __init__(self, alg: Algebra, budget: OracleBudget = DEFAULT_BUDGET):
        if not alg.domain_enumerable:
            raise FolcpError("the exact decider needs an enumerable domain")
        self.alg = alg
        self.budget = budget

    def is_consistent(self, s: State) -> Verdict:
        if isinstance(s, ErrorState):
            return Verdict.UNKNOWN
        return Verdict.from_bool(satisfiable(self.alg, state_formula(s), self.budget))

    def are_equivalent(self, s: State, t: State) -> Verdict:
        if isinstance(s, ErrorState) or isinstance(t, ErrorState):
            return Verdict.from_bool(s == t)
        return Verdict.from_bool(
            equivalent_formulas(self.alg, state_formula(s), state_formula(t), self.budget)
        )

    def entails(self, psi: Formula, phi: Formula) -> Verdict:
        return Verdict.from_bool(entails(self.alg, psi, phi, self.budget))


class SyntacticDecider(Decider):
    """Sound incomplete decider for algebras whose theory is undecidable.

    Consistency looks only at the bottom constant and at ground atoms after
    substitution; equivalence is structural equality; entailment is conjunct
    containment. Everything else is unknown.
    """

    name = "syntactic"

    def __init__(self, alg: Algebra | None = None):
        self.alg = alg

    def is_consistent(self, s: State) -> Verdict:
        if isinstance(s, ErrorState):
            return Verdict.UNKNOWN
        residue = []
        for f in s.csp:
            if isinstance(f, Bot):
                return Verdict.FALSE
            if self.alg is not None:
                try:
                    f = apply_subst_formula(s.subst, f, self.alg)
                except (EvaluationError, FolcpError):
                    return Verdict.UNKNOWN
            truth = self._ground_truth(f)
            if truth is False:
                return Verdict.FALSE
            if truth is True:
                continue
            residue.append(f)
        if not residue:
            # theta-hat is trivially satisfiable only for triangular bindings
            dom = set(s.subst.domain())
            for _, t in s.subst.bindings:
                if term_vars(t) & dom:
                    return Verdict.UNKNOWN
            return Verdict.TRUE
        return Verdict.UNKNOWN

    def _ground_truth(self, f: Formula) -> bool | None:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Eq):
            if isinstance(f.lhs, Lit) and isinstance(f.rhs, Lit):
                return f.lhs.value == f.rhs.value
            return None
        if isinstance(f, Atom) and self.alg is not None:
            if all(isinstance(t, Lit) for t in f.args):
                try:
                    return self.alg.eval_pred(f.pred, [t.value for t in f.args])
                except FolcpError:
                    return None
            return None
        return None

    def are_equivalent(self, s: State, t: State) -> Verdict:
        if s == t:
            return Verdict.TRUE
        return Verdict.UNKNOWN

    def entails(self, psi: Formula, phi: Formula) -> Verdict:
        if isinstance(phi, Top):
            return Verdict.TRUE
        if phi in conjuncts(psi):
            return Verdict.TRUE
        return Verdict.UNKNOWN


def finite_decider(alg: Algebra, budget: OracleBudget = DEFAULT_BUDGET) -> FiniteDecider:
    return FiniteDecider(alg, budget)


def syntactic_decider(alg: Algebra | None = None) -> SyntacticDecider:
    return SyntacticDecider(alg)


def decider_for(alg: Algebra) -> Decider:
    """Exact decider when the domain is enumerable, syntactic otherwise."""
    if alg.domain_enumerable:
        return FiniteDecider(alg)
    return SyntacticDecider(alg)
