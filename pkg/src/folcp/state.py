"""States: substitutions with partial evaluation, constraint stores, and
the operations that turn them into formulas or quantify local variables.

A state is either the unanalyzable error state or a pair of a constraint
store and a substitution (the computed answer). State sets are ordered and
duplicate-free; the order encodes search preference and never carries
set-level meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import Algebra
from .syntax import (
    And,
    App,
    Atom,
    Bot,
    Eq,
    Exists,
    Formula,
    Lit,
    Not,
    Or,
    SubstitutionError,
    Term,
    Top,
    Var,
    Variable,
    all_vars,
    conj,
    disj,
    print_formula,
    print_term,
    rename_formula,
    rename_term,
    term_vars,
    var_key,
)


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Substitution:
    """Finite map from variables to terms, stored in canonical order.

    Identity bindings are dropped, so x is in the domain exactly when it is
    bound to something other than itself. Bound terms are expected to be in
    partial-evaluation normal form; `apply_subst` produces such terms.
    """

    bindings: tuple[tuple[Var, Term], ...] = ()

    @staticmethod
    def of(mapping) -> "Substitution":
        items = mapping.items() if hasattr(mapping, "items") else mapping
        kept = {}
        for v, t in items:
            if isinstance(t, Variable) and t.var == v:
                continue
            kept[v] = t
        ordered = tuple(sorted(kept.items(), key=lambda it: var_key(it[0])))
        return Substitution(ordered)

    def domain(self) -> list[Var]:
        return [v for v, _ in self.bindings]

    def get(self, v: Var) -> Term | None:
        for w, t in self.bindings:
            if w == v:
                return t
        return None

    def as_dict(self) -> dict[Var, Term]:
        return dict(self.bindings)

    def is_empty(self) -> bool:
        return not self.bindings

    def without(self, u: Var) -> "Substitution":
        return Substitution(tuple((v, t) for v, t in self.bindings if v != u))

    def __str__(self) -> str:
        inner = ", ".join(f"{v} -> {print_term(t)}" for v, t in self.bindings)
        return "{" + inner + "}"


EMPTY_SUBST = Substitution()


def apply_subst(theta: Substitution, t: Term, alg: Algebra) -> Term:
    """Apply a substitution and fold every ground application.

    Variables are replaced non-recursively (bindings are already normal);
    then each App whose arguments are all literals is evaluated bottom-up.
    EvaluationError propagates for partial operations.
    """
    if isinstance(t, Variable):
        bound = theta.get(t.var)
        return bound if bound is not None else t
    if isinstance(t, Lit):
        return t
    if isinstance(t, App):
        args = tuple(apply_subst(theta, a, alg) for a in t.args)
        if all(isinstance(a, Lit) for a in args):
            return Lit(alg.eval_fun(t.fun, [a.value for a in args]))
        return App(t.fun, args)
    raise TypeError(f"not a term: {t!r}")


def normalize_term(t: Term, alg: Algebra) -> Term:
    return apply_subst(EMPTY_SUBST, t, alg)


def apply_subst_formula(theta: Substitution, phi: Formula, alg: Algebra) -> Formula:
    """Map apply_subst over every term position of a formula.

    Binders must be outside the substitution's domain and range (always true
    for fresh binders); violations raise SubstitutionError.
    """
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(apply_subst(theta, t, alg) for t in phi.args))
    if isinstance(phi, Eq):
        return Eq(apply_subst(theta, phi.lhs, alg), apply_subst(theta, phi.rhs, alg))
    if isinstance(phi, (Bot, Top)):
        return phi
    if isinstance(phi, Not):
        return Not(apply_subst_formula(theta, phi.body, alg))
    if isinstance(phi, And):
        return And(apply_subst_formula(theta, phi.lhs, alg),
                   apply_subst_formula(theta, phi.rhs, alg))
    if isinstance(phi, Or):
        return Or(apply_subst_formula(theta, phi.lhs, alg),
                  apply_subst_formula(theta, phi.rhs, alg))
    if isinstance(phi, Exists):
        x = phi.var
        if theta.get(x) is not None:
            raise SubstitutionError(f"binder {x} is in the substitution's domain")
        for v, t in theta.bindings:
            if x in term_vars(t):
                raise SubstitutionError(
                    f"binder {x} occurs in the binding of {v}; capture"
                )
        return Exists(x, apply_subst_formula(theta, phi.body, alg))
    raise TypeError(f"not a formula: {phi!r}")


def theta_hat(theta: Substitution) -> Formula:
    """Conjunction of x = xθ over the domain, in canonical variable order."""
    return conj(Eq(Variable(v), t) for v, t in theta.bindings)


# ---------------------------------------------------------------------------
# Constraint stores and states
# ---------------------------------------------------------------------------

def _formula_key(phi: Formula) -> str:
    return repr(phi)


@dataclass(frozen=True)
class CSP:
    """Finite set of formulas, canonically ordered for deterministic printing."""

    constraints: tuple[Formula, ...] = ()

    @staticmethod
    def of(formulas) -> "CSP":
        seen = []
        for f in formulas:
            if f not in seen:
                seen.append(f)
        return CSP(tuple(sorted(seen, key=_formula_key)))

    def __contains__(self, phi: Formula) -> bool:
        return phi in self.constraints

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def add(self, phi: Formula) -> "CSP":
        return CSP.of(self.constraints + (phi,))

    def remove(self, phis) -> "CSP":
        drop = list(phis)
        return CSP.of(f for f in self.constraints if f not in drop)

    def __str__(self) -> str:
        return "{" + ", ".join(print_formula(f) for f in self.constraints) + "}"


EMPTY_CSP = CSP()


@dataclass(frozen=True)
class State:
    pass


@dataclass(frozen=True)
class ErrorState(State):
    def __str__(self) -> str:
        return "<error>"


@dataclass(frozen=True)
class Pair(State):
    csp: CSP
    subst: Substitution

    def __str__(self) -> str:
        return f"<{self.csp} ; {self.subst}>"


ERROR = ErrorState()


def pair(constraints=(), subst=None) -> Pair:
    return Pair(CSP.of(constraints), subst if subst is not None else EMPTY_SUBST)


def print_state(s: State) -> str:
    return str(s)


@dataclass(frozen=True)
class StateSet:
    """Ordered, duplicate-free sequence of states."""

    states: tuple[State, ...] = ()

    @staticmethod
    def of(states) -> "StateSet":
        seen: list[State] = []
        for s in states:
            if s not in seen:
                seen.append(s)
        return StateSet(tuple(seen))

    def __iter__(self):
        return iter(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, s: State) -> bool:
        return s in self.states

    def pairs(self) -> list[Pair]:
        return [s for s in self.states if isinstance(s, Pair)]

    def has_error(self) -> bool:
        return any(isinstance(s, ErrorState) for s in self.states)

    def union(self, other: "StateSet") -> "StateSet":
        return StateSet.of(self.states + tuple(other))

    def same_elements(self, other: "StateSet") -> bool:
        return frozenset(self.states) == frozenset(other.states)

    def __str__(self) -> str:
        return "[" + ", ".join(str(s) for s in self.states) + "]"


EMPTY_SET = StateSet()


def singleton(s: State) -> StateSet:
    return StateSet((s,))


# ---------------------------------------------------------------------------
# States as formulas
# ---------------------------------------------------------------------------

def state_formula(s: Pair) -> Formula:
    """The logical content of a pair state: (/\\ C) /\\ theta-hat."""
    if isinstance(s, ErrorState):
        raise ValueError("the error state has no formula")
    th = theta_hat(s.subst)
    if not s.csp.constraints:
        return th
    return And(conj(s.csp.constraints), th)


def big_vee(S: StateSet) -> Formula:
    """Disjunction of the pair states' formulas; empty disjunction is Bot.

    Error members carry no formula and are excluded.
    """
    return disj(state_formula(s) for s in S.pairs())


# ---------------------------------------------------------------------------
# Dropping local variables
# ---------------------------------------------------------------------------

def drop_binding(u: Var, theta: Substitution) -> Substitution:
    """Remove u from the substitution's domain; other bindings stay verbatim,
    even if their terms mention u."""
    return theta.without(u)


def csp_part(u: Var, csp: CSP) -> CSP:
    """The constraints in which u really occurs (any occurrence, bound or free)."""
    mentioned = []
    for f in csp:
        if u in all_vars(f):
            mentioned.append(f)
    return CSP.of(mentioned)


def drop_u(u: Var, s: State) -> State:
    """Remove u from the answer, existentially quantifying its occurrences
    in the store.

    When the store does not mention u the substitution entry is simply
    dropped. Otherwise the u-part of the store is wrapped as
    exists u (u = u:theta /\\ y_i = y_i:theta /\\ store-part), where the y_i
    are exactly the variables whose bindings mention u; when u is unbound the
    leading conjunct is the literal tautology u = u.
    """
    if isinstance(s, ErrorState):
        return ERROR
    part = csp_part(u, s.csp)
    if len(part) == 0:
        return Pair(s.csp, drop_binding(u, s.subst))
    u_term = s.subst.get(u)
    if u_term is None:
        u_term = Variable(u)
    ys = [(v, t) for v, t in s.subst.bindings if v != u and u in term_vars(t)]
    body = conj(
        [Eq(Variable(u), u_term)]
        + [Eq(Variable(y), t) for y, t in ys]
        + list(part.constraints)
    )
    rest = [f for f in s.csp if f not in part.constraints]
    new_csp = CSP.of(rest + [Exists(u, body)])
    return Pair(new_csp, drop_binding(u, s.subst))


# ---------------------------------------------------------------------------
# Consistency filtering
# ---------------------------------------------------------------------------

def cons_plus(S: StateSet, decider) -> StateSet:
    """Keep the error state and every pair that is not definitely
    inconsistent (unknown is kept)."""
    kept = []
    for s in S:
        if isinstance(s, ErrorState):
            kept.append(s)
            continue
        verdict = decider.is_consistent(s)
        if not verdict.is_false():
            kept.append(s)
    return StateSet.of(kept)


def cons(S: StateSet, decider) -> StateSet:
    """cons_plus with the error state removed."""
    return StateSet.of(s for s in cons_plus(S, decider) if not isinstance(s, ErrorState))


# ---------------------------------------------------------------------------
# Renaming across whole states
# ---------------------------------------------------------------------------

def rename_state(s: State, u: Var, v: Var) -> State:
    """Systematic replacement of u by v in store and substitution alike."""
    if isinstance(s, ErrorState):
        return s
    new_csp = CSP.of(rename_formula(f, u, v) for f in s.csp)
    new_bindings = []
    for w, t in s.subst.bindings:
        new_bindings.append((v if w == u else w, rename_term(t, u, v)))
    return Pair(new_csp, Substitution.of(new_bindings))


def rename_state_set(S: StateSet, u: Var, v: Var) -> StateSet:
    return StateSet.of(rename_state(s, u, v) for s in S)


def rename_everywhere(obj, u: Var, v: Var):
    """Rename u to v in a Formula, Term, State, or StateSet."""
    if isinstance(obj, StateSet):
        return rename_state_set(obj, u, v)
    if isinstance(obj, State):
        return rename_state(obj, u, v)
    if isinstance(obj, Formula):
        return rename_formula(obj, u, v)
    if isinstance(obj, Term):
        return rename_term(obj, u, v)
    raise TypeError(f"cannot rename inside {obj!r}")
