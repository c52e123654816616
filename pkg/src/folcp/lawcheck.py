"""Randomized certification of inference operators and of the evaluator.

Ground truth throughout is the brute-force oracle on small finite algebras.
Each law runs seeded trials and produces a LawReport; reports are
reproducible bit-for-bit from the seed and generation parameters. Trials
that exhaust the oracle budget or produce truncated or error outcomes are
skipped and counted, never silently dropped.

The alphabetic-variation law is tested as rename-commutation (op then
rename equals rename then op), which implies the closure form for
deterministic operators; the closure form itself quantifies over an
infinite variable supply and cannot be tested directly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .algebra import Algebra, FiniteAlgebra, int_slice
from .infer import InferOp, build_pipeline, quadratic_infer
from .oracle import (
    BudgetError,
    Decider,
    OracleBudget,
    DEFAULT_BUDGET,
    SLICE_BUDGET,
    entails,
    equivalent_formulas,
    finite_decider,
    satisfiable,
)
from .semantics import EvalConfig, EvalLimits, sem_eval
from .state import (
    CSP,
    ERROR,
    Pair,
    State,
    StateSet,
    Substitution,
    big_vee,
    cons,
    cons_plus,
    drop_u,
    rename_state,
    rename_state_set,
    singleton,
    state_formula,
)
from .syntax import (
    And,
    App,
    Atom,
    Bot,
    BOT,
    Eq,
    Exists,
    Formula,
    FreshSupply,
    IN_PRED,
    IntValue,
    Lit,
    Not,
    Or,
    Term,
    TOP,
    Var,
    Variable,
    all_vars,
    fresh_var,
    print_formula,
    term_vars,
)


# ---------------------------------------------------------------------------
# Parameters and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenParams:
    max_formula_depth: int = 3
    max_arity: int = 2
    max_domain_size: int = 3
    max_csp_size: int = 3
    max_subst_size: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.max_domain_size > 4:
            raise ValueError("max_domain_size above 4 exceeds the oracle budget")
        for name in ("max_formula_depth", "max_arity", "max_domain_size",
                     "max_csp_size", "max_subst_size"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must not be negative")


@dataclass(frozen=True)
class GenProfile:
    """Operator-specific tweaks to state generation."""

    function_free: bool = False
    with_in_atoms: bool = False
    eq_bias: bool = False


PLAIN_PROFILE = GenProfile()


@dataclass
class Counterexample:
    input: str
    output: str
    diagnosis: str

    def to_record(self) -> dict:
        return {"input": self.input, "output": self.output, "diagnosis": self.diagnosis}


MAX_COUNTEREXAMPLES = 3


@dataclass
class LawReport:
    law: str
    trials: int = 0
    passes: int = 0
    skips: int = 0
    counterexamples: list[Counterexample] = field(default_factory=list)
    heuristic_only: bool = False
    notes: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return self.trials - self.passes - self.skips

    def ok(self) -> bool:
        return self.failures == 0

    def skip_rate(self) -> float:
        return self.skips / self.trials if self.trials else 0.0

    def note(self, key: str, n: int = 1) -> None:
        self.notes[key] = self.notes.get(key, 0) + n

    def to_record(self) -> dict:
        return {
            "law": self.law,
            "trials": self.trials,
            "passes": self.passes,
            "skips": self.skips,
            "failures": self.failures,
            "heuristic_only": self.heuristic_only,
            "notes": dict(sorted(self.notes.items())),
            "first_counterexample":
                self.counterexamples[0].to_record() if self.counterexamples else None,
        }

    def summary_line(self) -> str:
        status = "PASS" if self.ok() else "FAIL"
        heur = " [heuristic]" if self.heuristic_only else ""
        return (f"{status} {self.law}: {self.passes}/{self.trials} passed, "
                f"{self.skips} skipped, {self.failures} failed{heur}")


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------

USER_VARS = (Var("x"), Var("y"), Var("z"))
BINDER_VARS = (Var("q0"), Var("q1"))

_ELEMENT_NAMES = ("a", "b", "c", "d")
_FUN_NAMES = ("f", "g")
_PRED_NAMES = ("p", "q")


def trial_rng(gen: GenParams, law: str, index: int) -> random.Random:
    return random.Random(f"{gen.seed}:{law}:{index}")


def random_algebra(gen: GenParams, rng: random.Random,
                   function_free: bool = False) -> FiniteAlgebra:
    """Random finite algebra; deterministic for a given rng state."""
    n = rng.randint(1, max(1, gen.max_domain_size))
    domain = list(_ELEMENT_NAMES[:n])
    fun_tables: dict[str, dict[tuple[str, ...], str]] = {}
    if not function_free:
        for name in _FUN_NAMES[: rng.randint(0, 2)]:
            arity = rng.randint(1, max(1, gen.max_arity))
            table = {}
            from itertools import product

            for tup in product(domain, repeat=arity):
                table[tup] = rng.choice(domain)
            fun_tables[name] = table
    pred_tables: dict[str, set[tuple[str, ...]]] = {}
    pred_arities: dict[str, int] = {}
    for name in _PRED_NAMES[: rng.randint(1, 2)]:
        arity = rng.randint(1, max(1, gen.max_arity))
        pred_arities[name] = arity
        from itertools import product

        table = set()
        for tup in product(domain, repeat=arity):
            if rng.random() < 0.5:
                table.add(tup)
        pred_tables[name] = table
    return FiniteAlgebra(domain, fun_tables, pred_tables, pred_arities)


def random_term(gen: GenParams, alg: FiniteAlgebra, rng: random.Random,
                pool: tuple[Var, ...], depth: int) -> Term:
    funs = [f for f, k in alg.signature.functions.items() if k > 0]
    choices = ["var", "var", "elem"]
    if funs and depth > 0:
        choices.append("app")
    kind = rng.choice(choices)
    if kind == "var" and pool:
        return Variable(rng.choice(pool))
    if kind == "app" and funs:
        f = rng.choice(funs)
        arity = alg.signature.functions[f]
        return App(f, tuple(random_term(gen, alg, rng, pool, depth - 1)
                            for _ in range(arity)))
    return Lit(rng.choice(alg.enumerate_domain()))


def _random_atomic(gen: GenParams, alg: FiniteAlgebra, rng: random.Random,
                   pool: tuple[Var, ...], profile: GenProfile) -> Formula:
    choices = ["eq", "eq", "pred", "pred", "top", "bot"]
    if profile.eq_bias:
        choices += ["eq", "eq"]
    if profile.with_in_atoms:
        choices += ["in", "in"]
    kind = rng.choice(choices)
    term_depth = 1
    if kind == "eq":
        return Eq(random_term(gen, alg, rng, pool, term_depth),
                  random_term(gen, alg, rng, pool, term_depth))
    if kind == "pred" and alg.signature.predicates:
        p = rng.choice(sorted(alg.signature.predicates))
        arity = alg.signature.predicates[p]
        return Atom(p, tuple(random_term(gen, alg, rng, pool, term_depth)
                             for _ in range(arity)))
    if kind == "in" and pool:
        domain = alg.enumerate_domain()
        k = rng.randint(1, len(domain))
        elems = rng.sample(domain, k)
        return Atom(IN_PRED, (Variable(rng.choice(pool)),) + tuple(Lit(v) for v in elems))
    if kind == "top":
        return TOP
    if kind == "bot":
        return BOT
    return Eq(random_term(gen, alg, rng, pool, term_depth),
              random_term(gen, alg, rng, pool, term_depth))


def random_formula(gen: GenParams, alg: FiniteAlgebra, rng: random.Random,
                   depth: int | None = None,
                   pool: tuple[Var, ...] = USER_VARS,
                   binders: tuple[Var, ...] = BINDER_VARS,
                   profile: GenProfile = PLAIN_PROFILE) -> Formula:
    if depth is None:
        depth = gen.max_formula_depth
    if depth <= 0:
        return _random_atomic(gen, alg, rng, pool, profile)
    kind = rng.choice(["atomic", "atomic", "not", "and", "and", "or", "or", "exists"])
    if kind == "atomic":
        return _random_atomic(gen, alg, rng, pool, profile)
    if kind == "not":
        return Not(random_formula(gen, alg, rng, depth - 1, pool, binders, profile))
    if kind == "and":
        return And(random_formula(gen, alg, rng, depth - 1, pool, binders, profile),
                   random_formula(gen, alg, rng, depth - 1, pool, binders, profile))
    if kind == "or":
        return Or(random_formula(gen, alg, rng, depth - 1, pool, binders, profile),
                  random_formula(gen, alg, rng, depth - 1, pool, binders, profile))
    if binders:
        b = binders[0]
        body = random_formula(gen, alg, rng, depth - 1, pool + (b,), binders[1:], profile)
        return Exists(b, body)
    return _random_atomic(gen, alg, rng, pool, profile)


def random_subst(gen: GenParams, alg: FiniteAlgebra, rng: random.Random,
                 pool: tuple[Var, ...] = USER_VARS) -> Substitution:
    k = rng.randint(0, min(gen.max_subst_size, len(pool)))
    dom = rng.sample(pool, k)
    rest = [v for v in pool if v not in dom]
    bindings = {}
    for v in dom:
        if rest and rng.random() < 0.25:
            bindings[v] = Variable(rng.choice(rest))
        else:
            bindings[v] = Lit(rng.choice(alg.enumerate_domain()))
    return Substitution.of(bindings)


def random_state(gen: GenParams, alg: FiniteAlgebra, rng: random.Random,
                 profile: GenProfile = PLAIN_PROFILE) -> Pair:
    n = rng.randint(0, gen.max_csp_size)
    depth = min(2, gen.max_formula_depth)
    constraints = [random_formula(gen, alg, rng, depth, USER_VARS, BINDER_VARS, profile)
                   for _ in range(n)]
    if profile.eq_bias:
        # flat equations make clashes and solvable systems actually occur
        for _ in range(rng.randint(1, 2)):
            constraints.append(Eq(random_term(gen, alg, rng, USER_VARS, 0),
                                  random_term(gen, alg, rng, USER_VARS, 0)))
    return Pair(CSP.of(constraints), random_subst(gen, alg, rng))


def random_state_set(gen: GenParams, alg: FiniteAlgebra, rng: random.Random,
                     profile: GenProfile = PLAIN_PROFILE,
                     max_states: int = 3) -> StateSet:
    n = rng.randint(1, max_states)
    return StateSet.of(random_state(gen, alg, rng, profile) for _ in range(n))


# ---------------------------------------------------------------------------
# Operator resolution and profiles
# ---------------------------------------------------------------------------

OpSpec = "InferOp | str | Callable[[Algebra, Decider], InferOp]"

BUILTIN_PIPELINES = (
    "id",
    "normalize",
    "unify",
    "quadratic",
    "split",
    "domsplit(rank=value,thr=1)",
)


def profile_for(pipeline: str) -> GenProfile:
    names = {part.strip().split("(")[0] for part in pipeline.split(";")}
    return GenProfile(
        function_free="unify" in names,
        with_in_atoms="domsplit" in names,
        eq_bias="unify" in names,
    )


def resolve_op(op_spec, alg: Algebra, decider: Decider | None = None) -> InferOp:
    if isinstance(op_spec, InferOp):
        return op_spec
    if isinstance(op_spec, str):
        return build_pipeline(op_spec, alg, decider)
    return op_spec(alg, decider)


def _op_name(op_spec) -> str:
    if isinstance(op_spec, InferOp):
        return op_spec.name
    if isinstance(op_spec, str):
        return op_spec
    return getattr(op_spec, "__name__", "op")


# ---------------------------------------------------------------------------
# Shrinking
# ---------------------------------------------------------------------------

def _direct_subformulas(phi: Formula) -> list[Formula]:
    if isinstance(phi, Not):
        return [phi.body]
    if isinstance(phi, (And, Or)):
        return [phi.lhs, phi.rhs]
    if isinstance(phi, Exists):
        return [phi.body]
    return []


def _shrink_candidates(S: StateSet):
    states = list(S)
    if len(states) > 1:
        for i in range(len(states)):
            yield StateSet.of(states[:i] + states[i + 1:])
    for i, s in enumerate(states):
        if not isinstance(s, Pair):
            continue
        cs = list(s.csp)
        for j in range(len(cs)):
            smaller = Pair(CSP.of(cs[:j] + cs[j + 1:]), s.subst)
            yield StateSet.of(states[:i] + [smaller] + states[i + 1:])
            for sub in _direct_subformulas(cs[j]):
                replaced = Pair(CSP.of(cs[:j] + [sub] + cs[j + 1:]), s.subst)
                yield StateSet.of(states[:i] + [replaced] + states[i + 1:])
        bindings = s.subst.bindings
        for j in range(len(bindings)):
            smaller = Pair(s.csp, Substitution(bindings[:j] + bindings[j + 1:]))
            yield StateSet.of(states[:i] + [smaller] + states[i + 1:])


def shrink_state_set(S: StateSet, fails: Callable[[StateSet], bool]) -> StateSet:
    """Greedy minimization: keep any smaller input that still fails."""
    current = S
    for _ in range(200):
        for cand in _shrink_candidates(current):
            try:
                if fails(cand):
                    current = cand
                    break
            except BudgetError:
                continue
        else:
            break
    return current


# ---------------------------------------------------------------------------
# Law trial driver
# ---------------------------------------------------------------------------

def _run_law(law: str, gen: GenParams, trials: int, trial_fn,
             heuristic: bool = False) -> LawReport:
    report = LawReport(law=law, heuristic_only=heuristic)
    for i in range(trials):
        rng = trial_rng(gen, law, i)
        report.trials += 1
        try:
            status, ce = trial_fn(rng, report)
        except BudgetError:
            report.skips += 1
            continue
        if status == "skip":
            report.skips += 1
        elif status == "pass":
            report.passes += 1
        else:
            if len(report.counterexamples) < MAX_COUNTEREXAMPLES and ce is not None:
                report.counterexamples.append(ce)
    return report


# ---------------------------------------------------------------------------
# Pointwise / set equivalence / continuity
# ---------------------------------------------------------------------------

def _descendant_map(op: InferOp, S: StateSet):
    """Per-state descendants of an application to S.

    Lifted operators expose their core; other operators get singleton
    applications when spot-checked continuity holds on this input, or the
    whole output attributed to every member when it does not (each ancestor
    must account for its descendants by itself, so a regrouped state counts
    against every input it may have come from).
    """
    if op.pointwise_core is not None:
        return [(s, StateSet.of(op.pointwise_core(s))) for s in S]
    whole = op.apply(S)
    per_state = [(s, op.apply(singleton(s))) for s in S]
    union = StateSet.of(t for _, out in per_state for t in out)
    if union.same_elements(whole):
        return per_state
    return [(s, whole) for s in S]


def pointwise_holds(op: InferOp, S: StateSet, alg: Algebra,
                    budget: OracleBudget = DEFAULT_BUDGET):
    """Check that every pair state is equivalent to its descendants'
    disjunction; returns (ok, diagnosis)."""
    for s, desc in _descendant_map(op, S):
        if not isinstance(s, Pair):
            continue
        lhs = big_vee(desc)
        rhs = state_formula(s)
        if not equivalent_formulas(alg, lhs, rhs, budget):
            return False, (
                f"state {s} is not equivalent to its descendants {desc}"
            )
    return True, None


def set_equivalence_holds(op: InferOp, S: StateSet, alg: Algebra,
                          budget: OracleBudget = DEFAULT_BUDGET):
    out = op.apply(S)
    if not equivalent_formulas(alg, big_vee(out), big_vee(S), budget):
        return False, f"output {out} is not set-equivalent to input {S}", out
    return True, None, out


def continuity_holds(op: InferOp, S: StateSet):
    whole = op.apply(S)
    union = StateSet.of(t for s in S for t in op.apply(singleton(s)))
    return union.same_elements(whole), whole, union


def check_pointwise(op_spec, gen: GenParams, trials: int = 500,
                    heuristic: bool = False) -> LawReport:
    profile = profile_for(_op_name(op_spec)) if isinstance(op_spec, str) else PLAIN_PROFILE

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        op = resolve_op(op_spec, alg, finite_decider(alg))
        if rng.random() < 0.25:
            S = random_state_set(gen, alg, rng, profile)
        else:
            S = singleton(random_state(gen, alg, rng, profile))
        ok, diag = pointwise_holds(op, S, alg)
        if ok:
            return "pass", None
        small = shrink_state_set(S, lambda T: not pointwise_holds(op, T, alg)[0])
        _, diag2 = pointwise_holds(op, small, alg)
        return "fail", Counterexample(str(small), str(op.apply(small)),
                                      diag2 or diag or "pointwise equivalence fails")

    return _run_law(f"pointwise[{_op_name(op_spec)}]", gen, trials, trial,
                    heuristic=heuristic)


def check_set_equivalence(op_spec, gen: GenParams, trials: int = 500) -> LawReport:
    profile = profile_for(_op_name(op_spec)) if isinstance(op_spec, str) else PLAIN_PROFILE

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        op = resolve_op(op_spec, alg, finite_decider(alg))
        S = random_state_set(gen, alg, rng, profile)
        ok, diag, out = set_equivalence_holds(op, S, alg)
        if ok:
            return "pass", None
        small = shrink_state_set(S, lambda T: not set_equivalence_holds(op, T, alg)[0])
        _, diag2, out2 = set_equivalence_holds(op, small, alg)
        return "fail", Counterexample(str(small), str(out2), diag2 or diag)

    return _run_law(f"set-equivalence[{_op_name(op_spec)}]", gen, trials, trial)


def check_continuity(op_spec, gen: GenParams, trials: int = 500) -> LawReport:
    profile = profile_for(_op_name(op_spec)) if isinstance(op_spec, str) else PLAIN_PROFILE

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        op = resolve_op(op_spec, alg, finite_decider(alg))
        S = random_state_set(gen, alg, rng, profile)
        report.note(f"set_size_{len(S)}")
        ok, whole, union = continuity_holds(op, S)
        if ok:
            return "pass", None
        small = shrink_state_set(S, lambda T: not continuity_holds(op, T)[0])
        _, whole2, union2 = continuity_holds(op, small)
        return "fail", Counterexample(
            str(small), str(whole2),
            f"set application differs from union of singleton applications {union2}",
        )

    return _run_law(f"continuity[{_op_name(op_spec)}]", gen, trials, trial)


def check_proposition1(op_spec, gen: GenParams, trials: int = 500) -> LawReport:
    """Under continuity, the set-equivalence and pointwise verdicts agree."""
    profile = profile_for(_op_name(op_spec)) if isinstance(op_spec, str) else PLAIN_PROFILE

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        op = resolve_op(op_spec, alg, finite_decider(alg))
        S = random_state_set(gen, alg, rng, profile)
        ok, _, _ = continuity_holds(op, S)
        if not ok:
            report.note("gate_excluded")
            return "skip", None
        pw, _ = pointwise_holds(op, S, alg)
        se, _, out = set_equivalence_holds(op, S, alg)
        if pw == se:
            return "pass", None
        return "fail", Counterexample(
            str(S), str(out),
            f"verdicts diverge under continuity: pointwise={pw}, set-equivalence={se}",
        )

    return _run_law(f"proposition1[{_op_name(op_spec)}]", gen, trials, trial)


# ---------------------------------------------------------------------------
# Alphabetic variation, inconsistency, error
# ---------------------------------------------------------------------------

def _state_vars(s: Pair) -> set[Var]:
    out: set[Var] = set()
    for f in s.csp:
        out |= all_vars(f)
    for v, t in s.subst.bindings:
        out.add(v)
        out |= term_vars(t)
    return out


def _next_fresh_index(states) -> int:
    top = -1
    for s in states:
        if isinstance(s, Pair):
            for v in _state_vars(s):
                if v.is_fresh:
                    top = max(top, v.fresh_index)
    return top + 1


def check_alphabetic(op_spec, gen: GenParams, trials: int = 500,
                     namespace: str = "fresh") -> LawReport:
    """Renaming a variable commutes with the operator.

    namespace="fresh" renames a fresh-namespace variable (the paper's
    condition); namespace="user" additionally probes user variables, which
    the paper leaves open.
    """
    profile = profile_for(_op_name(op_spec)) if isinstance(op_spec, str) else PLAIN_PROFILE

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        op = resolve_op(op_spec, alg, finite_decider(alg))
        s = random_state(gen, alg, rng, profile)
        occupied = sorted(_state_vars(s), key=lambda v: v.name)
        user_vars = [v for v in occupied if not v.is_fresh]
        if namespace == "fresh":
            u = fresh_var(0)
            if user_vars:
                s = rename_state(s, rng.choice(user_vars), u)
            else:
                s = Pair(s.csp, Substitution.of(
                    dict(s.subst.bindings) | {u: Lit(rng.choice(alg.enumerate_domain()))}
                ))
        else:
            if not user_vars:
                report.note("vacuous")
                return "pass", None
            u = rng.choice(user_vars)
        out = op.apply(singleton(s))
        if namespace == "fresh":
            v = fresh_var(max(_next_fresh_index(list(out) + [s]), 1))
        else:
            v = Var("v9")
            if any(v in _state_vars(t) for t in out.pairs()) or v in _state_vars(s):
                report.note("vacuous")
                return "pass", None
        lhs = op.apply(singleton(rename_state(s, u, v)))
        rhs = rename_state_set(out, u, v)
        if lhs.same_elements(rhs):
            return "pass", None
        return "fail", Counterexample(
            str(s), str(out),
            f"renaming {u} to {v} does not commute: {lhs} vs {rhs}",
        )

    return _run_law(f"alphabetic-{namespace}[{_op_name(op_spec)}]", gen, trials, trial)


def check_inconsistency_cond(op_spec, gen: GenParams, trials: int = 500) -> LawReport:
    """An empty result is only allowed for semantically inconsistent states."""
    profile = profile_for(_op_name(op_spec)) if isinstance(op_spec, str) else PLAIN_PROFILE

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        decider = finite_decider(alg)
        op = resolve_op(op_spec, alg, decider)
        s = random_state(gen, alg, rng, profile)
        if rng.random() < 0.25:
            s = Pair(s.csp.add(BOT), s.subst)
        out = op.apply(singleton(s))
        if len(out) > 0:
            report.note("vacuous")
            return "pass", None
        if decider.is_consistent(s).is_false():
            return "pass", None
        return "fail", Counterexample(
            str(s), str(out),
            "operator returned the empty set on a satisfiable state",
        )

    return _run_law(f"inconsistency[{_op_name(op_spec)}]", gen, trials, trial)


def check_error_cond(op_spec, gen: GenParams) -> LawReport:
    """The error state maps to exactly itself; one deterministic trial."""

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng)
        op = resolve_op(op_spec, alg, finite_decider(alg))
        out = op.apply(singleton(ERROR))
        if list(out) == [ERROR]:
            return "pass", None
        return "fail", Counterexample("[<error>]", str(out),
                                      "error state not propagated unchanged")

    return _run_law(f"error[{_op_name(op_spec)}]", gen, 1, trial)


def condition_suite(op_spec, gen: GenParams, trials: int = 500) -> list[LawReport]:
    """Continuity, alphabetic commutation, inconsistency, and error checks."""
    return [
        check_continuity(op_spec, gen, trials),
        check_alphabetic(op_spec, gen, trials, namespace="fresh"),
        check_alphabetic(op_spec, gen, trials, namespace="user"),
        check_inconsistency_cond(op_spec, gen, trials),
        check_error_cond(op_spec, gen),
    ]


def certification_suite(op_spec, gen: GenParams, trials: int = 500) -> list[LawReport]:
    """The full law suite run by the check-infer command."""
    return [
        check_pointwise(op_spec, gen, trials),
        check_set_equivalence(op_spec, gen, trials),
        check_continuity(op_spec, gen, trials),
        check_proposition1(op_spec, gen, trials),
        check_alphabetic(op_spec, gen, trials, namespace="fresh"),
        check_alphabetic(op_spec, gen, trials, namespace="user"),
        check_inconsistency_cond(op_spec, gen, trials),
        check_error_cond(op_spec, gen),
    ]


# ---------------------------------------------------------------------------
# Soundness theorem and preservation lemma trials
# ---------------------------------------------------------------------------

def soundness_suite(pipeline: str, gen: GenParams, trials: int = 1000,
                    max_states: int = 3, formula_depth: int = 4) -> LawReport:
    """Both parts of the soundness statement in pointwise form.

    Every result state must entail the query, and an all-inconsistent
    result means every input state entails its negation. Truncated or
    error-producing evaluations are skipped and counted.
    """
    profile = profile_for(pipeline)
    deep = GenParams(
        max_formula_depth=formula_depth,
        max_arity=gen.max_arity,
        max_domain_size=gen.max_domain_size,
        max_csp_size=gen.max_csp_size,
        max_subst_size=gen.max_subst_size,
        seed=gen.seed,
    )

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(deep, rng, function_free=profile.function_free)
        decider = finite_decider(alg)
        op = build_pipeline(pipeline, alg, decider)
        S = random_state_set(deep, alg, rng, profile, max_states=max_states)
        phi = random_formula(deep, alg, rng, profile=profile)
        cfg = EvalConfig(alg, op, decider, FreshSupply(), EvalLimits())
        outcome = sem_eval(cfg, S, phi)
        if outcome.truncated:
            report.note("truncated")
            return "skip", None
        if outcome.result.has_error():
            report.note("error_state")
            return "skip", None
        for out_state in outcome.result.pairs():
            if not entails(alg, state_formula(out_state), phi):
                return "fail", Counterexample(
                    f"S={S} phi={print_formula(phi)}", str(outcome.result),
                    f"result state {out_state} does not entail the query",
                )
        if len(cons_plus(outcome.result, decider)) == 0:
            for in_state in S.pairs():
                if not entails(alg, state_formula(in_state), Not(phi)):
                    return "fail", Counterexample(
                        f"S={S} phi={print_formula(phi)}", str(outcome.result),
                        f"empty outcome but input state {in_state} "
                        "does not entail the negated query",
                    )
        return "pass", None

    return _run_law(f"soundness[{pipeline}]", gen, trials, trial)


def preservation_suite(pipeline: str, gen: GenParams, trials: int = 500) -> LawReport:
    """Validity and consistency preservation across an evaluation."""
    profile = profile_for(pipeline)

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng, function_free=profile.function_free)
        decider = finite_decider(alg)
        op = build_pipeline(pipeline, alg, decider)
        s = random_state(gen, alg, rng, profile)
        phi1 = random_formula(gen, alg, rng, depth=min(2, gen.max_formula_depth),
                              profile=profile)
        phi2 = random_formula(gen, alg, rng, profile=profile)
        cfg = EvalConfig(alg, op, decider, FreshSupply(), EvalLimits())
        outcome = sem_eval(cfg, singleton(s), phi2)
        if outcome.truncated:
            report.note("truncated")
            return "skip", None
        if outcome.result.has_error():
            report.note("error_state")
            return "skip", None
        sf = state_formula(s)
        checked = False
        if entails(alg, sf, phi1):
            checked = True
            for out_state in outcome.result.pairs():
                if not entails(alg, state_formula(out_state), phi1):
                    return "fail", Counterexample(
                        f"s={s} phi1={print_formula(phi1)} phi2={print_formula(phi2)}",
                        str(outcome.result),
                        f"validity lost in {out_state}",
                    )
        joint = And(sf, And(phi1, phi2))
        if satisfiable(alg, joint) and len(cons(outcome.result, decider)) > 0:
            checked = True
            witnesses = [
                t for t in outcome.result.pairs()
                if satisfiable(alg, And(state_formula(t), And(phi1, phi2)))
            ]
            if not witnesses:
                return "fail", Counterexample(
                    f"s={s} phi1={print_formula(phi1)} phi2={print_formula(phi2)}",
                    str(outcome.result),
                    "consistency lost: no result state stays consistent "
                    "with the side formulas",
                )
        if not checked:
            report.note("vacuous")
        return "pass", None

    return _run_law(f"preservation[{pipeline}]", gen, trials, trial)


def constructed_switch_cases() -> list[dict]:
    """Disjunction scenarios whose first branch clashes with the side formula.

    These force the consistency part of the preservation check to switch
    from the first consistent result state to a later one.
    """
    cases = []
    for domain in (["a", "b"], ["a", "b", "c"]):
        for pred_true in (["a"], ["b"], domain[:2]):
            for extra_binding in (False, True):
                for pred_name in ("p", "q"):
                    alg = FiniteAlgebra(
                        domain, {}, {pred_name: {(e,) for e in pred_true}},
                        {pred_name: 1},
                    )
                    good = pred_true[0]
                    bad_candidates = [e for e in domain if e not in pred_true]
                    if not bad_candidates:
                        continue
                    bad = bad_candidates[0]
                    x = Var("x")
                    phi1 = Atom(pred_name, (Variable(x),))
                    phi2 = Or(Eq(Variable(x), Lit(alg.enumerate_domain()[domain.index(bad)])),
                              Eq(Variable(x), Lit(alg.enumerate_domain()[domain.index(good)])))
                    subst = Substitution.of(
                        {Var("y"): Lit(alg.enumerate_domain()[0])}
                    ) if extra_binding else Substitution()
                    cases.append({
                        "alg": alg,
                        "state": Pair(CSP.of([]), subst),
                        "phi1": phi1,
                        "phi2": phi2,
                    })
    return cases


def preservation_switch_report(pipeline: str = "normalize") -> LawReport:
    """Run the constructed disjunction cases; the state-switch must fire."""
    report = LawReport(law=f"preservation-switch[{pipeline}]")
    for case in constructed_switch_cases():
        alg = case["alg"]
        decider = finite_decider(alg)
        op = build_pipeline(pipeline, alg, decider)
        cfg = EvalConfig(alg, op, decider, FreshSupply(), EvalLimits())
        s = case["state"]
        phi1, phi2 = case["phi1"], case["phi2"]
        report.trials += 1
        outcome = sem_eval(cfg, singleton(s), phi2)
        if outcome.truncated or outcome.result.has_error():
            report.skips += 1
            continue
        joint_ok = satisfiable(alg, And(state_formula(s), And(phi1, phi2)))
        consistent = list(cons(outcome.result, decider))
        witnesses = [
            t for t in outcome.result.pairs()
            if satisfiable(alg, And(state_formula(t), And(phi1, phi2)))
        ]
        switch_exercised = (
            consistent
            and witnesses
            and satisfiable(alg, state_formula(consistent[0]))
            and consistent[0] not in witnesses
        )
        if joint_ok and consistent and witnesses and switch_exercised:
            report.passes += 1
            report.note("switch_exercised")
        elif joint_ok and consistent and witnesses:
            report.passes += 1
        else:
            if len(report.counterexamples) < MAX_COUNTEREXAMPLES:
                report.counterexamples.append(Counterexample(
                    f"s={s} phi1={print_formula(phi1)} phi2={print_formula(phi2)}",
                    str(outcome.result),
                    "constructed disjunction case failed the consistency part",
                ))
    return report


# ---------------------------------------------------------------------------
# Local-variable dropping: semantic property
# ---------------------------------------------------------------------------

def check_drop_u(gen: GenParams, trials: int = 300) -> LawReport:
    """dropping u is existential quantification: the result state's formula
    is equivalent to exists u of the original state's formula.

    u is placed in the store and in the substitution's domain but never
    inside binding ranges, where the definition keeps occurrences verbatim
    and the equivalence provably fails.
    """

    def trial(rng: random.Random, report: LawReport):
        alg = random_algebra(gen, rng)
        s = random_state(gen, alg, rng)
        u = fresh_var(0)
        pattern = rng.choice(["absent", "csp", "dom", "both", "csp-bound"])
        csp = list(s.csp)
        bindings = dict(s.subst.bindings)
        if pattern in ("csp", "both"):
            preds = [p for p, k in alg.signature.predicates.items() if k == 1]
            if preds and rng.random() < 0.5:
                csp.append(Atom(rng.choice(sorted(preds)), (Variable(u),)))
            else:
                csp.append(Eq(Variable(u),
                              random_term(gen, alg, rng, USER_VARS, 1)))
        if pattern in ("dom", "both"):
            bindings[u] = Lit(rng.choice(alg.enumerate_domain()))
        if pattern == "csp-bound":
            body = Eq(Variable(u), random_term(gen, alg, rng, USER_VARS, 0))
            csp.append(Exists(u, body))
        s2 = Pair(CSP.of(csp), Substitution.of(bindings))
        report.note(f"pattern_{pattern}")
        dropped = drop_u(u, s2)
        lhs = state_formula(dropped)
        rhs = Exists(u, state_formula(s2))
        if equivalent_formulas(alg, lhs, rhs):
            return "pass", None
        return "fail", Counterexample(
            str(s2), str(dropped),
            "dropping u is not equivalent to existential quantification",
        )

    return _run_law("drop-u-semantics", gen, trials, trial)


# ---------------------------------------------------------------------------
# Integer-slice heuristics for the quadratic solver
# ---------------------------------------------------------------------------

def quadratic_slice_reports(gen: GenParams, trials: int = 200,
                            lo: int = -5, hi: int = 5) -> list[LawReport]:
    """Slice-checked pointwise equivalence and inconsistency for the
    quadratic solver; heuristic only, never a certification over all
    integers."""
    alg = int_slice(lo, hi)
    op = quadratic_infer()
    x = Var("x")

    def make_state(rng: random.Random) -> Pair:
        k = rng.randint(-4, 10)
        if rng.random() < 0.5:
            lhs = App("*", (Variable(x), Variable(x)))
        else:
            lhs = App("pow", (Variable(x), Lit(IntValue(2))))
        constraints: list[Formula] = [Eq(lhs, Lit(IntValue(k)))]
        if rng.random() < 0.3:
            constraints.append(Eq(Variable(Var("y")), Lit(IntValue(rng.randint(lo, hi)))))
        return Pair(CSP.of(constraints), Substitution())

    def pointwise_trial(rng: random.Random, report: LawReport):
        s = make_state(rng)
        ok, diag = pointwise_holds(op, singleton(s), alg, SLICE_BUDGET)
        if ok:
            return "pass", None
        return "fail", Counterexample(str(s), str(op.apply(singleton(s))),
                                      diag or "pointwise fails on slice")

    def inconsistency_trial(rng: random.Random, report: LawReport):
        s = make_state(rng)
        out = op.apply(singleton(s))
        if len(out) > 0:
            report.note("vacuous")
            return "pass", None
        if not satisfiable(alg, state_formula(s), SLICE_BUDGET):
            return "pass", None
        return "fail", Counterexample(str(s), str(out),
                                      "empty result on a slice-satisfiable state")

    return [
        _run_law("pointwise-slice[quadratic]", gen, trials, pointwise_trial,
                 heuristic=True),
        _run_law("inconsistency-slice[quadratic]", gen, trials, inconsistency_trial,
                 heuristic=True),
    ]


# ---------------------------------------------------------------------------
# Bounded-universe unification checks
# ---------------------------------------------------------------------------

def herbrand_universe(constants: list[str], unary_funs: list[str],
                      depth: int) -> list[Term]:
    """All ground terms up to the given constructor depth."""
    layer: list[Term] = [App(c, ()) for c in constants]
    universe = list(layer)
    for _ in range(depth):
        layer = [App(f, (t,)) for f in unary_funs for t in layer]
        universe.extend(layer)
    return universe


def _ground_term(t: Term, asg: dict[Var, Term]) -> Term:
    if isinstance(t, Variable):
        return asg[t.var]
    if isinstance(t, App):
        return App(t.fun, tuple(_ground_term(a, asg) for a in t.args))
    return t


def ground_solutions(equations: list[tuple[Term, Term]], universe: list[Term]):
    """Brute-force solutions of term equations over a bounded ground universe."""
    import itertools

    varset: set[Var] = set()
    for l, r in equations:
        varset |= term_vars(l) | term_vars(r)
    variables = sorted(varset, key=lambda v: v.name)
    for combo in itertools.product(universe, repeat=len(variables)):
        asg = dict(zip(variables, combo))
        if all(_ground_term(l, asg) == _ground_term(r, asg) for l, r in equations):
            yield asg


def check_unify_mgu(gen: GenParams, trials: int = 200) -> LawReport:
    """Every bounded-universe solution factors through the produced unifier,
    and unification failure means no bounded solution exists."""
    from .infer import UnifyFailure, robinson_unify

    constants = ["a", "b"]
    unary = ["f"]
    universe = herbrand_universe(constants, unary, depth=2)
    pool = (Var("x"), Var("y"))

    def random_uterm(rng: random.Random, depth: int) -> Term:
        kind = rng.choice(["var", "var", "const", "fun"] if depth > 0
                          else ["var", "var", "const"])
        if kind == "var":
            return Variable(rng.choice(pool))
        if kind == "const":
            return App(rng.choice(constants), ())
        return App(rng.choice(unary), (random_uterm(rng, depth - 1),))

    def trial(rng: random.Random, report: LawReport):
        n = rng.randint(1, 3)
        eqs = [(random_uterm(rng, 2), random_uterm(rng, 2)) for _ in range(n)]
        try:
            mgu = robinson_unify(list(eqs))
        except UnifyFailure:
            for _ in ground_solutions(eqs, universe):
                return "fail", Counterexample(
                    str(eqs), "failure",
                    "unification failed but a bounded ground solution exists",
                )
            return "pass", None
        solutions = list(ground_solutions(eqs, universe))
        if not solutions:
            report.note("no_bounded_solution")
            return "pass", None
        for sol in solutions:
            for v, image in sol.items():
                via = mgu.get(v, Variable(v))
                grounded = _ground_term(via, sol)
                if grounded != image:
                    return "fail", Counterexample(
                        str(eqs), str(mgu),
                        f"solution {sol} does not factor through the unifier",
                    )
        return "pass", None

    return _run_law("unify-mgu", gen, trials, trial)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def reports_to_records(reports: list[LawReport]) -> list[dict]:
    return [r.to_record() for r in reports]
