"""First-order logic over constraint states with pluggable inference."""

from .algebra import (
    Algebra,
    AlgebraError,
    EvaluationError,
    FiniteAlgebra,
    HerbrandAlgebra,
    IntAlgebra,
    Signature,
    UnsupportedOperation,
    herbrand_algebra,
    int_algebra,
    int_slice,
    parse_algebra_spec,
    print_algebra_spec,
)
from .infer import (
    FixpointInfer,
    InferOp,
    PipelineError,
    build_pipeline,
    case_split_infer,
    compose_infer,
    domain_split_infer,
    eval_normalize,
    fixpoint_infer,
    identity_infer,
    lift_pointwise,
    quadratic_infer,
    regroup_fixture,
    robinson_unify,
    unify_infer,
)
from .oracle import (
    BudgetError,
    Decider,
    FiniteDecider,
    OracleBudget,
    SyntacticDecider,
    Verdict,
    decider_for,
    entails,
    equivalent_formulas,
    eval_formula,
    finite_decider,
    satisfiable,
    syntactic_decider,
)
from .semantics import (
    Answers,
    EvalConfig,
    EvalLimits,
    EvalOutcome,
    EvalStats,
    answers,
    sem_eval,
    sem_eval_state,
)
from .state import (
    CSP,
    EMPTY_CSP,
    EMPTY_SUBST,
    ERROR,
    ErrorState,
    Pair,
    State,
    StateSet,
    Substitution,
    apply_subst,
    apply_subst_formula,
    big_vee,
    cons,
    cons_plus,
    csp_part,
    drop_binding,
    drop_u,
    pair,
    rename_everywhere,
    singleton,
    state_formula,
    theta_hat,
)
from .syntax import (
    And,
    App,
    Atom,
    BOT,
    Bot,
    ElemValue,
    Eq,
    Exists,
    FolcpError,
    Formula,
    FreshSupply,
    IntValue,
    Lit,
    Not,
    Or,
    ParseError,
    SubstitutionError,
    Term,
    TermValue,
    TOP,
    Top,
    Value,
    Var,
    Variable,
    const,
    free_vars,
    fresh_var,
    parse_formula,
    parse_term,
    print_formula,
    print_term,
    subst_var,
)

__all__ = [name for name in dir() if not name.startswith("_")]
