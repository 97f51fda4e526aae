"""Satisficing planner for a typed-STRIPS PDDL fragment that plans with
externally supplied programs as value functions and policies."""

from .grounding import (
    GroundAction,
    Inapplicable,
    State,
    Task,
    applicable_actions,
    apply,
    build_task,
    is_goal,
)
from .pddl import parse_domain, parse_problem, print_domain, print_problem
from .programs import (
    LARGE_VALUE,
    BlindValue,
    ExternalPolicy,
    ExternalValue,
    FirstApplicablePolicy,
    GoalCountValue,
    PolicyFn,
    ProgramHandle,
    RandomPolicy,
    ValueFn,
    goal_count,
    open_program,
    safe_value,
    sound_action,
)
from .search import (
    Outcome,
    Plan,
    ResourceLimits,
    SearchResult,
    dual_queue_gbfs,
    extract_plan,
    gbfs,
    policy_rollout,
)
from .synthesis import (
    Mode,
    build_prompt,
    pearson,
    select_best,
    select_mode,
    validation_score,
)
from .validation import ValidationOutcome, validate_plan

__version__ = "0.1.0"
