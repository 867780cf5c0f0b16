"""Hierarchical black-box optimisation over decomposed search spaces."""

from .bandit import AlternatingBlock, ConditioningBlock
from .block import Block, BudgetExhausted, NoTrialsError, RunContext
from .estimators import EUBound, eliminate_dominated, get_eu_estimate, get_eui_estimate
from .joint import JointBlock, expected_improvement
from .objective import (
    CostModel,
    History,
    ObjectiveSpec,
    SubprocessEvaluator,
    Trial,
    evaluate,
)
from .plan import (
    Annotations,
    Executor,
    Params,
    PlanConfig,
    build,
    enumerate_coarse_plans,
    load_config,
    save_config,
)
from .space import (
    Categorical,
    Continuous,
    Integer,
    SearchSpace,
    SpaceError,
    Subgoal,
    Variable,
    merge,
    sample_uniform,
    split_numeric,
    substitute,
)

__all__ = [
    "AlternatingBlock",
    "ConditioningBlock",
    "Block",
    "BudgetExhausted",
    "NoTrialsError",
    "RunContext",
    "EUBound",
    "eliminate_dominated",
    "get_eu_estimate",
    "get_eui_estimate",
    "JointBlock",
    "expected_improvement",
    "CostModel",
    "History",
    "ObjectiveSpec",
    "SubprocessEvaluator",
    "Trial",
    "evaluate",
    "Annotations",
    "Executor",
    "Params",
    "PlanConfig",
    "build",
    "enumerate_coarse_plans",
    "load_config",
    "save_config",
    "Categorical",
    "Continuous",
    "Integer",
    "SearchSpace",
    "SpaceError",
    "Subgoal",
    "Variable",
    "merge",
    "sample_uniform",
    "split_numeric",
    "substitute",
]

__version__ = "0.1.0"
