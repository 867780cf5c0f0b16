"""Shared run state and the interface every building block implements."""

from __future__ import annotations

import math
from typing import Callable, Mapping

from .estimators import EUBound, get_eu_estimate, get_eui_estimate
from .objective import CostModel, History, ObjectiveSpec, Trial
from .space import Assignment, SearchSpace, SpaceError, Subgoal


class BudgetExhausted(Exception):
    """Raised by a leaf when the global budget is spent. Marks completion, not failure."""


class NoTrialsError(LookupError):
    """No ok trial exists yet, so there is no current best."""


class RunContext:
    """State shared by all blocks of one run: the objective and the global budget."""

    def __init__(self, objective: ObjectiveSpec, budget: float = math.inf):
        self.objective = objective
        self.space = objective.space
        self.budget_total = budget
        self.spent = 0.0
        self.trials: list[Trial] = []
        self.listeners: list[Callable[[Trial], None]] = []

    def remaining(self) -> float:
        return self.budget_total - self.spent

    def exhausted(self) -> bool:
        return self.remaining() <= 0

    def charge(self, trial: Trial) -> None:
        self.trials.append(trial)
        self.spent += trial.cost
        for fn in self.listeners:
            fn(trial)


class Block:
    """Base building block.

    A block owns the free variables ``space`` of its subgoal; the subgoal's
    constants are merged into every assignment it evaluates. ``history`` holds
    every leaf trial produced anywhere below this block.
    """

    kind = "block"

    def __init__(self, ctx: RunContext, space: SearchSpace, subgoal: Subgoal | None = None,
                 *, window: int = 10, beta: float = 1.0, parent: "Block | None" = None):
        subgoal = subgoal or Subgoal()
        overlap = set(space.names) & subgoal.fixed_vars
        if overlap:
            raise SpaceError(f"variables {sorted(overlap)} are both free and fixed")
        missing = set(ctx.space.names) - set(space.names) - subgoal.fixed_vars
        if missing:
            raise SpaceError(f"uncovered variables {sorted(missing)}")
        ctx.space.validate(subgoal.fixed_values, full=False)
        for v in space:
            ctx.space[v.name]
        self.ctx = ctx
        self.space = space
        self.subgoal = subgoal
        self.window = window
        self.beta = beta
        self.parent = parent
        self.history = History()
        self.cost_model = CostModel()
        self.do_next_calls = 0

    @property
    def children(self) -> list["Block"]:
        return []

    def do_next(self) -> list[Trial]:
        raise NotImplementedError

    def _observe(self, trial: Trial) -> None:
        self.history.record(trial)
        self.cost_model.update(trial.cost)
        if self.parent is not None:
            self.parent._observe(trial)

    def get_current_best(self) -> tuple[Assignment, float]:
        best = self.history.best_trial()
        if best is None:
            raise NoTrialsError(f"{self.kind} block has no ok trial")
        return dict(best.assignment), best.value

    def get_eu(self, budget: float | None = None) -> EUBound:
        if budget is None:
            budget = self.ctx.remaining()
        return get_eu_estimate(self.history, self.cost_model, budget, self.window, self.beta)

    def get_eui(self) -> float:
        return get_eui_estimate(self.history)

    def set_var(self, values: Mapping) -> None:
        """Re-pin fixed variables; future evaluations use the new constants."""
        free = set(values) & set(self.space.names)
        if free:
            raise SpaceError(f"cannot pin free variables {sorted(free)}")
        self.ctx.space.validate(values, full=False)
        self.subgoal = self.subgoal.with_values(values)
        for child in self.children:
            child.set_var(values)

    def share(self, trial: Trial) -> bool:
        """Adopt an ok trial evaluated elsewhere if it lies in this block's current subproblem.

        Shared trials feed the history (and so the surrogate and the
        estimators) but are not charged and not propagated to the parent.
        """
        if not trial.ok or any(t is trial for t in self.history.trials):
            return False
        a = trial.assignment
        if any(a.get(k) != v for k, v in self.subgoal.fixed_values.items()):
            return False
        if not all(v.domain.contains(a.get(v.name)) for v in self.space):
            return False
        self.history.record(trial)
        for child in self.children:
            child.share(trial)
        return True

    def observe_context(self, trials) -> None:
        """Pass trials evaluated elsewhere in the tree down to surrogates as training data only."""
        for child in self.children:
            child.observe_context(trials)

    def iter_blocks(self):
        yield self
        for child in self.children:
            yield from child.iter_blocks()
