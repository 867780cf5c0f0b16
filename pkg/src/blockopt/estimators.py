"""Expected-utility bounds, expected utility improvement, and arm elimination.

Utility is the negated loss, so "improvement" is a drop in the incumbent loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np

from .objective import CostModel, History

EPS_COST = 1e-9


@dataclass(frozen=True)
class EUBound:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} above upper bound {self.upper}")


def incumbent_improvements(values) -> np.ndarray:
    """Per-step drops of the running minimum; one entry per value after the first."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return np.zeros(0)
    best = np.minimum.accumulate(v)
    return best[:-1] - best[1:]


def get_eu_estimate(
    history: History, cost: CostModel, budget: float, window: int = 10, beta: float = 1.0
) -> EUBound:
    """Bracket the utility reachable with ``budget`` more units.

    The lower bound is the current best utility. The upper bound extrapolates
    the recent incumbent improvements (mean plus ``beta`` standard deviations
    over the last ``window`` ok trials) across the number of evaluations the
    budget buys at the block's average cost.
    """
    vals = history.ok_values()
    if not vals:
        raise ValueError("no ok trials to estimate from")
    u_star = -min(vals)
    if len(vals) < 2:
        return EUBound(u_star, u_star)
    imp = incumbent_improvements(vals)[-window:]
    rate = float(imp.mean() + beta * imp.std())
    if rate <= 0 or budget <= 0:
        return EUBound(u_star, u_star)
    steps = budget / max(cost.ema_cost, EPS_COST)
    steps = math.floor(steps) if math.isfinite(steps) else math.inf
    return EUBound(u_star, u_star + steps * rate if steps else u_star)


def get_eui_estimate(history: History) -> float:
    """Mean incumbent improvement per step over the ok trials (0 for a single trial)."""
    vals = history.ok_values()
    if not vals:
        raise ValueError("no ok trials to estimate from")
    imp = incumbent_improvements(vals)
    return float(imp.mean()) if len(imp) else 0.0


def eliminate_dominated(bounds: Mapping[Hashable, EUBound]) -> set:
    """Arms whose upper bound sits below some other arm's lower bound."""
    if not bounds:
        return set()
    best_lower = max(b.lower for b in bounds.values())
    # u_i < l_j for some j != i; for j == i it cannot hold since l_i <= u_i
    return {arm for arm, b in bounds.items() if b.upper < best_lower}
