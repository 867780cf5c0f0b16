"""Leaf block: Bayesian optimisation with a random-forest surrogate and EI."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .block import Block, BudgetExhausted, RunContext
from .forest import RandomForest
from .objective import evaluate
from .space import (
    SearchSpace,
    SpaceError,
    Subgoal,
    assignments_to_columns,
    encode_columns,
    merge,
    row_assignment,
    sample_columns,
    sample_uniform,
)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def expected_improvement(mu, sigma, best):
    """EI for minimisation. Works on scalars and arrays."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("sigma must be >= 0")
    diff = best - mu
    pos = sigma > 0
    safe = np.where(pos, sigma, 1.0)
    gamma = diff / safe
    ei = np.where(pos, safe * (gamma * ndtr(gamma) + _INV_SQRT_2PI * np.exp(-0.5 * gamma * gamma)), diff)
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


class JointBlock(Block):
    kind = "joint"

    def __init__(self, ctx: RunContext, space: SearchSpace, subgoal: Subgoal | None = None, *,
                 n_init: int = 3, candidate_pool: int = 1024, n_local: int = 10,
                 num_trees: int = 25, min_samples_split: int = 3, fidelity: float = 1.0,
                 seed=None, **kw):
        if len(space) == 0:
            raise SpaceError("joint block over an empty space has nothing to optimise")
        super().__init__(ctx, space, subgoal, **kw)
        if n_init < 1 or candidate_pool < 1:
            raise ValueError("n_init and candidate_pool must be >= 1")
        self.n_init = n_init
        self.candidate_pool = candidate_pool
        self.n_local = n_local
        self.fidelity = fidelity
        self.rng = np.random.default_rng(seed)
        self.surrogate = RandomForest(num_trees, min_samples_split)
        self.surrogate_fits = 0
        self.last_pool = None
        self.context_trials: list = []

    def _incumbent_columns(self):
        best = self.history.best_trial()
        return assignments_to_columns(self.space, [best.assignment])

    def _features(self, cols: dict, n: int) -> np.ndarray:
        """Encode over the full space; pinned variables enter as context columns.

        After set_var the retained history mixes several pin values, and the
        context columns let the forest separate them. Pins that never changed
        give constant columns, which the trees ignore.
        """
        full = dict(cols)
        pins = assignments_to_columns(self.ctx.space.subset(self.subgoal.fixed_vars), [self.subgoal.fixed_values])
        for name, col in pins.items():
            full[name] = np.repeat(col, n)
        return encode_columns(self.ctx.space, full)

    def propose(self) -> dict:
        if self.history.n_ok < self.n_init or not self.surrogate.trained:
            return sample_uniform(self.space, self.rng, 1)[0]
        cols = sample_columns(self.space, self.rng, self.candidate_pool)
        inc = self._incumbent_columns()
        names = self.space.names
        local = {n: np.repeat(inc[n], self.n_local) for n in names}
        for i in range(self.n_local):
            j = int(self.rng.integers(len(names)))
            local[names[j]][i] = self.space[names[j]].domain.sample(self.rng, 1)[0]
        pool = {n: np.concatenate([cols[n], local[n]]) for n in names}
        X = self._features(pool, self.candidate_pool + self.n_local)
        mu, var = self.surrogate.predict(X)
        ei = expected_improvement(mu, np.sqrt(var), self.history.best_so_far)
        i = int(np.argmax(ei))
        self.last_pool = (X, mu, var, ei)
        return row_assignment(self.space, pool, i)

    def observe_context(self, trials) -> None:
        self.context_trials += [t for t in trials if t.ok]

    def _refit(self):
        seen = {id(t) for t in self.history.trials}
        trials = self.history.trials + [t for t in self.context_trials if id(t) not in seen]
        X = encode_columns(self.ctx.space, assignments_to_columns(self.ctx.space, [t.assignment for t in trials]))
        y = np.array([t.value for t in trials])
        self.surrogate.fit(X, y, seed=int(self.rng.integers(2**31 - 1)))
        self.surrogate_fits += 1

    def share(self, trial):
        adopted = super().share(trial)
        if adopted and self.history.n_ok >= self.n_init:
            self._refit()
        return adopted

    def do_next(self):
        if self.ctx.exhausted():
            raise BudgetExhausted
        self.do_next_calls += 1
        x = self.propose()
        trial = evaluate(self.ctx.objective, merge(self.subgoal.fixed_values, x),
                         fidelity=self.fidelity, penalty=self.history.penalty())
        self.ctx.charge(trial)
        self._observe(trial)
        if self.history.n_ok >= self.n_init:
            self._refit()
        return [trial]
