"""Decomposing blocks: conditioning (bandit over arms with elimination) and alternating."""

from __future__ import annotations

from typing import Callable, Sequence

from .block import Block, NoTrialsError, RunContext
from .estimators import eliminate_dominated
from .space import SearchSpace, SpaceError, Subgoal, split_numeric, substitute

ChildFactory = Callable[[object, SearchSpace, Subgoal, Block], Block]


class ConditioningBlock(Block):
    """One child per value of ``cond_var``; children are bandit arms.

    For a categorical variable each arm fixes ``cond_var = label``. For a
    numeric variable with ``cutpoints`` each arm keeps ``cond_var`` free but
    restricted to one piece of its range.
    """

    kind = "conditioning"

    def __init__(self, ctx: RunContext, space: SearchSpace, subgoal: Subgoal | None,
                 cond_var: str, make_child: ChildFactory, *, L: int = 5,
                 cutpoints: Sequence[float] | None = None, **kw):
        super().__init__(ctx, space, subgoal, **kw)
        if L < 1:
            raise ValueError("L must be >= 1")
        var = space[cond_var]
        self.cond_var = cond_var
        self.L = L
        self.cutpoints = list(cutpoints) if cutpoints is not None else None
        self.arms: dict = {}
        if var.domain.kind == "categorical":
            if self.cutpoints is not None:
                raise SpaceError("cutpoints only apply to numeric variables")
            for label in var.domain.labels:
                sub = Subgoal({cond_var: label})
                self.arms[label] = make_child(label, substitute(space, sub), self.subgoal.extend(sub.fixed_values), self)
        else:
            for i, dom in enumerate(split_numeric(var, self.cutpoints or [])):
                self.arms[i] = make_child(i, space.replace_domain(cond_var, dom), self.subgoal, self)
        self.active = list(self.arms)
        self.eliminated: list = []
        self.last_bounds: dict = {}

    @property
    def children(self):
        return list(self.arms.values())

    def do_next(self):
        self.do_next_calls += 1
        active = list(self.active)
        trials = []
        for _ in range(self.L):
            for arm in active:
                trials += self.arms[arm].do_next()
        # bounds are over-optimistic until every arm has a few observations
        if all(self.arms[a].history.n_ok >= 2 * self.L for a in active):
            self.last_bounds = {a: self.arms[a].get_eu() for a in active}
            dropped = eliminate_dominated(self.last_bounds)
            self.active = [a for a in active if a not in dropped]
            self.eliminated += [a for a in active if a in dropped]
        return trials

    def get_current_best(self):
        best = None
        for arm in self.arms:
            try:
                cand = self.arms[arm].get_current_best()
            except NoTrialsError:
                continue
            if best is None or cand[1] < best[1]:
                best = cand
        if best is None:
            raise NoTrialsError("no arm has an ok trial")
        return best

    def best_arm(self):
        a, _ = self.get_current_best()
        if self.cutpoints is None:
            return a[self.cond_var]
        for arm, child in self.arms.items():
            if child.space[self.cond_var].domain.contains(a[self.cond_var]):
                return arm
        raise AssertionError("best assignment outside every arm")


class AlternatingBlock(Block):
    """Splits the free variables into ``y`` and ``z`` and steps one side at a time.

    Child ``B1`` optimises ``y`` with ``z`` pinned, ``B2`` optimises ``z`` with
    ``y`` pinned. The first ``do_next`` runs the round-robin warm-up (L rounds,
    cross-feeding the current bests); afterwards each call steps the side with
    the larger expected utility improvement.
    """

    kind = "alternating"

    def __init__(self, ctx: RunContext, space: SearchSpace, subgoal: Subgoal | None,
                 y_vars: Sequence[str], z_vars: Sequence[str], make_child: ChildFactory,
                 *, L: int = 5, **kw):
        super().__init__(ctx, space, subgoal, **kw)
        y, z = set(y_vars), set(z_vars)
        if not y or not z:
            raise SpaceError("both sides of an alternating partition need variables")
        if y & z:
            raise SpaceError(f"partition sides overlap on {sorted(y & z)}")
        if y | z != set(space.names):
            missing = set(space.names) - (y | z)
            extra = (y | z) - set(space.names)
            raise SpaceError(f"partition does not match free variables (missing {sorted(missing)}, extra {sorted(extra)})")
        if L < 1:
            raise ValueError("L must be >= 1")
        self.L = L
        self.y_space = space.subset(y)
        self.z_space = space.subset(z)
        self.y0 = self.y_space.defaults()
        self.z0 = self.z_space.defaults()
        self.b1 = make_child("y", self.y_space, self.subgoal.extend(self.z0), self)
        self.b2 = make_child("z", self.z_space, self.subgoal.extend(self.y0), self)
        self.initialized = False
        self.choices: list[str] = []

    @property
    def children(self):
        return [self.b1, self.b2]

    def _pin_from(self, source: Block, target: Block, names) -> None:
        """set_var(target, names, best of source), then hand target that best trial."""
        best = source.history.best_trial()
        if best is None:
            return
        target.set_var({n: best.assignment[n] for n in names})
        # the source's best lies in the target's subproblem under the new pins,
        # so the target's incumbent never falls behind what was just pinned
        target.share(best)

    def initialize(self):
        trials = []
        for _ in range(self.L):
            t1 = self.b1.do_next()
            self.b2.observe_context(t1)
            self._pin_from(self.b1, self.b2, self.y_space.names)
            t2 = self.b2.do_next()
            self.b1.observe_context(t2)
            self._pin_from(self.b2, self.b1, self.z_space.names)
            trials += t1 + t2
        self.initialized = True
        return trials

    @staticmethod
    def _eui(child: Block) -> float:
        try:
            return child.get_eui()
        except ValueError:
            return 0.0

    def do_next(self):
        self.do_next_calls += 1
        if not self.initialized:
            return self.initialize()
        d1, d2 = self._eui(self.b1), self._eui(self.b2)
        if d1 >= d2:
            self.choices.append("y")
            self._pin_from(self.b2, self.b1, self.z_space.names)
            trials = self.b1.do_next()
            self.b2.observe_context(trials)
            # keep the idle side's pins and incumbent current; otherwise a side
            # whose EUI hit zero never sees the other side's progress
            self._pin_from(self.b1, self.b2, self.y_space.names)
        else:
            self.choices.append("z")
            self._pin_from(self.b1, self.b2, self.y_space.names)
            trials = self.b2.do_next()
            self.b1.observe_context(trials)
            self._pin_from(self.b2, self.b1, self.z_space.names)
        return trials

    def get_current_best(self):
        best = None
        for child in self.children:
            try:
                cand = child.get_current_best()
            except NoTrialsError:
                continue
            if best is None or cand[1] < best[1]:
                best = cand
        if best is None:
            raise NoTrialsError("neither side has an ok trial")
        return best
