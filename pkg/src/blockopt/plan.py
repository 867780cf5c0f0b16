"""Execution plans: trees of blocks, their JSON form, and the top-level executor."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .bandit import AlternatingBlock, ConditioningBlock
from .block import Block, BudgetExhausted, NoTrialsError, RunContext
from .joint import JointBlock
from .objective import BUDGET_MODES, ObjectiveSpec, Trial
from .space import SearchSpace, Subgoal


class PlanError(ValueError):
    pass


@dataclass
class JointNode:
    vars: list


@dataclass
class ConditioningNode:
    var: str
    child: object = None
    children: dict | None = None
    cutpoints: list | None = None


@dataclass
class AlternatingNode:
    y: list
    z: list
    child_y: object
    child_z: object


PlanNode = JointNode | ConditioningNode | AlternatingNode


@dataclass
class Params:
    L: int = 5
    n_init: int = 3
    candidate_pool: int = 1024
    w: int = 10
    beta: float = 1.0
    seed: int = 0
    budget: float = 100
    budget_mode: str = "count"

    def __post_init__(self):
        if self.budget_mode not in BUDGET_MODES:
            raise PlanError(f"budget_mode must be one of {BUDGET_MODES}")
        if self.L < 1 or self.n_init < 1 or self.candidate_pool < 1 or self.w < 1:
            raise PlanError("L, n_init, candidate_pool and w must be >= 1")
        if self.budget < 0:
            raise PlanError("budget must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise PlanError(f"unknown params {sorted(unknown)}")
        return cls(**d)


@dataclass
class PlanConfig:
    space: SearchSpace
    plan: PlanNode
    params: Params = field(default_factory=Params)

    def to_dict(self) -> dict:
        return {"space": self.space.to_list(), "plan": node_to_dict(self.plan), "params": asdict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "PlanConfig":
        missing = {"space", "plan"} - set(d)
        if missing:
            raise PlanError(f"config lacks {sorted(missing)}")
        return cls(SearchSpace.from_list(d["space"]), node_from_dict(d["plan"]), Params.from_dict(d.get("params", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def load_config(path) -> PlanConfig:
    return PlanConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(cfg: PlanConfig, path) -> None:
    Path(path).write_text(cfg.dumps() + "\n")


def node_to_dict(node: PlanNode) -> dict:
    if isinstance(node, JointNode):
        return {"type": "joint", "vars": list(node.vars)}
    if isinstance(node, ConditioningNode):
        d = {"type": "conditioning", "var": node.var}
        if node.cutpoints is not None:
            d["cutpoints"] = list(node.cutpoints)
        if node.children is not None:
            d["children"] = {k: node_to_dict(v) for k, v in node.children.items()}
        else:
            d["child"] = node_to_dict(node.child)
        return d
    if isinstance(node, AlternatingNode):
        return {"type": "alternating", "y": list(node.y), "z": list(node.z),
                "children": [node_to_dict(node.child_y), node_to_dict(node.child_z)]}
    raise PlanError(f"unknown node {node!r}")


def node_from_dict(d: dict) -> PlanNode:
    kind = d.get("type")
    if kind == "joint":
        return JointNode(list(d["vars"]))
    if kind == "conditioning":
        has_one, has_many = "child" in d, "children" in d
        if has_one == has_many:
            raise PlanError("conditioning node needs exactly one of 'child' or 'children'")
        return ConditioningNode(
            d["var"],
            child=node_from_dict(d["child"]) if has_one else None,
            children={k: node_from_dict(v) for k, v in d["children"].items()} if has_many else None,
            cutpoints=list(d["cutpoints"]) if "cutpoints" in d else None,
        )
    if kind == "alternating":
        kids = d.get("children")
        if not isinstance(kids, list) or len(kids) != 2:
            raise PlanError("alternating node needs two children")
        return AlternatingNode(list(d["y"]), list(d["z"]), node_from_dict(kids[0]), node_from_dict(kids[1]))
    raise PlanError(f"unknown node type {kind!r}")


def validate_plan(node: PlanNode, space: SearchSpace, free: Sequence[str] | None = None) -> None:
    """Check that every subtree claims exactly the free variables handed to it."""
    free = set(space.names if free is None else free)
    for n in free:
        if n not in space:
            raise PlanError(f"unknown variable {n!r}")
    if isinstance(node, JointNode):
        claimed = set(node.vars)
        if len(claimed) != len(node.vars):
            raise PlanError("joint node lists a variable twice")
        _check_cover(claimed, free)
        if not claimed:
            raise PlanError("joint node over no variables")
    elif isinstance(node, ConditioningNode):
        if node.var not in free:
            raise PlanError(f"conditioning variable {node.var!r} is not free here")
        dom = space[node.var].domain
        if dom.kind == "categorical":
            if node.cutpoints is not None:
                raise PlanError("cutpoints on a categorical variable")
            rest = free - {node.var}
            arms = list(dom.labels)
        else:
            if node.cutpoints is None:
                raise PlanError(f"numeric conditioning on {node.var!r} needs cutpoints")
            if node.children is not None:
                raise PlanError("numeric conditioning takes a single 'child' template")
            rest = free
            arms = None
        if node.children is not None:
            if set(node.children) != set(arms):
                raise PlanError(f"conditioning children {sorted(node.children)} != values {sorted(arms)}")
            for sub in node.children.values():
                validate_plan(sub, space, rest)
        else:
            if node.child is None:
                raise PlanError("conditioning node without a child")
            validate_plan(node.child, space, rest)
    elif isinstance(node, AlternatingNode):
        y, z = set(node.y), set(node.z)
        if not y or not z:
            raise PlanError("alternating sides must be nonempty")
        if y & z:
            raise PlanError(f"alternating sides overlap on {sorted(y & z)}")
        _check_cover(y | z, free)
        validate_plan(node.child_y, space, y)
        validate_plan(node.child_z, space, z)
    else:
        raise PlanError(f"unknown node kind {type(node).__name__}")


def _check_cover(claimed: set, free: set) -> None:
    if free - claimed:
        raise PlanError(f"uncovered variable(s) {sorted(free - claimed)}")
    if claimed - free:
        raise PlanError(f"variable(s) {sorted(claimed - free)} are not free here")


def _instantiate(node: PlanNode, ctx: RunContext, space: SearchSpace, subgoal: Subgoal,
                 params: Params, seeds: np.random.SeedSequence, parent: Block | None) -> Block:
    common = dict(window=params.w, beta=params.beta, parent=parent)
    if isinstance(node, JointNode):
        return JointBlock(ctx, space, subgoal, n_init=params.n_init, candidate_pool=params.candidate_pool,
                          seed=seeds.spawn(1)[0], **common)
    if isinstance(node, ConditioningNode):
        def make_child(arm, sub_space, sub_goal, owner):
            tmpl = node.children[arm] if node.children is not None else node.child
            return _instantiate(tmpl, ctx, sub_space, sub_goal, params, seeds, owner)
        return ConditioningBlock(ctx, space, subgoal, node.var, make_child, L=params.L,
                                 cutpoints=node.cutpoints, **common)
    if isinstance(node, AlternatingNode):
        def make_side(side, sub_space, sub_goal, owner):
            return _instantiate(node.child_y if side == "y" else node.child_z, ctx, sub_space, sub_goal,
                                params, seeds, owner)
        return AlternatingBlock(ctx, space, subgoal, node.y, node.z, make_side, L=params.L, **common)
    raise PlanError(f"unknown node kind {type(node).__name__}")


@dataclass(frozen=True)
class Checkpoint:
    spent: float
    best: float | None
    assignment: dict | None

    def to_json(self) -> str:
        return json.dumps({"spent": self.spent, "best": self.best, "assignment": self.assignment})


class Executor:
    """Drives the root block and tracks the incumbent and the any-time trajectory."""

    def __init__(self, root: Block, ctx: RunContext):
        self.root = root
        self.ctx = ctx
        self.trajectory: list[Checkpoint] = []
        self.incumbent: tuple[dict, float] | None = None
        self._best: Trial | None = None
        self.sinks: list[Callable[[Checkpoint], None]] = []
        ctx.listeners.append(self._on_trial)

    @property
    def budget_total(self) -> float:
        return self.ctx.budget_total

    @property
    def budget_spent(self) -> float:
        return self.ctx.spent

    @property
    def trials(self) -> list[Trial]:
        return self.ctx.trials

    def _on_trial(self, trial: Trial) -> None:
        if trial.ok and (self._best is None or trial.value < self._best.value):
            self._best = trial
        cp = Checkpoint(
            self.ctx.spent,
            None if self._best is None else self._best.value,
            None if self._best is None else {n: self._best.assignment[n] for n in self.ctx.space.names},
        )
        self.trajectory.append(cp)
        for sink in self.sinks:
            sink(cp)

    def step(self) -> list[Trial]:
        if self.ctx.exhausted():
            raise BudgetExhausted
        start = len(self.ctx.trials)
        try:
            self.root.do_next()
        except BudgetExhausted:
            pass
        try:
            self.incumbent = self.root.get_current_best()
        except NoTrialsError:
            pass
        return self.ctx.trials[start:]

    def best(self) -> tuple[dict, float]:
        if self.incumbent is None:
            raise NoTrialsError("no ok trial has been produced")
        return self.incumbent

    def run(self) -> tuple[tuple[dict, float] | None, list[Checkpoint]]:
        while not self.ctx.exhausted():
            if not self.step():
                break
        return self.incumbent, self.trajectory


def build(cfg: PlanConfig, objective: ObjectiveSpec) -> Executor:
    if [v.name for v in objective.space] != cfg.space.names:
        raise PlanError("objective space does not match the plan's space")
    validate_plan(cfg.plan, cfg.space)
    if objective.budget_mode != cfg.params.budget_mode:
        objective = replace(objective, budget_mode=cfg.params.budget_mode)
    ctx = RunContext(objective, budget=cfg.params.budget)
    seeds = np.random.SeedSequence(cfg.params.seed)
    root = _instantiate(cfg.plan, ctx, cfg.space, Subgoal(), cfg.params, seeds, None)
    return Executor(root, ctx)


@dataclass(frozen=True)
class Annotations:
    algorithm_var: str
    feature_vars: tuple
    hp_vars: tuple

    @classmethod
    def from_dict(cls, d: dict) -> "Annotations":
        missing = {"algorithm_var", "feature_vars", "hp_vars"} - set(d)
        if missing:
            raise PlanError(f"missing annotation(s) {sorted(missing)}")
        return cls(d["algorithm_var"], tuple(d["feature_vars"]), tuple(d["hp_vars"]))

    def to_dict(self) -> dict:
        return {"algorithm_var": self.algorithm_var, "feature_vars": list(self.feature_vars), "hp_vars": list(self.hp_vars)}


COARSE_PLAN_NAMES = ("joint", "cond_joint", "cond_alt", "alt_fe_hpalg", "alt_fealg_hp")


def enumerate_coarse_plans(space: SearchSpace, ann: Annotations, params: Params | None = None) -> list[PlanConfig]:
    """The five coarse decompositions of an algorithm / feature / hyper-parameter space.

    Order: single joint; conditioning on the algorithm with joint children;
    conditioning on the algorithm with alternating(features, hyper-parameters)
    children; alternating(features, hyper-parameters + algorithm);
    alternating(features + algorithm, hyper-parameters).
    """
    params = params or Params()
    alg = ann.algorithm_var
    fe = [n for n in space.names if n in set(ann.feature_vars)]
    hp = [n for n in space.names if n in set(ann.hp_vars)]
    if alg not in space or space[alg].domain.kind != "categorical":
        raise PlanError(f"algorithm variable {alg!r} must be a categorical variable of the space")
    groups = [{alg}, set(ann.feature_vars), set(ann.hp_vars)]
    sizes = 1 + len(ann.feature_vars) + len(ann.hp_vars)
    union = set().union(*groups)
    if union != set(space.names) or sizes != len(space) or not fe or not hp:
        raise PlanError("annotations must partition the space into algorithm, nonempty feature and hyper-parameter groups")

    def ordered(names):
        keep = set(names)
        return [n for n in space.names if n in keep]

    plans = [
        JointNode(list(space.names)),
        ConditioningNode(alg, child=JointNode(ordered(fe + hp))),
        ConditioningNode(alg, child=AlternatingNode(fe, hp, JointNode(fe), JointNode(hp))),
        AlternatingNode(fe, ordered(hp + [alg]), JointNode(fe), JointNode(ordered(hp + [alg]))),
        AlternatingNode(ordered(fe + [alg]), hp, JointNode(ordered(fe + [alg])), JointNode(hp)),
    ]
    out = []
    for p in plans:
        validate_plan(p, space)
        out.append(PlanConfig(space, p, Params(**asdict(params))))
    return out

