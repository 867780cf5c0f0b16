import json

import pytest

from blockopt.benchmarks import load_benchmark
from blockopt.plan import (
    COARSE_PLAN_NAMES,
    AlternatingNode,
    Annotations,
    ConditioningNode,
    JointNode,
    Params,
    PlanConfig,
    PlanError,
    build,
    enumerate_coarse_plans,
    load_config,
    save_config,
    validate_plan,
)
from blockopt.space import Continuous, SearchSpace, Variable

CASH = load_benchmark("cash3")
SEP = load_benchmark("separable20")


def cond_alt_plan():
    fe = list(CASH.annotations.feature_vars)
    hp = list(CASH.annotations.hp_vars)
    return ConditioningNode("arm", child=AlternatingNode(fe, hp, JointNode(fe), JointNode(hp)))


def test_config_json_round_trip(tmp_path):
    cfg = PlanConfig(CASH.space, cond_alt_plan(), Params(seed=4, budget=50))
    save_config(cfg, tmp_path / "p.json")
    back = load_config(tmp_path / "p.json")
    assert back.to_dict() == cfg.to_dict() and back.digest() == cfg.digest()
    doc = json.loads((tmp_path / "p.json").read_text())
    assert set(doc) == {"space", "plan", "params"}
    assert doc["plan"]["type"] == "conditioning"
    assert doc["plan"]["child"]["type"] == "alternating"


def test_digest_changes_with_params():
    a = PlanConfig(CASH.space, cond_alt_plan(), Params(seed=1))
    b = PlanConfig(CASH.space, cond_alt_plan(), Params(seed=2))
    assert a.digest() != b.digest()


def test_params_validation():
    with pytest.raises(ValueError):
        Params(L=0)
    with pytest.raises(ValueError):
        Params(budget_mode="minutes")


def test_uncovered_or_double_claimed_variables_rejected():
    names = SEP.space.names
    with pytest.raises(PlanError):
        validate_plan(JointNode(names[:-1]), SEP.space)
    with pytest.raises(PlanError):
        validate_plan(AlternatingNode(names[:11], names[10:], JointNode(names[:11]), JointNode(names[10:])), SEP.space)
    with pytest.raises(PlanError):
        validate_plan(ConditioningNode("y0", child=JointNode(names[1:])), SEP.space)


def test_per_label_children():
    rest = [n for n in CASH.space.names if n != "arm"]
    node = ConditioningNode("arm", children={a: JointNode(rest) for a in ("a0", "a1", "a2")})
    validate_plan(node, CASH.space)
    with pytest.raises(PlanError):
        validate_plan(ConditioningNode("arm", children={"a0": JointNode(rest)}), CASH.space)


def test_build_is_lazy_and_runs_to_budget():
    ex = build(PlanConfig(CASH.space, cond_alt_plan(), Params(budget=40)), CASH.objective())
    assert ex.trials == []
    best, traj = ex.run()
    assert len(ex.trials) == 40 == len(traj)
    assert best[1] == min(t.value for t in ex.trials)
    bests = [cp.best for cp in traj]
    assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))
    assert [cp.spent for cp in traj] == list(range(1, 41))


def test_budget_truncates_a_conditioning_pass():
    rest = [n for n in CASH.space.names if n != "arm"]
    ex = build(PlanConfig(CASH.space, ConditioningNode("arm", child=JointNode(rest)), Params(budget=7)), CASH.objective())
    ex.run()
    assert len(ex.trials) == 7


def test_space_mismatch_rejected():
    other = SearchSpace((Variable("q", Continuous(0.0, 1.0)),))
    with pytest.raises(PlanError):
        build(PlanConfig(other, JointNode(["q"]), Params()), CASH.objective())


def test_five_coarse_plans():
    cfgs = enumerate_coarse_plans(CASH.space, CASH.annotations, Params(budget=10))
    assert len(cfgs) == len(COARSE_PLAN_NAMES) == 5
    kinds = [type(c.plan).__name__ for c in cfgs]
    assert kinds == ["JointNode", "ConditioningNode", "ConditioningNode", "AlternatingNode", "AlternatingNode"]
    assert cfgs[2].plan == cond_alt_plan()
    for c in cfgs:
        validate_plan(c.plan, CASH.space)
        assert c.params.budget == 10


def test_coarse_plans_need_a_partition():
    with pytest.raises(PlanError):
        enumerate_coarse_plans(CASH.space, Annotations("arm", ("a0_x1",), ("a0_x2",)))
    with pytest.raises(PlanError):
        enumerate_coarse_plans(SEP.space, Annotations("y0", tuple(SEP.space.names[1:10]), tuple(SEP.space.names[10:])))
