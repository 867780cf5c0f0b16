import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockopt.block import BudgetExhausted, NoTrialsError, RunContext
from blockopt.forest import RandomForest
from blockopt.joint import JointBlock, expected_improvement
from blockopt.objective import ObjectiveSpec
from blockopt.space import Categorical, Continuous, SearchSpace, SpaceError, Subgoal, Variable, substitute

from oracles import ei_by_quadrature, rescore_ei


def test_ei_known_values():
    # mu == best: sigma * phi(0)
    assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(1 / np.sqrt(2 * np.pi))
    assert expected_improvement(2.0, 0.0, 1.0) == 0.0
    assert expected_improvement(0.0, 0.0, 1.0) == 1.0
    with pytest.raises(ValueError):
        expected_improvement(0.0, -1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(-3, 3), sigma=st.floats(1e-4, 5), best=st.floats(-3, 3))
def test_ei_matches_quadrature(mu, sigma, best):
    assert expected_improvement(mu, sigma, best) == pytest.approx(ei_by_quadrature(mu, sigma, best), abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(mu=st.floats(-3, 3), s1=st.floats(0.01, 3), s2=st.floats(0.01, 3), best=st.floats(-3, 3))
def test_ei_monotone_in_sigma(mu, s1, s2, best):
    lo, hi = sorted((s1, s2))
    assert expected_improvement(mu, hi, best) >= expected_improvement(mu, lo, best) - 1e-12


def test_forest_fits_a_step_and_reports_spread():
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (200, 2))
    y = (X[:, 0] > 0.5).astype(float)
    f = RandomForest().fit(X, y, seed=1)
    mu, var = f.predict(np.array([[0.1, 0.5], [0.9, 0.5]]))
    assert mu[0] < 0.2 and mu[1] > 0.8
    assert np.all(var >= 0)
    assert f.predict_trees(X[:3]).shape == (25, 3)


def test_forest_is_seed_deterministic():
    rng = np.random.default_rng(3)
    X, y = rng.uniform(size=(50, 3)), rng.normal(size=50)
    a = RandomForest().fit(X, y, seed=7).predict(X)
    b = RandomForest().fit(X, y, seed=7).predict(X)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_forest_untrained_raises():
    with pytest.raises(RuntimeError):
        RandomForest().predict(np.zeros((1, 1)))


def quad_ctx(budget=100):
    space = SearchSpace((Variable("x", Continuous(-2.0, 2.0)),))
    return RunContext(ObjectiveSpec.from_function(space, lambda a: (a["x"] - 0.3) ** 2), budget)


def test_initial_design_then_model_based():
    ctx = quad_ctx()
    b = JointBlock(ctx, ctx.space, seed=0)
    for _ in range(3):
        b.do_next()
        assert b.last_pool is None
    b.do_next()
    assert b.last_pool is not None and b.surrogate_fits >= 1
    assert len(ctx.trials) == 4


def test_proposal_is_argmax_of_rescored_pool():
    ctx = quad_ctx()
    b = JointBlock(ctx, ctx.space, seed=5)
    for _ in range(20):
        b.do_next()
    x = b.propose()
    X, mu, var, _ = b.last_pool
    ei = rescore_ei(mu, var, b.history.best_so_far)
    i = int(np.argmax(ei))
    assert X[i, 0] == pytest.approx(x["x"])
    assert len(X) == 1024 + 10


def test_joint_block_makes_progress_on_quadratic():
    ctx = quad_ctx()
    b = JointBlock(ctx, ctx.space, seed=1)
    for _ in range(30):
        b.do_next()
    assert b.get_current_best()[1] < 1e-3


def test_exhausted_budget_raises():
    ctx = quad_ctx(budget=2)
    b = JointBlock(ctx, ctx.space, seed=0)
    b.do_next()
    b.do_next()
    with pytest.raises(BudgetExhausted):
        b.do_next()


def test_no_best_before_first_trial():
    ctx = quad_ctx()
    with pytest.raises(NoTrialsError):
        JointBlock(ctx, ctx.space, seed=0).get_current_best()


def test_subgoal_constants_reach_the_objective():
    space = SearchSpace((Variable("c", Categorical(("a", "b"))), Variable("x", Continuous(0.0, 1.0))))
    seen = []
    ctx = RunContext(ObjectiveSpec.from_function(space, lambda a: seen.append(a["c"]) or a["x"]))
    g = Subgoal({"c": "b"})
    b = JointBlock(ctx, substitute(space, g), g, seed=0)
    for _ in range(5):
        b.do_next()
    assert set(seen) == {"b"}


def test_set_var_rejects_free_variable_and_repins():
    space = SearchSpace((Variable("c", Categorical(("a", "b"))), Variable("x", Continuous(0.0, 1.0))))
    seen = []
    ctx = RunContext(ObjectiveSpec.from_function(space, lambda a: seen.append(a["c"]) or a["x"]))
    g = Subgoal({"c": "a"})
    b = JointBlock(ctx, substitute(space, g), g, seed=0)
    with pytest.raises(SpaceError):
        b.set_var({"x": 0.5})
    b.do_next()
    b.set_var({"c": "b"})
    b.do_next()
    assert seen == ["a", "b"]


def test_block_must_cover_space():
    ctx = quad_ctx()
    two = SearchSpace((Variable("x", Continuous(-2.0, 2.0)), Variable("y", Continuous(0.0, 1.0))))
    with pytest.raises(SpaceError):
        JointBlock(RunContext(ObjectiveSpec.from_function(two, lambda a: 0.0)), ctx.space, seed=0)
    with pytest.raises(SpaceError):
        JointBlock(ctx, SearchSpace(()), seed=0)
