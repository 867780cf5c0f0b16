import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from blockopt.estimators import EUBound, eliminate_dominated, get_eu_estimate, get_eui_estimate, incumbent_improvements
from blockopt.objective import FAILED, CostModel, History, Trial

from oracles import dominated_pairwise, mean_incumbent_improvement


def history(values, statuses=None):
    h = History()
    for i, v in enumerate(values):
        h.record(Trial({}, v, 1.0, status=(statuses[i] if statuses else "ok")))
    return h


def cost(c=1.0):
    return CostModel().update(c)


def test_bound_order_enforced():
    with pytest.raises(ValueError):
        EUBound(1.0, 0.0)


def test_eu_worked_example():
    # improvements 5 and 2 (then 0): mean 7/3, population sd of [5, 2, 0]
    h = history([10.0, 5.0, 3.0, 4.0])
    imp = np.array([5.0, 2.0, 0.0])
    b = get_eu_estimate(h, cost(2.0), budget=9.0, window=10, beta=1.0)
    assert b.lower == -3.0
    assert b.upper == pytest.approx(-3.0 + 4 * (imp.mean() + imp.std()))


def test_eu_window_keeps_only_recent_improvements():
    h = history([100.0, 1.0] + [1.0] * 10)
    b = get_eu_estimate(h, cost(), budget=50, window=10)
    assert b.upper == b.lower == -1.0


def test_eu_degenerate_cases():
    with pytest.raises(ValueError):
        get_eu_estimate(History(), cost(), 10)
    b = get_eu_estimate(history([2.0]), cost(), 10)
    assert b.lower == b.upper == -2.0
    b = get_eu_estimate(history([3.0, 2.0]), cost(), budget=0)
    assert b.lower == b.upper == -2.0
    # unlimited budget gives an unbounded optimistic estimate
    assert math.isinf(get_eu_estimate(history([3.0, 2.0]), cost(), math.inf).upper)


def test_eu_ignores_failed_trials():
    h = history([5.0, -100.0, 4.0], [ "ok", FAILED, "ok"])
    assert get_eu_estimate(h, cost(), 1).lower == -4.0


def test_eui_examples():
    assert get_eui_estimate(history([4.0])) == 0.0
    assert get_eui_estimate(history([4.0, 2.0, 3.0, 1.0])) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        get_eui_estimate(History())


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=40))
def test_eui_matches_bruteforce_and_is_nonnegative(vals):
    got = get_eui_estimate(history(vals))
    assert got >= 0
    assert got == pytest.approx(mean_incumbent_improvement(vals), abs=1e-12, rel=1e-12)


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=30))
def test_improvements_are_nonnegative(vals):
    assert np.all(incumbent_improvements(vals) >= 0)


bounds_maps = st.dictionaries(
    st.integers(0, 20),
    st.tuples(st.floats(-10, 10, allow_nan=False), st.floats(0, 10, allow_nan=False)).map(
        lambda t: EUBound(t[0], t[0] + t[1])),
    min_size=1, max_size=8,
)


@given(bounds_maps)
def test_elimination_matches_pairwise_rule(bounds):
    out = eliminate_dominated(bounds)
    assert out == dominated_pairwise(bounds)
    top = max(bounds, key=lambda a: bounds[a].upper)
    assert top not in out
    assert len(out) < len(bounds)


def test_elimination_tie_keeps_both():
    assert eliminate_dominated({"a": EUBound(0, 1), "b": EUBound(1, 2)}) == set()
    assert eliminate_dominated({"a": EUBound(0, 0.99), "b": EUBound(1, 2)}) == {"a"}
    assert eliminate_dominated({}) == set()
