import itertools

import numpy as np
import pytest

from blockopt.benchmarks import MAX_GRID, REGISTRY, branin, grid_oracle, grid_size, hartmann6, load_benchmark, random_search

BRANIN_MIN = 0.397887  # minimum of the standard Branin function


def test_registry_names_and_unknown():
    assert set(REGISTRY) == {"branin", "hartmann6", "separable20", "cash3"}
    with pytest.raises(KeyError):
        load_benchmark("nope")


def test_branin_box():
    b = load_benchmark("branin")
    assert [(v.name, v.domain.lo, v.domain.hi) for v in b.space] == [("x1", -5.0, 10.0), ("x2", 0.0, 15.0)]


def test_branin_known_minimisers():
    for x in [(-np.pi, 12.275), (np.pi, 2.275), (9.42478, 2.475)]:
        assert branin(*x) == pytest.approx(BRANIN_MIN, abs=1e-5)


def test_hartmann6_known_minimum():
    x = [0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]
    assert hartmann6(x) == pytest.approx(-3.32237, abs=1e-4)


def test_branin_grid_oracle():
    _, v = grid_oracle(load_benchmark("branin"), 1000)
    assert v == pytest.approx(BRANIN_MIN, abs=1e-3)


def test_cash3_oracle_prefers_a0():
    a, v = grid_oracle(load_benchmark("cash3"), 500)
    assert a["arm"] == "a0"
    assert v == pytest.approx(BRANIN_MIN, abs=1e-3)


def test_cash3_conditional_oracle_matches_full_lattice():
    b = load_benchmark("cash3")
    fast = grid_oracle(b, 7)
    # the plain lattice over all seven variables, enumerated directly
    axes = [v.domain.grid(7) for v in b.space]
    best = min(
        (b.evaluate(dict(zip(b.space.names, p))), p) for p in itertools.product(*axes)
    )
    assert fast[1] == pytest.approx(best[0])


def test_separable20_oracle_hits_zero():
    a, v = grid_oracle(load_benchmark("separable20"), 11)
    assert v == 0.0
    assert all(a[f"y{i}"] == 0.0 and a[f"z{i}"] == 1.0 for i in range(10))


def test_oversized_grid_rejected():
    b = load_benchmark("hartmann6")
    assert grid_size(b, 30) > MAX_GRID
    with pytest.raises(ValueError):
        grid_oracle(b, 30)


def test_fn_accepts_arrays_and_scalars():
    b = load_benchmark("cash3")
    a = {n: np.array([1.0, 2.0]) for n in b.space.names if n != "arm"}
    a["arm"] = np.array(["a0", "a2"])
    out = b.fn(a)
    assert out[1] - out[0] == pytest.approx(10 + branin(2.0, 2.0) - branin(1.0, 1.0))
    assert b.evaluate({**{k: float(v[0]) for k, v in a.items() if k != "arm"}, "arm": "a1"}) == pytest.approx(
        branin(1.0, 1.0) + 5)


def test_random_search_curve_is_monotone():
    c = random_search(load_benchmark("branin"), 50, seed=0)
    assert len(c) == 50 and all(b <= a for a, b in zip(c, c[1:]))
