"""Synthetic benchmarks and the brute-force lattice oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping

import numpy as np

from .objective import ObjectiveSpec, evaluate
from .plan import Annotations
from .space import Categorical, Continuous, SearchSpace, Variable, sample_uniform

MAX_GRID = 10**8
CHUNK = 1 << 20


def branin(x1, x2):
    b = 5.1 / (4 * math.pi**2)
    c = 5 / math.pi
    t = 1 / (8 * math.pi)
    return (x2 - b * x1**2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


_H6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H6_A = np.array([
    [10, 3, 17, 3.5, 1.7, 8],
    [0.05, 10, 17, 0.1, 8, 14],
    [3, 3.5, 1.7, 10, 17, 8],
    [17, 8, 0.05, 10, 0.1, 14],
])
_H6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])


def hartmann6(x):
    """``x`` has shape (..., 6)."""
    x = np.asarray(x, dtype=float)
    inner = np.sum(_H6_A * (x[..., None, :] - _H6_P) ** 2, axis=-1)
    return -np.sum(_H6_ALPHA * np.exp(-inner), axis=-1)


@dataclass(frozen=True)
class Benchmark:
    """A pure test function over a search space.

    ``fn`` takes a mapping of variable name to value (scalars or equal-length
    arrays) and returns the loss. ``additive`` and ``conditional`` describe
    structure the lattice oracle may use to avoid enumerating irrelevant
    products; both leave the lattice argmin unchanged.
    """

    name: str
    space: SearchSpace
    fn: Callable[[Mapping], np.ndarray]
    annotations: Annotations | None = None
    known_best: float | None = None
    # ((names, term_fn), ...) with fn == sum of terms
    additive: tuple | None = None
    # (categorical var, {label: names the loss depends on under that label})
    conditional: tuple | None = None

    def evaluate(self, assignment: Mapping) -> float:
        return float(self.fn(assignment))

    def objective(self, **kw) -> ObjectiveSpec:
        return ObjectiveSpec.from_function(self.space, self.evaluate, **kw)

    def with_known_best(self, resolution=200) -> "Benchmark":
        return replace(self, known_best=grid_oracle(self, resolution)[1])


def _branin_bench() -> Benchmark:
    space = SearchSpace((Variable("x1", Continuous(-5.0, 10.0)), Variable("x2", Continuous(0.0, 15.0))))
    return Benchmark("branin", space, lambda a: branin(a["x1"], a["x2"]))


def _hartmann6_bench() -> Benchmark:
    names = [f"x{i}" for i in range(1, 7)]
    space = SearchSpace(tuple(Variable(n, Continuous(0.0, 1.0)) for n in names))
    return Benchmark("hartmann6", space, lambda a: hartmann6(np.stack(np.broadcast_arrays(*[np.asarray(a[n], float) for n in names]), axis=-1)))


def _separable20_bench() -> Benchmark:
    ys = [f"y{i}" for i in range(10)]
    zs = [f"z{i}" for i in range(10)]
    space = SearchSpace(tuple(Variable(n, Continuous(-5.0, 5.0)) for n in ys + zs))

    def fn(a):
        return sum(np.asarray(a[n], float) ** 2 for n in ys) + sum((np.asarray(a[n], float) - 1) ** 2 for n in zs)

    terms = tuple(((n,), (lambda a, n=n: np.asarray(a[n], float) ** 2)) for n in ys)
    terms += tuple(((n,), (lambda a, n=n: (np.asarray(a[n], float) - 1) ** 2)) for n in zs)
    return Benchmark("separable20", space, fn, additive=terms)


CASH3_OFFSETS = {"a0": 0.0, "a1": 5.0, "a2": 10.0}


def _cash3_bench() -> Benchmark:
    arms = list(CASH3_OFFSETS)
    variables = [Variable("arm", Categorical(tuple(arms)))]
    for arm in arms:
        variables += [Variable(f"{arm}_x1", Continuous(-5.0, 10.0)), Variable(f"{arm}_x2", Continuous(0.0, 15.0))]
    space = SearchSpace(tuple(variables))

    def fn(a):
        shape = np.broadcast_shapes(*(np.shape(a[v.name]) for v in variables))
        arm = np.broadcast_to(np.asarray(a["arm"]), shape)
        out = np.full(shape, np.nan)
        for label, off in CASH3_OFFSETS.items():
            sel = arm == label
            if np.any(sel):
                x1 = np.broadcast_to(np.asarray(a[f"{label}_x1"], float), arm.shape)
                x2 = np.broadcast_to(np.asarray(a[f"{label}_x2"], float), arm.shape)
                out = np.where(sel, branin(x1, x2) + off, out)
        return out

    ann = Annotations("arm", tuple(f"{a}_x1" for a in arms), tuple(f"{a}_x2" for a in arms))
    cond = ("arm", {a: (f"{a}_x1", f"{a}_x2") for a in arms})
    return Benchmark("cash3", space, fn, annotations=ann, conditional=cond)


REGISTRY = {
    "branin": _branin_bench,
    "hartmann6": _hartmann6_bench,
    "separable20": _separable20_bench,
    "cash3": _cash3_bench,
}


def load_benchmark(name: str) -> Benchmark:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(REGISTRY)}") from None


def _axes(space: SearchSpace, names, resolution) -> list[list]:
    res = resolution if isinstance(resolution, Mapping) else {n: resolution for n in names}
    return [space[n].domain.grid(int(res[n])) for n in names]


def _lattice_argmin(fn, names, axes, fixed: Mapping) -> tuple[dict, float]:
    shape = [len(ax) for ax in axes]
    total = math.prod(shape)
    arrays = [np.asarray(ax, dtype=object if isinstance(ax[0], str) else None) for ax in axes]
    best_i, best_v = -1, math.inf
    for start in range(0, total, CHUNK):
        flat = np.arange(start, min(start + CHUNK, total))
        idx = np.unravel_index(flat, shape)
        cols = dict(fixed)
        for n, arr, ix in zip(names, arrays, idx):
            cols[n] = arr[ix]
        vals = np.asarray(fn(cols), dtype=float)
        vals = np.broadcast_to(vals, flat.shape)
        j = int(np.argmin(vals))
        if vals[j] < best_v:
            best_i, best_v = start + j, float(vals[j])
    idx = np.unravel_index(best_i, shape)
    return {n: ax[int(i)] for n, ax, i in zip(names, axes, idx)}, best_v


def grid_size(b: Benchmark, resolution) -> int:
    space = b.space
    if b.additive is not None:
        covered = {n for names, _ in b.additive for n in names}
        return sum(math.prod(len(ax) for ax in _axes(space, names, resolution)) for names, _ in b.additive) + len(
            set(space.names) - covered)
    if b.conditional is not None:
        _, active = b.conditional
        return sum(math.prod(len(ax) for ax in _axes(space, names, resolution)) for names in active.values())
    return math.prod(len(ax) for ax in _axes(space, space.names, resolution))


def grid_oracle(b: Benchmark, resolution=100) -> tuple[dict, float]:
    """Exhaustive argmin of ``b`` over the lattice of per-dimension grids.

    Categorical axes take every label; numeric axes take ``resolution`` evenly
    spaced points (log-spaced for log domains). ``resolution`` is an int or a
    per-variable mapping. Ties go to the earliest lattice point.
    """
    space = b.space
    size = grid_size(b, resolution)
    if size > MAX_GRID:
        raise ValueError(f"grid of {size} points exceeds {MAX_GRID}")
    first = {n: ax[0] for n, ax in zip(space.names, _axes(space, space.names, resolution))}
    if b.additive is not None:
        best = dict(first)
        for names, term in b.additive:
            part, _ = _lattice_argmin(term, list(names), _axes(space, names, resolution), {})
            best.update(part)
    elif b.conditional is not None:
        cat, active = b.conditional
        best, best_v = None, math.inf
        for label in space[cat].domain.labels:
            names = list(active[label])
            fixed = {n: v for n, v in first.items() if n not in names}
            fixed[cat] = label
            part, v = _lattice_argmin(b.fn, names, _axes(space, names, resolution), fixed)
            if v < best_v:
                best, best_v = {**fixed, **part}, v
    else:
        best, _ = _lattice_argmin(b.fn, space.names, _axes(space, space.names, resolution), {})
    best = {n: best[n] for n in space.names}
    return best, b.evaluate(best)


def random_search(b: Benchmark, n: int, seed: int) -> list[float]:
    """Best-so-far curve of uniform random search."""
    obj = b.objective()
    rng = np.random.default_rng(seed)
    best, curve = math.inf, []
    for a in sample_uniform(b.space, rng, n):
        t = evaluate(obj, a)
        if t.ok:
            best = min(best, t.value)
        curve.append(best)
    return curve
