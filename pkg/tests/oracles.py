"""Independent reference implementations used by the tests."""

import math

import numpy as np
from scipy import integrate


def ei_by_quadrature(mu: float, sigma: float, best: float) -> float:
    """E[max(best - Y, 0)] for Y ~ N(mu, sigma^2), integrated in standard-normal units."""
    g = (best - mu) / sigma
    if g < -40:
        return 0.0

    def f(z):
        return (best - mu - sigma * z) * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)

    val, _ = integrate.quad(f, -40.0, min(g, 40.0), epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def dominated_pairwise(bounds: dict) -> set:
    out = set()
    for i, bi in bounds.items():
        for j, bj in bounds.items():
            if i != j and bi.upper < bj.lower:
                out.add(i)
    return out


def mean_incumbent_improvement(values) -> float:
    best = None
    diffs = []
    for v in values:
        if best is None:
            best = v
            continue
        nb = min(best, v)
        diffs.append(best - nb)
        best = nb
    return sum(diffs) / len(diffs) if diffs else 0.0


def rescore_ei(mu: np.ndarray, var: np.ndarray, best: float) -> np.ndarray:
    from scipy.stats import norm

    sd = np.sqrt(var)
    out = np.where(sd > 0, 0.0, np.maximum(best - mu, 0.0))
    pos = sd > 0
    z = (best - mu[pos]) / sd[pos]
    out[pos] = (best - mu[pos]) * norm.cdf(z) + sd[pos] * norm.pdf(z)
    return np.maximum(out, 0.0)
