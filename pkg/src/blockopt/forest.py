"""Randomised regression forest used as the BO surrogate.

Trees are grown extremely-randomised style: at each node every feature gets
one uniform random threshold between its node-local min and max, and the
feature with the best variance reduction wins. No bootstrapping. Predictions
report the mean and the variance across trees.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _grow(X, y, n_trees, min_samples_split, seed, feature, threshold, left, right, value):
    np.random.seed(seed)
    n, d = X.shape
    idx = np.empty(n, np.int64)
    st_node = np.empty(2 * n + 1, np.int64)
    st_lo = np.empty(2 * n + 1, np.int64)
    st_hi = np.empty(2 * n + 1, np.int64)
    for t in range(n_trees):
        for i in range(n):
            idx[i] = i
        n_nodes = 1
        top = 0
        st_node[0] = 0
        st_lo[0] = 0
        st_hi[0] = n
        top = 1
        while top > 0:
            top -= 1
            node = st_node[top]
            lo = st_lo[top]
            hi = st_hi[top]
            m = hi - lo
            s = 0.0
            ymin = np.inf
            ymax = -np.inf
            for k in range(lo, hi):
                v = y[idx[k]]
                s += v
                if v < ymin:
                    ymin = v
                if v > ymax:
                    ymax = v
            value[t, node] = s / m
            feature[t, node] = -1
            if m < min_samples_split or ymin == ymax:
                continue
            best_score = -np.inf
            best_f = -1
            best_thr = 0.0
            for f in range(d):
                xmin = np.inf
                xmax = -np.inf
                for k in range(lo, hi):
                    x = X[idx[k], f]
                    if x < xmin:
                        xmin = x
                    if x > xmax:
                        xmax = x
                if not xmax > xmin:
                    continue
                thr = xmin + np.random.random() * (xmax - xmin)
                if thr >= xmax:
                    thr = xmin
                sl = 0.0
                nl = 0
                for k in range(lo, hi):
                    if X[idx[k], f] <= thr:
                        sl += y[idx[k]]
                        nl += 1
                sr = s - sl
                nr = m - nl
                score = sl * sl / nl + sr * sr / nr
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_thr = thr
            if best_f < 0:
                continue
            # partition idx[lo:hi] so that left samples come first
            i = lo
            j = hi - 1
            while i <= j:
                if X[idx[i], best_f] <= best_thr:
                    i += 1
                else:
                    tmp = idx[i]
                    idx[i] = idx[j]
                    idx[j] = tmp
                    j -= 1
            l_node = n_nodes
            r_node = n_nodes + 1
            n_nodes += 2
            feature[t, node] = best_f
            threshold[t, node] = best_thr
            left[t, node] = l_node
            right[t, node] = r_node
            st_node[top] = r_node
            st_lo[top] = i
            st_hi[top] = hi
            top += 1
            st_node[top] = l_node
            st_lo[top] = lo
            st_hi[top] = i
            top += 1


@njit(cache=True)
def _predict(X, feature, threshold, left, right, value):
    n_trees = feature.shape[0]
    m = X.shape[0]
    out = np.empty((n_trees, m))
    for t in range(n_trees):
        for i in range(m):
            node = 0
            while feature[t, node] >= 0:
                if X[i, feature[t, node]] <= threshold[t, node]:
                    node = left[t, node]
                else:
                    node = right[t, node]
            out[t, i] = value[t, node]
    return out


class RandomForest:
    def __init__(self, num_trees: int = 25, min_samples_split: int = 3):
        if num_trees < 1 or min_samples_split < 2:
            raise ValueError("need num_trees >= 1 and min_samples_split >= 2")
        self.num_trees = num_trees
        self.min_samples_split = min_samples_split
        self._trees = None

    @property
    def trained(self) -> bool:
        return self._trees is not None

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "RandomForest":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
            raise ValueError("X must be (n, d) with n == len(y) > 0")
        size = 2 * len(y)
        feature = np.full((self.num_trees, size), -1, np.int64)
        threshold = np.zeros((self.num_trees, size))
        left = np.zeros((self.num_trees, size), np.int64)
        right = np.zeros((self.num_trees, size), np.int64)
        value = np.zeros((self.num_trees, size))
        _grow(X, y, self.num_trees, self.min_samples_split, int(seed), feature, threshold, left, right, value)
        self._trees = (feature, threshold, left, right, value)
        return self

    def predict_trees(self, X: np.ndarray) -> np.ndarray:
        if self._trees is None:
            raise RuntimeError("surrogate has not been trained")
        return _predict(np.ascontiguousarray(X, dtype=np.float64), *self._trees)

    def predict(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Mean and variance of the per-tree predictions."""
        per_tree = self.predict_trees(X)
        return per_tree.mean(axis=0), per_tree.var(axis=0)
