"""Bagged CART trees with Gini-impurity splits."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError


@dataclass(frozen=True)
class Tree:
    """Array-encoded binary tree; leaves have ``feature == -1``.

    ``value`` is the fraction of ADHD rows reaching the node; ``x <= threshold``
    goes left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def leaf_values(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            n = node[active]
            go_left = X[active, self.feature[n]] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] >= 0
        return self.value[node]

    def predict(self, X: np.ndarray) -> np.ndarray:
        # leaf tie (value 0.5) goes to ADHD
        return (self.leaf_values(X) >= 0.5).astype(int)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist()
                for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.asarray(d["feature"], dtype=int), np.asarray(d["threshold"], dtype=float),
                   np.asarray(d["left"], dtype=int), np.asarray(d["right"], dtype=int),
                   np.asarray(d["value"], dtype=float))


def _best_split(Xn: np.ndarray, yn: np.ndarray):
    """Lowest weighted Gini split as ``(feature, threshold)`` or ``None``.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    m = yn.size
    order = np.argsort(Xn, axis=0, kind="stable")
    Xs = np.take_along_axis(Xn, order, axis=0)
    ys = yn[order]
    pos_left = np.cumsum(ys, axis=0)[:-1]
    n_left = np.arange(1, m)[:, None].astype(float)
    n_right = m - n_left
    p_l = pos_left / n_left
    p_r = (yn.sum() - pos_left) / n_right
    imp = (n_left * 2.0 * p_l * (1.0 - p_l) + n_right * 2.0 * p_r * (1.0 - p_r)) / m
    imp[Xs[1:] <= Xs[:-1]] = np.inf
    flat = imp.T.ravel()          # feature-major
    k = int(np.argmin(flat))
    if not np.isfinite(flat[k]):
        return None
    f, p = divmod(k, m - 1)
    lo, hi = Xs[p, f], Xs[p + 1, f]
    thr = lo + 0.5 * (hi - lo)
    if not lo <= thr < hi:
        thr = lo
    return f, float(thr)


def grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int | None = 10) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    root = new_node(np.arange(y.size))
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        if yn.min() == yn.max() or idx.size < 2:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        split = _best_split(X[idx], yn)
        if split is None:
            continue
        f, thr = split
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(li), new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return Tree(np.array(feature, dtype=int), np.array(threshold), np.array(left, dtype=int),
                np.array(right, dtype=int), np.array(value))


def bootstrap_indices(n: int, tree_seed: int) -> np.ndarray:
    return np.random.default_rng(int(tree_seed)).integers(0, n, size=n)


@dataclass(frozen=True)
class EnsembleModel:
    trees: tuple[Tree, ...]
    tree_seeds: tuple[int, ...]
    n_features: int
    n_train: int
    n_trees: int = 100
    max_depth: int | None = 10
    seed: int = 0

    kind = "ENS"

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def votes(self, X) -> np.ndarray:
        """``(n_trees, n_rows)`` matrix of per-tree labels."""
        X = self._check(X)
        return np.array([t.predict(X) for t in self.trees])

    def decision_function(self, X) -> np.ndarray:
        """Fraction of trees voting ADHD."""
        return self.votes(X).mean(axis=0)

    def predict(self, X) -> np.ndarray:
        # 50/50 vote goes to ADHD
        return (self.decision_function(X) >= 0.5).astype(int)

    def oob_accuracy(self, X, y) -> float:
        """Accuracy of out-of-bag votes over rows left out by at least one tree."""
        X = self._check(X)
        y = np.asarray(y, dtype=int)
        pos = np.zeros(y.size)
        cnt = np.zeros(y.size)
        for tree, s in zip(self.trees, self.tree_seeds):
            oob = np.ones(y.size, dtype=bool)
            oob[bootstrap_indices(self.n_train, s)] = False
            pos[oob] += tree.predict(X[oob])
            cnt[oob] += 1
        ok = cnt > 0
        pred = (pos[ok] / cnt[ok] >= 0.5).astype(int)
        return float(np.mean(pred == y[ok]))

    def params(self) -> dict:
        return {
            "tree_seeds": list(self.tree_seeds),
            "n_features": self.n_features,
            "n_train": self.n_train,
            "trees": [t.to_dict() for t in self.trees],
        }

    def hyperparams(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth, "seed": self.seed}


def ens_train(X, y, n_trees: int = 100, max_depth: int | None = 10, seed: int = 0,
              workers: int = 1) -> EnsembleModel:
    """Bagging: one full-feature Gini tree per bootstrap sample.

    Tree ``t`` draws its bootstrap rows from a generator seeded with
    ``tree_seeds[t]``, derived from ``seed``; results do not depend on
    ``workers``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if int(n_trees) != n_trees or n_trees < 1:
        raise ConfigError("n_trees must be a positive integer")
    if max_depth is not None and max_depth < 1:
        raise ConfigError("max_depth must be >= 1 or None")
    if len(np.unique(y)) < 2:
        raise DataError("ensemble training needs both classes")
    n = y.size
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(int(n_trees))]

    def one(s):
        idx = bootstrap_indices(n, s)
        return grow_tree(X[idx], y[idx], max_depth)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trees = list(pool.map(one, seeds))
    else:
        trees = [one(s) for s in seeds]
    return EnsembleModel(tuple(trees), tuple(seeds), X.shape[1], n, int(n_trees), max_depth, seed)
