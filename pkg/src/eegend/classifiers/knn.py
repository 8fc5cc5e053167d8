"""k-nearest-neighbour classifier with fully specified tie rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError

_CHUNK = 256


@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 5

    kind = "KNN"

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.X.shape[1]:
            raise DataError(f"expected {self.X.shape[1]} features, got {X.shape[1]}")
        return X

    def _votes(self, X):
        X = self._check(X)
        labels = np.empty(X.shape[0], dtype=int)
        scores = np.empty(X.shape[0])
        for start in range(0, X.shape[0], _CHUNK):
            Q = X[start:start + _CHUNK]
            d2 = ((Q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            # stable sort: equal distances keep training-row order
            nn = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            for r in range(Q.shape[0]):
                idx = nn[r]
                lab = self.y[idx]
                n_pos = int(lab.sum())
                n_neg = self.k - n_pos
                if n_pos != n_neg:
                    out = int(n_pos > n_neg)
                else:
                    dist = np.sqrt(d2[r, idx])
                    s_pos, s_neg = dist[lab == 1].sum(), dist[lab == 0].sum()
                    out = 0 if s_neg < s_pos else 1
                labels[start + r] = out
                scores[start + r] = n_pos / self.k
        return labels, scores

    def predict(self, X) -> np.ndarray:
        return self._votes(X)[0]

    def decision_function(self, X) -> np.ndarray:
        """Fraction of the k neighbours that are ADHD."""
        return self._votes(X)[1]

    def params(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist()}

    def hyperparams(self) -> dict:
        return {"k": self.k}


def knn_train(X, y, k: int = 5) -> KnnModel:
    """Store the training set. Requires ``1 <= k <= n_rows``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if X.shape[0] == 0:
        raise DataError("cannot train k-NN on an empty matrix")
    if int(k) != k or not 1 <= k <= X.shape[0]:
        raise ConfigError(f"k must be in 1..{X.shape[0]}, got {k!r}")
    return KnnModel(X.copy(), y.copy(), int(k))
