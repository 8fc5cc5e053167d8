"""k-NN, RBF-SVM and bagged-tree classifiers behind one interface.

Labels are integers, 1 for ADHD and 0 for HC. Every model exposes
``predict(X)``, ``decision_function(X)`` and round-trips through
:func:`model_to_dict` / :func:`model_from_dict`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ..signals import ADHD, HC
from .ensemble import EnsembleModel, Tree, ens_train
from .knn import KnnModel, knn_train
from .svm import SvmModel, default_gamma, rbf_kernel, svm_train

__all__ = [
    "CLASSIFIERS", "EnsembleModel", "KnnModel", "Prediction", "SvmModel",
    "default_gamma", "ens_predict", "ens_train", "knn_predict", "knn_train",
    "load_model", "model_from_dict", "model_to_dict", "rbf_kernel", "save_model",
    "svm_predict", "svm_train", "train_classifier",
]

CLASSIFIERS = ("KNN", "SVM", "ENS")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Prediction:
    label: str
    score: float


def _single(model, x) -> Prediction:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DataError("expected a single feature vector")
    lab = int(model.predict(x[None, :])[0])
    score = float(model.decision_function(x[None, :])[0])
    return Prediction(ADHD if lab == 1 else HC, score)


def knn_predict(model: KnnModel, x) -> Prediction:
    return _single(model, x)


def svm_predict(model: SvmModel, x) -> Prediction:
    return _single(model, x)


def ens_predict(model: EnsembleModel, x) -> Prediction:
    return _single(model, x)


def train_classifier(kind: str, X, y, *, knn_k: int = 5, svm_C: float = 1.0,
                     svm_gamma: float | None = None, svm_tol: float = 1e-3,
                     svm_max_iter: int = 1_000_000, ens_n_trees: int = 100,
                     ens_max_depth: int | None = 10, seed: int = 0, workers: int = 1):
    kind = str(kind).upper()
    if kind == "KNN":
        return knn_train(X, y, knn_k)
    if kind == "SVM":
        return svm_train(X, y, svm_C, svm_gamma, svm_tol, svm_max_iter)
    if kind == "ENS":
        return ens_train(X, y, ens_n_trees, ens_max_depth, seed, workers)
    raise ConfigError(f"unknown classifier {kind!r}; expected one of {CLASSIFIERS}")


def model_to_dict(model) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": model.hyperparams(),
        "parameters": model.params(),
    }


def model_from_dict(d: dict):
    if d.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {d.get('format_version')!r}")
    kind, hp, p = d["kind"], d["hyperparameters"], d["parameters"]
    if kind == "KNN":
        return KnnModel(np.asarray(p["X"], dtype=float), np.asarray(p["y"], dtype=int), int(hp["k"]))
    if kind == "SVM":
        sv = np.asarray(p["support_vectors"], dtype=float)
        return SvmModel(sv.reshape(len(p["support_vectors"]), -1) if sv.size else sv,
                        np.asarray(p["support_indices"], dtype=int),
                        np.asarray(p["dual_coef"], dtype=float), float(p["bias"]),
                        float(hp["gamma"]), float(hp["C"]), float(hp["tol"]),
                        int(p["n_iter"]), float(p["kkt_gap"]))
    if kind == "ENS":
        return EnsembleModel(tuple(Tree.from_dict(t) for t in p["trees"]),
                             tuple(int(s) for s in p["tree_seeds"]), int(p["n_features"]),
                             int(p["n_train"]), int(hp["n_trees"]), hp["max_depth"], hp["seed"])
    raise DataError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
