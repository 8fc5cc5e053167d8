"""Per-segment feature vectors, z-scoring and chi-square feature selection.

Feature names have the form ``<channel>/<extractor>/<component>/<stat>``,
e.g. ``Fz/DWT/cD2/energy`` or ``Pz/SLBP/code/17``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dwt import dwt_multilevel
from .emd import emd_fixed
from .errors import ConfigError, DataError
from .signals import ADHD, HC, Segment, label_to_int
from .slbp import SlbpConfig, slbp_histogram

logger = logging.getLogger(__name__)

EXTRACTORS = ("EMD", "DWT", "SLBP")
STAT_NAMES = ("entropy", "mean", "variance", "energy")

DWT_LEVELS = 3
EMD_IMFS = 3
SLBP_CFG = SlbpConfig(4)

FEATURES_PER_CHANNEL = {
    "EMD": EMD_IMFS * len(STAT_NAMES),
    "DWT": (DWT_LEVELS + 1) * len(STAT_NAMES),
    "SLBP": SLBP_CFG.n_codes,
}


def stat_features(component) -> np.ndarray:
    """``(shannon_entropy, mean, variance, energy)`` of a coefficient vector.

    The entropy is taken over the energy distribution ``x_i**2 / sum(x**2)``
    in bits; an all-zero vector has entropy 0. Variance is the population
    variance.
    """
    x = np.asarray(component, dtype=float).ravel()
    if x.size == 0:
        raise DataError("cannot compute statistics of an empty component")
    energy = float(np.sum(x * x))
    mean = float(np.mean(x))
    var = float(np.mean((x - mean) ** 2))
    if energy > 0:
        p = x * x / energy
        p = p[p > 0]
        ent = float(max(0.0, -np.sum(p * np.log2(p))))
    else:
        ent = 0.0
    return np.array([ent, mean, var, energy])


def normalize_extractor(name: str) -> str:
    key = str(name).upper()
    if key not in EXTRACTORS:
        raise ConfigError(f"unknown extractor {name!r}; expected one of {EXTRACTORS}")
    return key


def component_names(extractor: str) -> list[str]:
    """Names of the per-channel features, ``<component>/<stat-or-bin>``."""
    extractor = normalize_extractor(extractor)
    if extractor == "EMD":
        return [f"IMF{k}/{s}" for k in range(1, EMD_IMFS + 1) for s in STAT_NAMES]
    if extractor == "DWT":
        comps = [f"cA{DWT_LEVELS}"] + [f"cD{k}" for k in range(DWT_LEVELS, 0, -1)]
        return [f"{c}/{s}" for c in comps for s in STAT_NAMES]
    return [f"code/{b:02d}" for b in range(SLBP_CFG.n_codes)]


def channel_features(signal, extractor: str) -> np.ndarray:
    """Feature block of one channel segment."""
    extractor = normalize_extractor(extractor)
    x = np.asarray(signal, dtype=float)
    if extractor == "EMD":
        return np.concatenate([stat_features(c) for c in emd_fixed(x, EMD_IMFS)])
    if extractor == "DWT":
        return np.concatenate([stat_features(c) for c in dwt_multilevel(x, DWT_LEVELS).subbands])
    return slbp_histogram(x, SLBP_CFG).counts.astype(float)


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    names: tuple[str, ...]
    y: np.ndarray
    groups: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise DataError("feature matrix must be 2-D")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=int))
        object.__setattr__(self, "groups", tuple(self.groups))
        if X.shape[1] != len(self.names):
            raise DataError(f"{X.shape[1]} columns but {len(self.names)} names")
        if X.shape[0] != self.y.size:
            raise DataError(f"{X.shape[0]} rows but {self.y.size} labels")
        if not np.all(np.isfinite(X)):
            raise DataError("non-finite feature value")

    @property
    def class_counts(self) -> dict[str, int]:
        return {ADHD: int(np.sum(self.y == 1)), HC: int(np.sum(self.y == 0))}

    def with_X(self, X: np.ndarray, names: Sequence[str] | None = None) -> "FeatureMatrix":
        return FeatureMatrix(X, self.names if names is None else names, self.y, self.groups)

    def rows(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=int)
        groups = tuple(self.groups[i] for i in idx) if self.groups else ()
        return FeatureMatrix(self.X[idx], self.names, self.y[idx], groups)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(self.names + ("label",)) + "\n")
            for row, lab in zip(self.X, self.y):
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("," + (ADHD if lab == 1 else HC) + "\n")


class FeatureCache:
    """Memoises per-(segment, channel) feature blocks for one extractor.

    Feature blocks depend only on the segment's own samples, so sharing them
    between splits leaks nothing.
    """

    def __init__(self, extractor: str):
        self.extractor = normalize_extractor(extractor)
        self._store: dict[tuple[int, int], tuple[Segment, np.ndarray]] = {}

    def get(self, seg: Segment, channel: int) -> np.ndarray:
        key = (id(seg), channel)
        hit = self._store.get(key)
        if hit is not None and hit[0] is seg:
            return hit[1]
        try:
            vec = channel_features(seg.data[:, channel], self.extractor)
        except DataError as exc:
            raise DataError(
                f"{self.extractor} failed on segment {seg.subject_id}@{seg.start_sample}, "
                f"channel {channel}: {exc}"
            ) from exc
        self._store[key] = (seg, vec)
        return vec

    def __len__(self):
        return len(self._store)


def extract_features(segments: Sequence[Segment], channels: Sequence[int], extractor: str,
                     channel_names: Sequence[str] | None = None,
                     cache: FeatureCache | None = None, workers: int = 1) -> FeatureMatrix:
    """Concatenate per-channel feature blocks in the given channel order."""
    extractor = normalize_extractor(extractor)
    channels = [int(c) for c in channels]
    if not channels:
        raise ConfigError("at least one channel must be selected")
    if not segments:
        raise DataError("no segments to extract features from")
    nch = segments[0].data.shape[1]
    for c in channels:
        if not 0 <= c < nch:
            raise ConfigError(f"channel index {c} out of range 0..{nch - 1}")
    if cache is None:
        cache = FeatureCache(extractor)
    elif cache.extractor != extractor:
        raise ConfigError("feature cache belongs to a different extractor")
    if channel_names is None:
        channel_names = [f"ch{c}" for c in range(nch)]

    def row(seg):
        return np.concatenate([cache.get(seg, c) for c in channels])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, segments))
    else:
        rows = [row(s) for s in segments]
    comp = component_names(extractor)
    names = [f"{channel_names[c]}/{extractor}/{n}" for c in channels for n in comp]
    y = [label_to_int(s.label) for s in segments]
    groups = [s.subject_id for s in segments]
    return FeatureMatrix(np.vstack(rows), names, y, groups)


# ---------------------------------------------------------------------------
# standardisation


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray
    names: tuple[str, ...] = field(default=())

    def transform(self, m: FeatureMatrix) -> FeatureMatrix:
        if self.names and tuple(m.names) != tuple(self.names):
            raise DataError("standardizer was fitted on different features")
        return m.with_X((m.X - self.mean) / self.std)


def fit_standardizer(train: FeatureMatrix) -> Standardizer:
    """Per-feature mean and population std; zero-variance features get std 1."""
    if train.X.shape[0] == 0:
        raise DataError("cannot fit a standardizer on an empty matrix")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    degenerate = std == 0
    std = np.where(degenerate, 1.0, std)
    if degenerate.any():
        logger.debug("%d degenerate feature(s) left unscaled", int(degenerate.sum()))
    return Standardizer(mean, std, degenerate, train.names)


def apply_standardizer(s: Standardizer, m: FeatureMatrix) -> FeatureMatrix:
    return s.transform(m)


# ---------------------------------------------------------------------------
# chi-square selection


def chi2_statistic(observed) -> float:
    """Pearson chi-square of a contingency table, summing cells with E > 0."""
    O = np.asarray(observed, dtype=float)
    total = O.sum()
    if total <= 0:
        return 0.0
    E = np.outer(O.sum(axis=1), O.sum(axis=0)) / total
    nz = E > 0
    return float(np.sum((O[nz] - E[nz]) ** 2 / E[nz]))


def equal_frequency_bins(values, n_bins: int) -> np.ndarray:
    """Bin index per value, cut at order statistics so bins hold ~n/n_bins values.

    Cuts are actual data values and equal values share a bin, so the
    assignment depends only on ranks.
    """
    v = np.asarray(values, dtype=float)
    s = np.sort(v)
    n = s.size
    cuts = s[[(j * n) // n_bins for j in range(1, n_bins)]]
    return np.searchsorted(cuts, v, side="right")


@dataclass(frozen=True)
class SelectionMask:
    kept_indices: tuple[int, ...]
    statistics: np.ndarray
    n_bins: int
    keep_fraction: float
    names: tuple[str, ...] = ()

    def apply(self, m: FeatureMatrix) -> FeatureMatrix:
        if self.names and tuple(m.names) != tuple(self.names):
            raise DataError("selection mask was fitted on different features")
        idx = list(self.kept_indices)
        return m.with_X(m.X[:, idx], [m.names[i] for i in idx])


def chi_square_scores(train: FeatureMatrix, n_bins: int = 10) -> np.ndarray:
    y = train.y
    out = np.empty(train.X.shape[1])
    for j in range(train.X.shape[1]):
        b = equal_frequency_bins(train.X[:, j], n_bins)
        table = np.zeros((n_bins, 2))
        np.add.at(table, (b, y), 1)
        out[j] = chi2_statistic(table)
    return out


def chi_square_select(train: FeatureMatrix, n_bins: int = 10,
                      keep_fraction: float = 0.5) -> SelectionMask:
    """Keep the ``ceil(keep_fraction * d)`` features with the largest chi-square.

    Ties go to the lower feature index; kept indices are returned ascending.
    """
    if int(n_bins) != n_bins or n_bins < 2:
        raise ConfigError(f"n_bins must be an integer >= 2, got {n_bins!r}")
    if not 0 < keep_fraction <= 1:
        raise ConfigError(f"keep_fraction must lie in (0, 1], got {keep_fraction!r}")
    counts = train.class_counts
    if min(counts.values()) == 0:
        raise DataError(f"chi-square selection needs both classes; got {counts}")
    stats = chi_square_scores(train, int(n_bins))
    d = stats.size
    k = math.ceil(keep_fraction * d - 1e-12)
    order = np.lexsort((np.arange(d), -stats))
    kept = tuple(sorted(int(i) for i in order[:k]))
    return SelectionMask(kept, stats, int(n_bins), float(keep_fraction), train.names)


def apply_mask(mask: SelectionMask, m: FeatureMatrix) -> FeatureMatrix:
    return mask.apply(m)
