"""Validation strategies, metrics and the end-to-end evaluation pipeline.

Per split the pipeline ranks channels on the training part only, keeps the
top ``n_channels``, extracts features for both parts from those channels,
fits the standardizer and chi-square mask on the training rows, trains the
classifier and scores the test rows.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .classifiers import CLASSIFIERS, train_classifier
from .errors import ConfigError, DataError, EegendError
from .features import (
    EXTRACTORS, FeatureCache, chi_square_select, extract_features, fit_standardizer,
    normalize_extractor,
)
from .ranking import DEFAULT_BINS, METHODS, ChannelRanking, rank_channels, select_channels
from .signals import ADHD, Dataset

logger = logging.getLogger(__name__)

STRATEGIES = ("chrono", "random", "kfold")
UNITS = ("segment", "subject")
TRAIN_FRACTION_TENTHS = 7


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fn + other.fn,
                               self.tn + other.tn, self.fp + other.fp)

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "ConfusionCounts":
        t = np.asarray(y_true, dtype=int)
        p = np.asarray(y_pred, dtype=int)
        return cls(int(np.sum((t == 1) & (p == 1))), int(np.sum((t == 1) & (p == 0))),
                   int(np.sum((t == 0) & (p == 0))), int(np.sum((t == 0) & (p == 1))))

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp


@dataclass(frozen=True)
class Metrics:
    """``None`` marks a rate whose denominator is zero (class absent)."""

    accuracy: float
    sensitivity: float | None
    specificity: float | None


def compute_metrics(c: ConfusionCounts) -> Metrics:
    if c.total < 1:
        raise DataError("cannot compute metrics from all-zero counts")
    acc = (c.tp + c.tn) / c.total
    sens = c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    spec = c.tn / (c.tn + c.fp) if c.tn + c.fp else None
    return Metrics(acc, sens, spec)


def _mean_defined(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


# ---------------------------------------------------------------------------
# splits over units


def chrono_split(n_units: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``floor(0.7 n)`` units train, the rest test."""
    if n_units < 2:
        raise DataError(f"need at least 2 units to split, got {n_units}")
    cut = (TRAIN_FRACTION_TENTHS * n_units) // 10
    idx = np.arange(n_units)
    return idx[:cut], idx[cut:]


def random_splits(labels, repeats: int = 10, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified random 70/30 partitions, one generator per repeat."""
    labels = np.asarray(labels)
    if int(repeats) != repeats or repeats < 1:
        raise ConfigError("repeats must be a positive integer")
    classes = sorted(set(labels.tolist()))
    for c in classes:
        if np.sum(labels == c) < 2:
            raise DataError(f"class {c!r} has fewer than 2 units; cannot stratify")
    out = []
    for child in np.random.SeedSequence(seed).spawn(int(repeats)):
        rng = np.random.default_rng(child)
        train = []
        for c in classes:
            members = np.flatnonzero(labels == c)
            perm = rng.permutation(members)
            n_train = min(max(int(round(0.7 * members.size)), 1), members.size - 1)
            train.extend(perm[:n_train].tolist())
        train = np.sort(np.array(train, dtype=int))
        test = np.setdiff1d(np.arange(labels.size), train)
        out.append((train, test))
    return out


def kfold_splits(labels, k: int = 10, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified k-fold: each class is shuffled and dealt round-robin into folds."""
    labels = np.asarray(labels)
    if int(k) != k or k < 2:
        raise ConfigError("k must be an integer >= 2")
    k = int(k)
    classes = sorted(set(labels.tolist()))
    for c in classes:
        if np.sum(labels == c) < k:
            raise DataError(f"class {c!r} has {np.sum(labels == c)} units, fewer than k={k}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.size, dtype=int)
    offset = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(labels == c))
        # continue the round-robin across classes so total fold sizes stay balanced
        fold_of[members] = (np.arange(members.size) + offset) % k
        offset = (offset + members.size) % k
    all_idx = np.arange(labels.size)
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


# ---------------------------------------------------------------------------
# split plans over datasets


@dataclass(frozen=True)
class SplitPlan:
    strategy: str = "kfold"
    repeats: int = 10
    folds: int = 10
    seed: int = 0
    unit: str = "segment"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.unit not in UNITS:
            raise ConfigError(f"unknown split unit {self.unit!r}; expected one of {UNITS}")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")


def _unit_labels(ds: Dataset, unit: str) -> np.ndarray:
    if unit == "segment":
        return ds.y
    return np.array([1 if r.label == ADHD else 0 for r in ds.recordings])


def _to_segment_indices(ds: Dataset, unit: str, unit_idx: np.ndarray) -> np.ndarray:
    if unit == "segment":
        return np.asarray(unit_idx, dtype=int)
    chosen = {ds.recordings[i].subject_id for i in unit_idx}
    return np.array([i for i, s in enumerate(ds.segments) if s.subject_id in chosen], dtype=int)


def plan_splits(ds: Dataset, plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """Segment-index ``(train, test)`` pairs for a plan."""
    labels = _unit_labels(ds, plan.unit)
    if plan.strategy == "chrono":
        unit_splits = [chrono_split(labels.size)]
    elif plan.strategy == "random":
        unit_splits = random_splits(labels, plan.repeats, plan.seed)
    else:
        unit_splits = kfold_splits(labels, plan.folds, plan.seed)
    return [(_to_segment_indices(ds, plan.unit, tr), _to_segment_indices(ds, plan.unit, te))
            for tr, te in unit_splits]


def split_chrono_7030(ds: Dataset, unit: str = "segment") -> tuple[Dataset, Dataset]:
    (tr, te), = plan_splits(ds, SplitPlan("chrono", unit=unit))
    return ds.subset(tr), ds.subset(te)


def split_random_7030_repeated(ds: Dataset, repeats: int = 10, seed: int = 0,
                               unit: str = "segment") -> list[tuple[Dataset, Dataset]]:
    plan = SplitPlan("random", repeats=repeats, seed=seed, unit=unit)
    return [(ds.subset(tr), ds.subset(te)) for tr, te in plan_splits(ds, plan)]


def split_kfold(ds: Dataset, k: int = 10, seed: int = 0,
                unit: str = "segment") -> list[tuple[Dataset, Dataset]]:
    plan = SplitPlan("kfold", folds=k, seed=seed, unit=unit)
    return [(ds.subset(tr), ds.subset(te)) for tr, te in plan_splits(ds, plan)]


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class PipelineConfig:
    ranking: str = "end"
    n_channels: int = 3
    extractor: str = "SLBP"
    classifier: str = "KNN"
    entropy_bins: int = DEFAULT_BINS
    standardize: bool = True
    keep_fraction: float = 0.5
    chi2_bins: int = 10
    channel_order: str = "ranking"
    knn_k: int = 5
    svm_C: float = 1.0
    svm_gamma: float | None = None
    svm_tol: float = 1e-3
    svm_max_iter: int = 1_000_000
    ens_n_trees: int = 100
    ens_max_depth: int | None = 10

    def __post_init__(self):
        object.__setattr__(self, "ranking", str(self.ranking).lower())
        object.__setattr__(self, "extractor", normalize_extractor(self.extractor))
        object.__setattr__(self, "classifier", str(self.classifier).upper())
        if self.ranking not in METHODS:
            raise ConfigError(f"unknown ranking method {self.ranking!r}; expected one of {METHODS}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"unknown classifier {self.classifier!r}; expected one of {CLASSIFIERS}")
        if self.channel_order not in ("ranking", "canonical"):
            raise ConfigError("channel_order must be 'ranking' or 'canonical'")
        if int(self.n_channels) != self.n_channels or self.n_channels < 1:
            raise ConfigError("n_channels must be a positive integer")
        if not 0 < self.keep_fraction <= 1:
            raise ConfigError("keep_fraction must lie in (0, 1]")


@dataclass
class SplitResult:
    index: int
    n_train: int
    n_test: int
    channels: list[str]
    kept_features: list[str]
    counts: ConfusionCounts
    metrics: Metrics
    fitted: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "channels": self.channels,
            "n_kept_features": len(self.kept_features),
            "counts": asdict(self.counts),
            "metrics": asdict(self.metrics),
        }


@dataclass
class ReportRow:
    config: PipelineConfig
    plan: SplitPlan
    splits: list[SplitResult]

    @property
    def key(self) -> tuple:
        c = self.config
        return (c.ranking, c.extractor, c.classifier, c.n_channels, self.plan.strategy)

    @property
    def accuracy(self) -> float:
        return float(np.mean([s.metrics.accuracy for s in self.splits]))

    @property
    def sensitivity(self) -> float | None:
        return _mean_defined([s.metrics.sensitivity for s in self.splits])

    @property
    def specificity(self) -> float | None:
        return _mean_defined([s.metrics.specificity for s in self.splits])

    @property
    def pooled(self) -> ConfusionCounts:
        total = ConfusionCounts()
        for s in self.splits:
            total = total + s.counts
        return total

    def to_dict(self) -> dict:
        pooled = self.pooled
        return {
            "ranking": self.config.ranking,
            "extractor": self.config.extractor,
            "classifier": self.config.classifier,
            "n_channels": self.config.n_channels,
            "strategy": self.plan.strategy,
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "pooled_counts": asdict(pooled),
            "pooled_metrics": asdict(compute_metrics(pooled)),
            "seed": self.plan.seed,
            "config": asdict(self.config),
            "plan": asdict(self.plan),
            "splits": [s.to_dict() for s in self.splits],
        }


CSV_COLUMNS = ("ranking", "extractor", "classifier", "n_channels", "strategy",
               "accuracy", "sensitivity", "specificity", "tp", "fn", "tn", "fp", "seed")


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class EvaluationReport:
    rows: list[ReportRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            p = r.pooled
            w.writerow([_fmt(v) for v in (
                r.config.ranking, r.config.extractor, r.config.classifier, r.config.n_channels,
                r.plan.strategy, r.accuracy, r.sensitivity, r.specificity,
                p.tp, p.fn, p.tn, p.fp, r.plan.seed)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": [r.to_dict() for r in self.rows]}, indent=2, sort_keys=True) + "\n"


class PipelineContext:
    """Caches shared by many pipeline runs over one dataset.

    Feature blocks are cached per (segment, channel); rankings per training
    index set and method. Neither depends on test data.
    """

    def __init__(self, ds: Dataset):
        self.ds = ds
        self.features = {ex: FeatureCache(ex) for ex in EXTRACTORS}
        self._rankings: dict = {}

    def ranking(self, train_idx: np.ndarray, train: Dataset, method: str, bins: int) -> ChannelRanking:
        key = (np.asarray(train_idx, dtype=np.int64).tobytes(), method, bins)
        hit = self._rankings.get(key)
        if hit is None:
            hit = rank_channels(train, method, bins)
            self._rankings[key] = hit
        return hit


def _split_seed(plan_seed: int, split_index: int) -> int:
    return int(np.random.SeedSequence([int(plan_seed), int(split_index)]).generate_state(1)[0])


def run_split(ctx: PipelineContext, train_idx, test_idx, cfg: PipelineConfig,
              seed: int, index: int = 0, keep_fitted: bool = False) -> SplitResult:
    ds = ctx.ds
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    if not train.segments or not test.segments:
        raise DataError(f"split {index}: empty train or test part")
    ranking = ctx.ranking(train_idx, train, cfg.ranking, cfg.entropy_bins)
    if cfg.n_channels > ds.n_channels:
        raise ConfigError(f"n_channels={cfg.n_channels} exceeds the {ds.n_channels} available")
    chans = select_channels(ranking, cfg.n_channels)
    if cfg.channel_order == "canonical":
        chans = sorted(chans)
    cache = ctx.features[cfg.extractor]
    f_train = extract_features(train.segments, chans, cfg.extractor, ds.channels, cache)
    f_test = extract_features(test.segments, chans, cfg.extractor, ds.channels, cache)
    std = None
    if cfg.standardize:
        std = fit_standardizer(f_train)
        f_train, f_test = std.transform(f_train), std.transform(f_test)
    mask = chi_square_select(f_train, cfg.chi2_bins, cfg.keep_fraction)
    f_train, f_test = mask.apply(f_train), mask.apply(f_test)
    model = train_classifier(
        cfg.classifier, f_train.X, f_train.y, knn_k=cfg.knn_k, svm_C=cfg.svm_C,
        svm_gamma=cfg.svm_gamma, svm_tol=cfg.svm_tol, svm_max_iter=cfg.svm_max_iter,
        ens_n_trees=cfg.ens_n_trees, ens_max_depth=cfg.ens_max_depth, seed=seed,
    )
    counts = ConfusionCounts.from_labels(f_test.y, model.predict(f_test.X))
    fitted = {"ranking": ranking, "standardizer": std, "mask": mask, "model": model} if keep_fitted else {}
    return SplitResult(index, len(train_idx), len(test_idx), [ds.channels[c] for c in chans],
                       list(f_train.names), counts, compute_metrics(counts), fitted)


def run_pipeline(ds: Dataset, plan: SplitPlan, cfg: PipelineConfig,
                 ctx: PipelineContext | None = None, workers: int = 1,
                 keep_fitted: bool = False) -> ReportRow:
    """Evaluate one configuration under one split plan."""
    if not ds.segments:
        raise DataError("dataset has no segments; run segment_dataset first")
    if ctx is None:
        ctx = PipelineContext(ds)
    elif ctx.ds is not ds:
        raise ConfigError("pipeline context belongs to a different dataset")
    splits = plan_splits(ds, plan)

    def one(args):
        i, (tr, te) = args
        try:
            return run_split(ctx, tr, te, cfg, _split_seed(plan.seed, i), i, keep_fitted)
        except EegendError as exc:
            raise type(exc)(f"split {i}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, enumerate(splits)))
    else:
        results = [one(item) for item in enumerate(splits)]
    return ReportRow(cfg, plan, results)


def run_grid(ds: Dataset, base: PipelineConfig, plans: Sequence[SplitPlan],
             rankings: Sequence[str] = METHODS, extractors: Sequence[str] = EXTRACTORS,
             classifiers: Sequence[str] = CLASSIFIERS, n_channels: Sequence[int] = (1, 2, 3),
             workers: int = 1) -> EvaluationReport:
    """Cartesian product of configurations; rows in a fixed nested order."""
    ctx = PipelineContext(ds)
    report = EvaluationReport()
    for method, ex, clf, n, plan in itertools.product(rankings, extractors, classifiers,
                                                      n_channels, plans):
        cfg = replace(base, ranking=method, extractor=ex, classifier=clf, n_channels=n)
        logger.info("running %s/%s/%s N=%d %s", method, ex, clf, n, plan.strategy)
        report.rows.append(run_pipeline(ds, plan, cfg, ctx, workers))
    return report


SWEEP_COLUMNS = ("method", "extractor", "classifier", "n_channels", "accuracy")


def sweep_channels(ds: Dataset, plan: SplitPlan, cfg: PipelineConfig,
                   methods: Sequence[str] = METHODS, n_range: Sequence[int] | None = None,
                   ctx: PipelineContext | None = None, workers: int = 1) -> list[tuple]:
    """Accuracy against the number of channels for each ranking method."""
    if n_range is None:
        n_range = range(1, ds.n_channels + 1)
    ctx = ctx or PipelineContext(ds)
    rows = []
    for method in methods:
        for n in n_range:
            c = replace(cfg, ranking=method, n_channels=n)
            r = run_pipeline(ds, plan, c, ctx, workers)
            rows.append((method, c.extractor, c.classifier, n, r.accuracy))
    return rows


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


__all__ = [
    "ConfusionCounts", "EvaluationReport", "Metrics", "PipelineConfig", "PipelineContext",
    "ReportRow", "SplitPlan", "SplitResult", "chrono_split", "compute_metrics", "kfold_splits",
    "plan_splits", "random_splits", "run_grid", "run_pipeline", "run_split",
    "split_chrono_7030", "split_kfold", "split_random_7030_repeated", "sweep_channels",
    "sweep_to_csv",
]
