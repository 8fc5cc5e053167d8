"""Histogram entropy of EEG channels and the two channel rankings.

Two scores are supported:

* ``"en"``  -- entropy of each channel pooled over all training segments;
* ``"end"`` -- absolute difference between the ADHD-pooled and HC-pooled
  entropies of each channel.

Both sort channels by descending score, ties going to the lower channel index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .signals import ADHD, HC, Dataset

DEFAULT_BINS = 256

METHODS = ("en", "end")


def estimate_pmf(samples, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    """Equal-width histogram pmf over ``[min(samples), max(samples)]``.

    The maximum falls in the last bin. A constant input puts all its mass in
    bin 0.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DataError("cannot estimate a pmf from an empty sequence")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite sample in pmf estimation")
    if int(n_bins) != n_bins or n_bins < 2:
        raise ConfigError(f"n_bins must be an integer >= 2, got {n_bins!r}")
    n_bins = int(n_bins)
    lo, hi = x.min(), x.max()
    pmf = np.zeros(n_bins)
    if hi == lo:
        pmf[0] = 1.0
        return pmf
    idx = np.floor((x - lo) / (hi - lo) * n_bins).astype(np.int64)
    np.clip(idx, 0, n_bins - 1, out=idx)
    counts = np.bincount(idx, minlength=n_bins)
    return counts / x.size


def entropy_bits(pmf) -> float:
    """Shannon entropy in bits with ``0 * log2(0) = 0``."""
    p = np.asarray(pmf, dtype=float)
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def channel_entropy(samples, n_bins: int = DEFAULT_BINS) -> float:
    return entropy_bits(estimate_pmf(samples, n_bins))


@dataclass(frozen=True)
class ChannelScore:
    channel_index: int
    channel_name: str
    score: float


@dataclass(frozen=True)
class ChannelRanking:
    method: str
    scores: tuple[ChannelScore, ...]
    n_bins: int

    @property
    def order(self) -> list[int]:
        return [s.channel_index for s in self.scores]

    @property
    def names(self) -> list[str]:
        return [s.channel_name for s in self.scores]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n_bins": self.n_bins,
            "ranking": [
                {"rank": r, "channel_index": s.channel_index,
                 "channel_name": s.channel_name, "score": s.score}
                for r, s in enumerate(self.scores, start=1)
            ],
        }


def _make_ranking(method: str, names, scores, n_bins: int) -> ChannelRanking:
    scores = np.asarray(scores, dtype=float)
    # lexsort: last key is primary -> descending score, then ascending index
    order = np.lexsort((np.arange(scores.size), -scores))
    return ChannelRanking(
        method,
        tuple(ChannelScore(int(i), names[i], float(scores[i])) for i in order),
        n_bins,
    )


def rank_by_entropy(train: Dataset, n_bins: int = DEFAULT_BINS) -> ChannelRanking:
    """Rank channels by the entropy of all training samples, both classes pooled."""
    if not train.segments:
        raise DataError("entropy ranking needs at least one training segment")
    scores = [channel_entropy(train.channel_samples(c), n_bins) for c in range(train.n_channels)]
    return _make_ranking("en", train.channels, scores, n_bins)


def entropy_differences(train: Dataset, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    """Per-channel ``|H_ADHD - H_HC|`` with each class pooled separately."""
    counts = train.class_counts()
    missing = [c for c in (ADHD, HC) if counts[c] == 0]
    if missing:
        raise DataError(f"entropy-difference ranking needs both classes; missing {missing}")
    out = np.empty(train.n_channels)
    for c in range(train.n_channels):
        h_adhd = channel_entropy(train.channel_samples(c, ADHD), n_bins)
        h_hc = channel_entropy(train.channel_samples(c, HC), n_bins)
        out[c] = abs(h_adhd - h_hc)
    return out


def rank_by_end(train: Dataset, n_bins: int = DEFAULT_BINS) -> ChannelRanking:
    """Rank channels by class-conditional entropy difference on training data."""
    return _make_ranking("end", train.channels, entropy_differences(train, n_bins), n_bins)


def rank_channels(train: Dataset, method: str, n_bins: int = DEFAULT_BINS) -> ChannelRanking:
    method = method.lower()
    if method == "en":
        return rank_by_entropy(train, n_bins)
    if method == "end":
        return rank_by_end(train, n_bins)
    raise ConfigError(f"unknown ranking method {method!r}; expected one of {METHODS}")


def select_channels(ranking: ChannelRanking, n: int) -> list[int]:
    """The first ``n`` channel indices of a ranking."""
    if int(n) != n or not 1 <= n <= len(ranking.scores):
        raise ConfigError(f"n must be in 1..{len(ranking.scores)}, got {n!r}")
    return ranking.order[: int(n)]
