"""Symmetrically weighted one-dimensional local binary patterns.

For sample ``x[n]`` with ``L`` neighbours on each side::

    left  = sum_{m<L} f(x[n+m-L] - x[n]) * 2**(L-1-m)
    right = sum_{m<L} f(x[n+m+1] - x[n]) * 2**m
    code  = left + right,        f(v) = 1 if v >= 0 else 0

Weights grow with distance from ``x[n]`` on both sides, so codes lie in
``[0, 2 * (2**L - 1)]`` -- 31 values for ``L = 4``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class SlbpConfig:
    half_width: int = 4

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise DataError("half_width must be a positive integer")

    @property
    def n_codes(self) -> int:
        return 2 * (2 ** self.half_width - 1) + 1


@dataclass(frozen=True)
class SlbpHistogram:
    counts: np.ndarray
    n_coded_samples: int


def slbp_code(signal, n: int, cfg: SlbpConfig = SlbpConfig()) -> int:
    """Code of a single sample; ``n`` must have ``L`` neighbours on each side."""
    x = np.asarray(signal, dtype=float)
    L = cfg.half_width
    if not L <= n <= x.size - L - 1:
        raise DataError(f"index {n} outside the coding range [{L}, {x.size - L - 1}]")
    c = x[n]
    code = 0
    for m in range(L):
        if x[n + m - L] - c >= 0:
            code += 2 ** (L - 1 - m)
        if x[n + m + 1] - c >= 0:
            code += 2 ** m
    return code


def slbp_codes(signal, cfg: SlbpConfig = SlbpConfig()) -> np.ndarray:
    """Codes of every sample with a full neighbourhood (vectorised)."""
    x = np.asarray(signal, dtype=float).ravel()
    L = cfg.half_width
    if x.size < 2 * L + 1:
        raise DataError(f"signal of length {x.size} shorter than 2L+1 = {2 * L + 1}")
    center = x[L:x.size - L]
    codes = np.zeros(center.size, dtype=np.int64)
    for m in range(L):
        left = x[m:m + center.size]                      # x[n+m-L]
        right = x[L + m + 1:L + m + 1 + center.size]     # x[n+m+1]
        codes += (left - center >= 0) * (1 << (L - 1 - m))
        codes += (right - center >= 0) * (1 << m)
    return codes


def slbp_histogram(signal, cfg: SlbpConfig = SlbpConfig()) -> SlbpHistogram:
    """Raw count histogram of all codes, length ``2 * (2**L - 1) + 1``."""
    codes = slbp_codes(signal, cfg)
    return SlbpHistogram(np.bincount(codes, minlength=cfg.n_codes), int(codes.size))
