"""Multilevel discrete wavelet transform with the Daubechies-4 (8-tap) bank.

Conventions (compatible with the common "symmetric" mode of wavelet
toolboxes):

* the input is extended by ``F - 1`` samples on each side by half-point
  symmetric reflection (``x1 x0 | x0 x1 ...``);
* analysis output ``k`` is the full convolution with the analysis filter
  evaluated at index ``2k + 1``, so a length-``n`` input yields
  ``(n + F - 1) // 2`` coefficients;
* synthesis is the adjoint of the analysis step for the orthogonal bank,
  which reconstructs the interior exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

# Daubechies-4 scaling (reconstruction low-pass) filter, 8 taps.
DB4_REC_LO = np.array([
    0.23037781330885523,
    0.7148465705525415,
    0.6308807679295904,
    -0.02798376941698385,
    -0.18703481171888114,
    0.030841381835986965,
    0.032883011666982945,
    -0.010597401784997278,
])
DB4_DEC_LO = DB4_REC_LO[::-1].copy()
# quadrature mirror: g[k] = (-1)^(k+1) h[F-1-k]
DB4_DEC_HI = np.array([(-1) ** (k + 1) * DB4_DEC_LO[7 - k] for k in range(8)])
DB4_REC_HI = DB4_DEC_HI[::-1].copy()

FILTER_LEN = DB4_DEC_LO.size
SUBBAND_NAMES_3 = ("cA3", "cD3", "cD2", "cD1")


@dataclass(frozen=True)
class WaveletDecomposition:
    """Subbands ordered ``[cA_L, cD_L, ..., cD_1]``."""

    levels: int
    subbands: tuple[np.ndarray, ...]
    boundary_mode: str = "symmetric"

    @property
    def names(self) -> list[str]:
        return [f"cA{self.levels}"] + [f"cD{k}" for k in range(self.levels, 0, -1)]


def dwt_output_len(n: int, filter_len: int = FILTER_LEN) -> int:
    return (n + filter_len - 1) // 2


def dwt_step(x: np.ndarray, lo=DB4_DEC_LO, hi=DB4_DEC_HI) -> tuple[np.ndarray, np.ndarray]:
    """One analysis level: returns ``(approximation, detail)``."""
    f = lo.size
    ext = np.pad(x, f - 1, mode="symmetric")
    m = dwt_output_len(x.size, f)
    # output k = full-conv index 2k+1 of the unextended signal, which sits at
    # index 2k + f of the convolution of the extended one
    sl = slice(f, f + 2 * m, 2)
    return np.convolve(ext, lo)[sl], np.convolve(ext, hi)[sl]


def idwt_step(approx: np.ndarray, detail: np.ndarray, n: int,
              lo=DB4_DEC_LO, hi=DB4_DEC_HI) -> np.ndarray:
    """Invert :func:`dwt_step` for an output of length ``n``."""
    if approx.size != detail.size:
        raise DataError(f"subband length mismatch: {approx.size} vs {detail.size}")
    f = lo.size
    if approx.size != dwt_output_len(n, f):
        raise DataError(f"subband length {approx.size} inconsistent with signal length {n}")
    u_a = np.zeros(2 * approx.size)
    u_d = np.zeros(2 * detail.size)
    u_a[1::2] = approx
    u_d[1::2] = detail
    # x[t] = sum_k a[k] lo[2k+1-t] + d[k] hi[2k+1-t]
    y = np.convolve(u_a, lo[::-1]) + np.convolve(u_d, hi[::-1])
    return y[f - 1:f - 1 + n]


def dwt_multilevel(signal, levels: int = 3) -> WaveletDecomposition:
    """Pyramid decomposition into ``levels + 1`` subbands."""
    x = np.asarray(signal, dtype=float).ravel()
    if int(levels) != levels or levels < 1:
        raise DataError(f"levels must be a positive integer, got {levels!r}")
    levels = int(levels)
    if x.size < 2 ** levels:
        raise DataError(f"signal of length {x.size} too short for {levels} levels")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite sample in DWT input")
    details = []
    a = x
    for _ in range(levels):
        a, d = dwt_step(a)
        details.append(d)
    return WaveletDecomposition(levels, (a, *details[::-1]))


def idwt_multilevel(dec: WaveletDecomposition, original_len: int) -> np.ndarray:
    """Reconstruct a signal of length ``original_len`` from its decomposition."""
    if len(dec.subbands) != dec.levels + 1:
        raise DataError("decomposition must hold levels + 1 subbands")
    lengths = [int(original_len)]
    for _ in range(dec.levels):
        lengths.append(dwt_output_len(lengths[-1]))
    a = np.asarray(dec.subbands[0], dtype=float)
    if a.size != lengths[-1]:
        raise DataError(f"approximation has length {a.size}, expected {lengths[-1]}")
    for level, d in zip(range(dec.levels, 0, -1), dec.subbands[1:]):
        a = idwt_step(a, np.asarray(d, dtype=float), lengths[level - 1])
    return a
