"""Empirical mode decomposition by envelope-mean sifting.

Envelopes are natural cubic splines through the local maxima / minima, with
two extrema mirrored about each end of the signal. A sift stops when the
mean-envelope to amplitude ratio satisfies the three-threshold test of
Rilling, Flandrin & Goncalves (2003) and the candidate has as many extrema
as zero crossings (+-1), or after ``max_sift_iters`` iterations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DataError

logger = logging.getLogger(__name__)

MIN_LENGTH = 16
N_MIRROR = 2


@dataclass(frozen=True)
class SiftConfig:
    max_sift_iters: int = 100
    theta1: float = 0.05
    theta2: float = 0.5
    alpha: float = 0.05


@dataclass(frozen=True)
class EmdResult:
    imfs: np.ndarray          # (n_found, n_samples)
    residue: np.ndarray
    sift_config: SiftConfig
    sift_iterations: tuple[int, ...]
    converged: tuple[bool, ...]

    @property
    def n_imfs(self) -> int:
        return self.imfs.shape[0]


def find_extrema(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of local maxima and minima.

    An extremum is a strict sign change of the first difference; a flat run
    between a rise and a fall counts once, at its midpoint.
    """
    d = np.diff(x)
    nz = np.flatnonzero(d)
    if nz.size < 2:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    s = np.sign(d[nz])
    turn = np.flatnonzero(s[:-1] != s[1:])
    # run of samples between two nonzero differences: nz[k]+1 .. nz[k+1]
    locs = (nz[turn] + 1 + nz[turn + 1]) // 2
    is_max = s[turn] > 0
    return locs[is_max], locs[~is_max]


def count_zero_crossings(x: np.ndarray) -> int:
    """Sign changes, skipping exact zeros (a touch of zero is not a crossing)."""
    s = np.sign(x)
    s = s[s != 0]
    return int(np.count_nonzero(s[:-1] != s[1:]))


def count_extrema(x: np.ndarray) -> int:
    mx, mn = find_extrema(x)
    return mx.size + mn.size


def _mirror_points(x, imax, imin, nbsym=N_MIRROR):
    """Mirror ``nbsym`` extrema about each end (Rilling's boundary rule).

    Returns extended (positions, values) for maxima and minima.
    """
    n = x.size
    last = n - 1
    rev = lambda a: a[::-1]  # noqa: E731

    # left end
    if imax[0] < imin[0]:
        if x[0] > x[imin[0]]:
            lmax, lmin, lsym = rev(imax[1:nbsym + 1]), rev(imin[:nbsym]), imax[0]
        else:
            lmax, lmin, lsym = rev(imax[:nbsym]), np.r_[rev(imin[:nbsym - 1]), 0], 0
    else:
        if x[0] < x[imax[0]]:
            lmax, lmin, lsym = rev(imax[:nbsym]), rev(imin[1:nbsym + 1]), imin[0]
        else:
            lmax, lmin, lsym = np.r_[rev(imax[:nbsym - 1]), 0], rev(imin[:nbsym]), 0

    # right end
    if imax[-1] < imin[-1]:
        if x[-1] < x[imax[-1]]:
            rmax, rmin, rsym = rev(imax[-nbsym:]), rev(imin[-nbsym - 1:-1]), imin[-1]
        else:
            rmax, rmin, rsym = np.r_[last, rev(imax[-(nbsym - 1):])], rev(imin[-nbsym:]), last
    else:
        if x[-1] > x[imin[-1]]:
            rmax, rmin, rsym = rev(imax[-nbsym - 1:-1]), rev(imin[-nbsym:]), imax[-1]
        else:
            rmax, rmin, rsym = rev(imax[-nbsym:]), np.r_[last, rev(imin[-(nbsym - 1):])], last

    tlmin, tlmax = 2 * lsym - lmin, 2 * lsym - lmax
    trmin, trmax = 2 * rsym - rmin, 2 * rsym - rmax

    # mirrored points must reach past the signal ends
    if (tlmin.size and tlmin[0] > 0) or (tlmax.size and tlmax[0] > 0):
        if lsym == imax[0]:
            lmax = rev(imax[:nbsym])
        else:
            lmin = rev(imin[:nbsym])
        lsym = 0
        tlmin, tlmax = 2 * lsym - lmin, 2 * lsym - lmax
    if (trmin.size and trmin[-1] < last) or (trmax.size and trmax[-1] < last):
        if rsym == imax[-1]:
            rmax = rev(imax[-nbsym:])
        else:
            rmin = rev(imin[-nbsym:])
        rsym = last
        trmin, trmax = 2 * rsym - rmin, 2 * rsym - rmax

    t_max = np.r_[tlmax, imax, trmax]
    z_max = np.r_[x[lmax], x[imax], x[rmax]]
    t_min = np.r_[tlmin, imin, trmin]
    z_min = np.r_[x[lmin], x[imin], x[rmin]]
    return (t_max, z_max), (t_min, z_min)


def natural_spline(t, z, grid):
    """Evaluate the natural cubic spline through ``(t, z)`` at ``grid``.

    ``t`` must be strictly increasing. Second derivatives come from the
    usual tridiagonal system with zero end moments.
    """
    t = np.asarray(t, dtype=float)
    z = np.asarray(z, dtype=float)
    h = np.diff(t)
    n = t.size
    M = np.zeros(n)
    if n > 2:
        slope = np.diff(z) / h
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = h[1:-1]
        ab[1] = 2.0 * (h[:-1] + h[1:])
        ab[2, :-1] = h[1:-1]
        M[1:-1] = solve_banded((1, 1), ab, 6.0 * np.diff(slope))
    k = np.clip(np.searchsorted(t, grid, side="right") - 1, 0, n - 2)
    hk = h[k]
    a = t[k + 1] - grid
    b = grid - t[k]
    return ((M[k] * a ** 3 + M[k + 1] * b ** 3) / (6.0 * hk)
            + (z[k] / hk - M[k] * hk / 6.0) * a
            + (z[k + 1] / hk - M[k + 1] * hk / 6.0) * b)


def _spline(t, z, grid):
    t, keep = np.unique(t, return_index=True)
    return natural_spline(t, z[keep], grid)


def envelopes(x: np.ndarray, imax=None, imin=None) -> tuple[np.ndarray, np.ndarray]:
    """Upper and lower cubic-spline envelopes of ``x``."""
    if imax is None or imin is None:
        imax, imin = find_extrema(x)
    if imax.size < 2 or imin.size < 2:
        raise DataError("envelopes need at least two maxima and two minima")
    (tmax, zmax), (tmin, zmin) = _mirror_points(x, imax, imin)
    grid = np.arange(x.size, dtype=float)
    return _spline(tmax, zmax, grid), _spline(tmin, zmin, grid)


def _has_envelopes(x: np.ndarray) -> bool:
    imax, imin = find_extrema(x)
    return imax.size >= 2 and imin.size >= 2


def _stop_sift(h: np.ndarray, mean: np.ndarray, amp: np.ndarray, cfg: SiftConfig) -> bool:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(mean) / amp
    ratio[(amp == 0) & (mean == 0)] = 0.0
    ratio[(amp == 0) & (mean != 0)] = np.inf
    rilling = np.mean(ratio > cfg.theta1) <= cfg.alpha and not np.any(ratio > cfg.theta2)
    if not rilling:
        return False
    return abs(count_extrema(h) - count_zero_crossings(h)) <= 1


def sift(x: np.ndarray, cfg: SiftConfig = SiftConfig()) -> tuple[np.ndarray, int, bool]:
    """Extract one IMF. Returns ``(imf, iterations, converged)``."""
    h = x.copy()
    for it in range(cfg.max_sift_iters):
        imax, imin = find_extrema(h)
        if imax.size < 2 or imin.size < 2:
            return h, it, False
        upper, lower = envelopes(h, imax, imin)
        mean = 0.5 * (upper + lower)
        amp = 0.5 * np.abs(upper - lower)
        if _stop_sift(h, mean, amp, cfg):
            return h, it, True
        h = h - mean
    return h, cfg.max_sift_iters, False


def emd_decompose(signal, n_imfs: int = 3, cfg: SiftConfig = SiftConfig()) -> EmdResult:
    """Decompose ``signal`` into at most ``n_imfs`` IMFs plus a residue.

    Extraction stops early when the residue no longer has two maxima and two
    minima. ``sum(imfs) + residue`` equals the input by construction.
    """
    x = np.asarray(signal, dtype=float).ravel()
    if x.size < MIN_LENGTH:
        raise DataError(f"EMD needs at least {MIN_LENGTH} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite sample in EMD input")
    if int(n_imfs) != n_imfs or n_imfs < 1:
        raise DataError(f"n_imfs must be a positive integer, got {n_imfs!r}")

    imfs, iters, conv = [], [], []
    residue = x.copy()
    while len(imfs) < n_imfs and _has_envelopes(residue):
        imf, k, ok = sift(residue, cfg)
        if not ok:
            logger.debug("sift %d stopped after %d iterations without converging", len(imfs), k)
        imfs.append(imf)
        iters.append(k)
        conv.append(ok)
        residue = residue - imf
    arr = np.array(imfs) if imfs else np.empty((0, x.size))
    return EmdResult(arr, residue, cfg, tuple(iters), tuple(conv))


def emd_fixed(signal, n_imfs: int = 3, cfg: SiftConfig = SiftConfig()) -> np.ndarray:
    """Exactly ``n_imfs`` IMFs as an array, zero-filling any that do not exist."""
    res = emd_decompose(signal, n_imfs, cfg)
    out = np.zeros((n_imfs, res.residue.size))
    out[:res.n_imfs] = res.imfs
    if res.n_imfs < n_imfs:
        logger.warning("EMD found %d of %d IMFs; missing IMFs zero-filled", res.n_imfs, n_imfs)
    return out
