"""
Three views of one channel segment
==================================

DWT subbands, EMD intrinsic mode functions and the SLBP code histogram of
a single 16 s window, and the statistics computed from each.
"""

import numpy as np

from eegend import dwt_multilevel, emd_decompose, idwt_multilevel, slbp_histogram, stat_features
from eegend.features import STAT_NAMES

fs = 128.0
t = np.arange(2048) / fs
rng = np.random.default_rng(0)
x = np.sin(2 * np.pi * 10 * t) + 0.6 * np.sin(2 * np.pi * 3 * t) + 0.3 * rng.standard_normal(t.size)

# db4, three levels: cA3, cD3, cD2, cD1
dec = dwt_multilevel(x, 3)
for name, band in zip(dec.names, dec.subbands):
    stats = "  ".join(f"{k}={v:.3f}" for k, v in zip(STAT_NAMES, stat_features(band)))
    print(f"{name:<4} len={band.size:<5} {stats}")
print("DWT round-trip error:", np.abs(idwt_multilevel(dec, x.size) - x).max())

# EMD: IMFs come out highest frequency first
res = emd_decompose(x, n_imfs=3)
for k, imf in enumerate(res.imfs, start=1):
    zc = np.count_nonzero(np.diff(np.sign(imf)))
    print(f"IMF{k}: ~{zc / 2 / (x.size / fs):.1f} Hz, sifts={res.sift_iterations[k - 1]}")
print("EMD reconstruction error:", np.abs(res.imfs.sum(0) + res.residue - x).max())

# SLBP with four neighbours per side: 31 codes
h = slbp_histogram(x)
print("SLBP coded samples:", h.n_coded_samples)
print("most common codes:", np.argsort(h.counts)[::-1][:5].tolist())
