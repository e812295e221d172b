"""Numba-compiled kernels; same contract as numpy_backend.

Loops are written scalar-style so nopython compilation is total. Results
match the NumPy path to float64 round-off (summation order differs).
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def forward_batch(idx, cnt, offs, W1, b1, w2, b2):
    n_cand = offs.shape[0] - 1
    hidden = b1.shape[0]
    scores = np.empty(n_cand, dtype=np.float64)
    acts = np.empty((n_cand, hidden), dtype=np.float64)
    for c in range(n_cand):
        lo = offs[c]
        hi = offs[c + 1]
        s = b2
        for j in range(hidden):
            a = b1[j]
            for k in range(lo, hi):
                a += cnt[k] * W1[idx[k], j]
            h = np.tanh(a)
            acts[c, j] = h
            s += w2[j] * h
        scores[c] = s
    return scores, acts


@njit(cache=True)
def backward_batch(dscores, acts, idx, cnt, offs, w2):
    n_cand = offs.shape[0] - 1
    hidden = acts.shape[1]
    dvals = np.zeros((idx.shape[0], hidden), dtype=np.float64)
    db1 = np.zeros(hidden, dtype=np.float64)
    dw2 = np.zeros(hidden, dtype=np.float64)
    db2 = 0.0
    for c in range(n_cand):
        g = dscores[c]
        if g == 0.0:
            continue
        db2 += g
        lo = offs[c]
        hi = offs[c + 1]
        for j in range(hidden):
            h = acts[c, j]
            dw2[j] += g * h
            da = g * w2[j] * (1.0 - h * h)
            db1[j] += da
            for k in range(lo, hi):
                dvals[k, j] = cnt[k] * da
    return dvals, db1, dw2, db2


@njit(cache=True)
def scatter_add(W1, rows, vals, scale):
    hidden = vals.shape[1]
    for k in range(rows.shape[0]):
        r = rows[k]
        for j in range(hidden):
            W1[r, j] += scale * vals[k, j]
