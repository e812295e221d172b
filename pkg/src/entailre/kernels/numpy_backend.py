"""Pure-NumPy kernels for the hashed bag-of-words scorer.

Candidate feature bags are packed CSR-style: idx holds bucket rows, cnt
the token counts, and offs[c]:offs[c+1] delimits candidate c. All floats
are float64; backends must agree to numerical (not bitwise) precision.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def forward_batch(idx, cnt, offs, W1, b1, w2, b2):
    """Score each packed candidate; returns (scores (C,), tanh activations (C, hidden))."""
    n_cand = offs.shape[0] - 1
    hidden = b1.shape[0]
    scores = np.empty(n_cand, dtype=np.float64)
    acts = np.empty((n_cand, hidden), dtype=np.float64)
    for c in range(n_cand):
        lo, hi = offs[c], offs[c + 1]
        a = W1[idx[lo:hi]].T @ cnt[lo:hi] + b1
        h = np.tanh(a)
        acts[c] = h
        scores[c] = w2 @ h + b2
    return scores, acts


def backward_batch(dscores, acts, idx, cnt, offs, w2):
    """Backpropagate dscores through the batch.

    Returns (dW1_vals (nnz, hidden), db1, dw2, db2) where dW1_vals[k] is
    the gradient block for row idx[k]; duplicate rows are summed at
    application time by scatter_add.
    """
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
        h = acts[c]
        db2 += g
        dw2 += g * h
        da = g * w2 * (1.0 - h * h)
        db1 += da
        lo, hi = offs[c], offs[c + 1]
        dvals[lo:hi] = cnt[lo:hi, None] * da[None, :]
    return dvals, db1, dw2, db2


def scatter_add(W1, rows, vals, scale):
    """W1[rows[k]] += scale * vals[k], accumulating duplicate rows."""
    if rows.shape[0]:
        np.add.at(W1, rows, scale * vals)
