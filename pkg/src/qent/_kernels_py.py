"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and results; row operations are vectorized per pivot.
"""

from __future__ import annotations

import numpy as np


def rref_modp(a, p: int):
    w = np.array(a, dtype=np.int64) % p
    m, n = w.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        nz = np.flatnonzero(w[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            w[[row, piv]] = w[[piv, row]]
        inv = pow(int(w[row, col]), p - 2, p)
        w[row] = (w[row] * inv) % p
        f = w[:, col].copy()
        f[row] = 0
        hit = np.flatnonzero(f)
        if hit.size:
            w[hit] = (w[hit] - np.outer(f[hit], w[row])) % p
        pivots.append(col)
        row += 1
    return w, pivots


def rank_modp(a, p: int) -> int:
    w = np.array(a, dtype=np.int64) % p
    m, n = w.shape
    row = 0
    for col in range(n):
        if row >= m:
            break
        nz = np.flatnonzero(w[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            w[[row, piv]] = w[[piv, row]]
        inv = pow(int(w[row, col]), p - 2, p)
        w[row] = (w[row] * inv) % p
        below = w[row + 1:, col]
        hit = np.flatnonzero(below)
        if hit.size:
            idx = hit + row + 1
            w[idx] = (w[idx] - np.outer(w[idx, col], w[row])) % p
        row += 1
    return row


def matmul_modp(a, b, p: int):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    # split b to keep partial sums below 2**63 for long inner dimensions
    if a.shape[1] * (p - 1) ** 2 < 2**62:
        return (a @ b) % p
    lo = b & 0xFFFF
    hi = b >> 16
    return (((a @ hi) % p) * 65536 + (a @ lo)) % p
