# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gaussian elimination over F_p.

Entries are int64 residues in [0, p) with p < 2**31, so every product fits
in a signed 64-bit integer before reduction.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef inline int64_t _inv(int64_t a, int64_t p) nogil:
    cdef int64_t t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_modp(a, int64_t p):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    out = np.array(a, dtype=np.int64, order="C", copy=True)
    cdef int64_t[:, ::1] w = out
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1]
    cdef Py_ssize_t row = 0, col, r, c, piv
    cdef int64_t inv, f
    pivots = []
    for col in range(n):
        if row >= m:
            break
        piv = -1
        for r in range(row, m):
            if w[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != row:
            for c in range(col, n):
                w[row, c], w[piv, c] = w[piv, c], w[row, c]
        inv = _inv(w[row, col], p)
        for c in range(col, n):
            w[row, c] = (w[row, c] * inv) % p
        for r in range(m):
            if r == row:
                continue
            f = w[r, col]
            if f == 0:
                continue
            for c in range(col, n):
                w[r, c] = (w[r, c] - f * w[row, c]) % p
                if w[r, c] < 0:
                    w[r, c] += p
        pivots.append(col)
        row += 1
    return out, pivots


def rank_modp(a, int64_t p):
    """Rank by forward elimination only."""
    out = np.array(a, dtype=np.int64, order="C", copy=True)
    cdef int64_t[:, ::1] w = out
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1]
    cdef Py_ssize_t row = 0, col, r, c, piv
    cdef int64_t inv, f
    with nogil:
        for col in range(n):
            if row >= m:
                break
            piv = -1
            for r in range(row, m):
                if w[r, col] != 0:
                    piv = r
                    break
            if piv < 0:
                continue
            if piv != row:
                for c in range(col, n):
                    w[row, c], w[piv, c] = w[piv, c], w[row, c]
            inv = _inv(w[row, col], p)
            for c in range(col, n):
                w[row, c] = (w[row, c] * inv) % p
            for r in range(row + 1, m):
                f = w[r, col]
                if f == 0:
                    continue
                for c in range(col, n):
                    w[r, c] = (w[r, c] - f * w[row, c]) % p
                    if w[r, c] < 0:
                        w[r, c] += p
            row += 1
    return row


def matmul_modp(a, b, int64_t p):
    """(a @ b) mod p without intermediate overflow.

    Products are below 2**62, so a uint64 row accumulator absorbs several of
    them and is reduced only when it passes 2**63.
    """
    cdef const int64_t[:, ::1] x = np.ascontiguousarray(a, dtype=np.int64)
    cdef const int64_t[:, ::1] y = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t m = x.shape[0], k = x.shape[1], n = y.shape[1]
    out = np.zeros((m, n), dtype=np.int64)
    cdef int64_t[:, ::1] z = out
    acc_arr = np.zeros(n, dtype=np.uint64)
    cdef uint64_t[::1] acc = acc_arr
    cdef uint64_t up = <uint64_t>p
    cdef uint64_t limit = (<uint64_t>1) << 63
    cdef Py_ssize_t i, j, l
    cdef uint64_t xv
    with nogil:
        for i in range(m):
            for j in range(n):
                acc[j] = 0
            for l in range(k):
                xv = <uint64_t>x[i, l]
                if xv == 0:
                    continue
                for j in range(n):
                    acc[j] += xv * <uint64_t>y[l, j]
                    if acc[j] >= limit:
                        acc[j] %= up
            for j in range(n):
                z[i, j] = <int64_t>(acc[j] % up)
    return out
