"""Exact linear algebra over a prime field or the rationals.

Matrices are plain numpy arrays: ``int64`` residues in ``[0, p)`` in prime
mode, ``object`` arrays of :class:`fractions.Fraction` in rational mode.
Every function takes the :class:`FieldSpec` explicitly.

Elimination order is deterministic (leftmost column first, then the lowest
row index), so results are reproducible bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import QentError

DEFAULT_PRIME = 1000003
_MAX_PRIME = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Ground field: ``F_p`` when ``prime`` is set, ``Q`` when it is None."""

    prime: int | None = DEFAULT_PRIME

    def __post_init__(self):
        p = self.prime
        if p is None:
            return
        if not (2**16 < p < _MAX_PRIME) or not is_prime(p):
            raise QentError(f"field prime must be a prime in (2^16, 2^31), got {p}")

    @classmethod
    def rational(cls) -> FieldSpec:
        return cls(None)

    @classmethod
    def from_env(cls, default: int | None = DEFAULT_PRIME) -> FieldSpec:
        value = os.environ.get("QENT_PRIME")
        if value:
            return cls(int(value))
        return cls(default)

    @property
    def is_rational(self) -> bool:
        return self.prime is None

    @property
    def dtype(self):
        return object if self.prime is None else np.int64

    def __str__(self) -> str:
        return "Q" if self.prime is None else f"F_{self.prime}"

    # -- element level -----------------------------------------------------

    def zeros(self, shape) -> np.ndarray:
        if self.prime is None:
            out = np.empty(shape, dtype=object)
            out.fill(Fraction(0))
            return out
        return np.zeros(shape, dtype=np.int64)

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one
        return out

    @property
    def one(self):
        return Fraction(1) if self.prime is None else 1

    def asarray(self, a) -> np.ndarray:
        """Coerce integers (or fractions, in rational mode) into field elements."""
        if self.prime is None:
            arr = np.array(a, dtype=object)
            flat = [Fraction(v) for v in arr.ravel()]
            out = np.empty(arr.shape, dtype=object)
            out.ravel()[:] = flat if flat else []
            return out
        arr = np.asarray(a)
        if arr.dtype == object:
            vals = [self.scalar(v) for v in arr.ravel()]
            arr = np.array(vals, dtype=np.int64).reshape(arr.shape)
        return np.asarray(arr, dtype=np.int64) % self.prime

    def reduce(self, a: np.ndarray) -> np.ndarray:
        if self.prime is None:
            return a
        return a % self.prime

    def scalar(self, v):
        if self.prime is None:
            return Fraction(v)
        if isinstance(v, Fraction):
            return v.numerator * pow(v.denominator, self.prime - 2, self.prime) % self.prime
        return int(v) % self.prime

    def inv(self, v):
        if self.prime is None:
            return 1 / Fraction(v)
        return pow(int(v), self.prime - 2, self.prime)

    def neg(self, a):
        return self.reduce(-a)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
            return self.zeros((a.shape[0], b.shape[1]))
        if self.prime is None:
            return np.dot(a, b)
        return kernels.matmul_modp(a, b, self.prime)

    def random(self, rng: np.random.Generator, shape, low: int = -3, high: int = 3) -> np.ndarray:
        return self.asarray(rng.integers(low, high + 1, size=shape))


# -- matrix operations -------------------------------------------------------


def _rref_rational(m: np.ndarray):
    w = np.array(m, dtype=object, copy=True)
    rows, cols = w.shape
    pivots: list[int] = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        piv = next((r for r in range(row, rows) if w[r, col] != 0), None)
        if piv is None:
            continue
        if piv != row:
            w[[row, piv]] = w[[piv, row]]
        inv = 1 / w[row, col]
        w[row] = w[row] * inv
        for r in range(rows):
            if r != row and w[r, col] != 0:
                w[r] = w[r] - w[r, col] * w[row]
        pivots.append(col)
        row += 1
    return w, pivots


def rref(m: np.ndarray, field: FieldSpec) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = np.asarray(m)
    if m.size == 0:
        return field.zeros(m.shape), []
    if field.is_rational:
        return _rref_rational(m)
    out, pivots = kernels.rref_modp(m, field.prime)
    return np.asarray(out), list(pivots)


def rank(m: np.ndarray, field: FieldSpec) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    if field.is_rational:
        return len(_rref_rational(m)[1])
    return int(kernels.rank_modp(m, field.prime))


def kernel_basis(m: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Rows spanning the right null space ``{v : m v = 0}``.

    One vector per free column, normalized to 1 at that column.
    """
    m = np.asarray(m)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return field.identity(cols)
    r, pivots = rref(m, field)
    pivset = set(pivots)
    free = [c for c in range(cols) if c not in pivset]
    out = field.zeros((len(free), cols))
    for k, f in enumerate(free):
        out[k, f] = field.one
        for i, pc in enumerate(pivots):
            out[k, pc] = field.reduce(-r[i, f])
    return out


def row_space_basis(rows: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Nonzero rows of the reduced echelon form."""
    if rows.shape[0] == 0:
        return rows
    r, pivots = rref(rows, field)
    return r[: len(pivots)]


def complement_rows(sub: np.ndarray, sup: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Rows of ``sup`` (reduced modulo ``sub``) completing ``sub`` to span ``sup``.

    Assumes ``rowspace(sub)`` is contained in ``rowspace(sup)``. The result is
    in reduced echelon form relative to the pivots of ``sub``.
    """
    if sup.shape[0] == 0:
        return sup
    if sub.shape[0] == 0:
        return row_space_basis(sup, field)
    return row_space_basis(reduce_modulo(sup, sub, field), field)


def reduce_modulo(vecs: np.ndarray, sub: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Reduce each row of ``vecs`` modulo the row space of ``sub``."""
    if sub.shape[0] == 0 or vecs.shape[0] == 0:
        return np.array(vecs, copy=True)
    b, bp = rref(sub, field)
    if not bp:
        return np.array(vecs, copy=True)
    # b[:, bp] is the identity, so one product clears every pivot column
    b = b[: len(bp)]
    return field.reduce(vecs - field.matmul(vecs[:, bp], b))


def solve_in_basis(basis: np.ndarray, vecs: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Coordinates of each row of ``vecs`` in terms of the rows of ``basis``.

    ``basis`` must have independent rows spanning every row of ``vecs``.
    """
    k = basis.shape[0]
    if vecs.shape[0] == 0:
        return field.zeros((0, k))
    aug = np.concatenate([basis.T, vecs.T], axis=1)
    r, pivots = rref(aug, field)
    if len(pivots) != k or (pivots and pivots[-1] >= k):
        raise QentError("vectors are not in the span of the basis")
    return np.array(r[:k, k:].T, copy=True)


def inverse(m: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Inverse of a square invertible matrix."""
    n = m.shape[0]
    aug = np.concatenate([np.asarray(m), field.identity(n)], axis=1)
    r, pivots = rref(aug, field)
    if pivots[:n] != list(range(n)) or len(pivots) < n or pivots[n - 1] >= n:
        raise QentError("matrix is singular")
    return np.array(r[:, n:], copy=True)


def split_invertible_block(m: np.ndarray, unit_mask: np.ndarray, field: FieldSpec):
    """One Gaussian cancellation at the first usable unit.

    Scans columns left to right and, within a column, rows from the lowest
    index; the first masked nonzero entry ``m[r, c]`` is the pivot. Returns
    ``((r, c), residual)`` where the residual is the Schur complement with
    row ``r`` and column ``c`` removed, or ``(None, m)`` if no pivot exists.
    """
    m = np.asarray(m)
    hits = np.argwhere((np.asarray(unit_mask, dtype=bool) & (m != 0)).T)
    if hits.size == 0:
        return None, m
    c, r = (int(v) for v in hits[0])
    inv = field.inv(m[r, c])
    col = np.delete(m[:, c], r)
    row = np.delete(m[r, :], c)
    rest = np.delete(np.delete(m, r, axis=0), c, axis=1)
    update = np.outer(col, row)
    if field.is_rational:
        residual = rest - update * inv
    else:
        residual = (rest - (update % field.prime) * inv) % field.prime
    return (r, c), residual


def certified_rank(m, primes: tuple[int, int] = (DEFAULT_PRIME, 2147483647)) -> int:
    """Rank over Q of an integer matrix.

    Computed modulo two primes; if they disagree (the matrix hit a bad prime)
    the rational computation decides.
    """
    r1 = rank(FieldSpec(primes[0]).asarray(m), FieldSpec(primes[0]))
    r2 = rank(FieldSpec(primes[1]).asarray(m), FieldSpec(primes[1]))
    if r1 == r2:
        return r1
    q = FieldSpec.rational()
    return rank(q.asarray(m), q)
