from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qent import _kernels_py, kernels, scalars
from qent.errors import QentError
from qent.scalars import FieldSpec

P = FieldSpec()
Q = FieldSpec.rational()

small_int_matrices = st.tuples(st.integers(0, 9), st.integers(0, 9)).flatmap(
    lambda s: arrays(np.int64, s, elements=st.integers(-5, 5))
)


def test_field_validation():
    assert FieldSpec().prime == 1000003
    for bad in (7, 65536, 1000001 * 3, 2**31 + 11):
        with pytest.raises(QentError):
            FieldSpec(bad)


def test_from_env(monkeypatch):
    monkeypatch.setenv("QENT_PRIME", "1000033")
    assert FieldSpec.from_env().prime == 1000033
    monkeypatch.delenv("QENT_PRIME")
    assert FieldSpec.from_env().prime == 1000003


@pytest.mark.parametrize("field", [P, Q], ids=["prime", "rational"])
def test_rank_examples(field):
    assert scalars.rank(field.zeros((0, 0)), field) == 0
    assert scalars.rank(field.identity(3), field) == 3
    assert scalars.rank(field.asarray([[1, 2], [2, 4]]), field) == 1


@pytest.mark.parametrize("field", [P, Q], ids=["prime", "rational"])
def test_kernel_examples(field):
    assert scalars.kernel_basis(field.identity(2), field).shape[0] == 0
    assert scalars.kernel_basis(field.zeros((2, 3)), field).shape[0] == 3
    m = field.asarray([[1, 1, 0], [0, 0, 1]])
    k = scalars.kernel_basis(m, field)
    assert k.shape[0] == 1
    assert not np.any(field.reduce(m.dot(k[0])) != 0)
    v = k[0] * field.inv(k[0][0])
    assert list(field.reduce(v)) == list(field.asarray([1, -1, 0]))


def test_rational_entries_stay_fractions():
    m = Q.asarray([[Fraction(1, 2), 1], [1, 2]])
    r, piv = scalars.rref(m, Q)
    assert piv == [0]
    assert r[0, 1] == Fraction(2)


def test_split_invertible_block_examples():
    (piv, res) = scalars.split_invertible_block(P.asarray([[1]]), np.array([[True]]), P)
    assert piv == (0, 0) and res.shape == (0, 0)
    piv, res = scalars.split_invertible_block(P.asarray([[0]]), np.array([[True]]), P)
    assert piv is None and res.shape == (1, 1)
    x = 17
    mask = np.array([[True, False], [False, False]])
    piv, res = scalars.split_invertible_block(P.asarray([[1, 0], [x, 1]]), mask, P)
    assert piv == (0, 0)
    assert res.tolist() == [[1]]


def test_split_respects_mask_and_order():
    m = P.asarray([[0, 3], [2, 5]])
    piv, _ = scalars.split_invertible_block(m, np.ones((2, 2), bool), P)
    assert piv == (1, 0)  # leftmost column first, lowest row within it
    piv, _ = scalars.split_invertible_block(m, np.array([[False, True], [False, False]]), P)
    assert piv == (0, 1)


@given(small_int_matrices)
@settings(max_examples=200, deadline=None)
def test_rank_nullity(m):
    for field in (P, Q):
        a = field.asarray(m)
        assert scalars.rank(a, field) + scalars.kernel_basis(a, field).shape[0] == m.shape[1]


@given(small_int_matrices, st.randoms(use_true_random=False))
@settings(max_examples=100, deadline=None)
def test_rank_invariant_under_permutation_and_split(m, rnd):
    a = P.asarray(m)
    r = scalars.rank(a, P)
    rows = list(range(m.shape[0]))
    cols = list(range(m.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assert scalars.rank(a[np.ix_(rows, cols)], P) == r
    piv, res = scalars.split_invertible_block(a, np.ones(a.shape, bool), P)
    if piv is not None:
        assert scalars.rank(res, P) == r - 1


def test_rank_two_primes_agree_on_1000_matrices():
    rng = np.random.default_rng(7)
    primes = (1000003, 2147483647)
    disagreements = 0
    for _ in range(1000):
        r, c = rng.integers(1, 13, size=2)
        m = rng.integers(-5, 6, size=(r, c))
        r1 = scalars.rank(FieldSpec(primes[0]).asarray(m), FieldSpec(primes[0]))
        r2 = scalars.rank(FieldSpec(primes[1]).asarray(m), FieldSpec(primes[1]))
        if r1 != r2:
            disagreements += 1
        assert scalars.certified_rank(m, primes) == scalars.rank(Q.asarray(m), Q)
    assert disagreements == 0


def test_certified_rank_falls_back_on_bad_prime():
    p = 1000003
    m = np.array([[1, 1], [1, 1 + p]])  # singular mod p, rank 2 over Q
    assert scalars.rank(P.asarray(m), P) == 1
    assert scalars.certified_rank(m) == 2


def test_complement_and_solve():
    sup = P.asarray([[1, 0, 0], [0, 1, 0]])
    sub = P.asarray([[1, 1, 0]])
    comp = scalars.complement_rows(sub, sup, P)
    assert comp.shape[0] == 1
    both = np.concatenate([sub, comp])
    assert scalars.rank(both, P) == 2
    coords = scalars.solve_in_basis(sup, P.asarray([[3, 4, 0]]), P)
    assert coords.tolist() == [[3, 4]]
    with pytest.raises(QentError):
        scalars.solve_in_basis(sup, P.asarray([[0, 0, 1]]), P)


def test_inverse():
    m = P.asarray([[2, 1], [1, 1]])
    inv = scalars.inverse(m, P)
    assert P.matmul(m, inv).tolist() == [[1, 0], [0, 1]]
    with pytest.raises(QentError):
        scalars.inverse(P.asarray([[1, 2], [2, 4]]), P)


@pytest.mark.skipif(not kernels.compiled_available(), reason="compiled kernels not built")
def test_backends_agree():
    from qent import _kernels

    rng = np.random.default_rng(3)
    p = 1000003
    for _ in range(50):
        r, c = rng.integers(1, 30, size=2)
        a = rng.integers(0, p, size=(r, c))
        b = rng.integers(0, p, size=(c, int(rng.integers(1, 20))))
        ra, pa = _kernels.rref_modp(a, p)
        rb, pb = _kernels_py.rref_modp(a, p)
        assert pa == list(pb) and np.array_equal(ra, rb)
        assert _kernels.rank_modp(a, p) == _kernels_py.rank_modp(a, p) == len(pa)
        assert np.array_equal(_kernels.matmul_modp(a, b, p), _kernels_py.matmul_modp(a, b, p))
        exact = (a.astype(object).dot(b.astype(object))) % p
        assert np.array_equal(_kernels_py.matmul_modp(a, b, p), exact.astype(np.int64))


def test_backend_selection_env(monkeypatch):
    import importlib
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import qent.kernels as k; print(k.BACKEND)"],
        env={**__import__("os").environ, "QENT_PURE_PYTHON": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"
    assert importlib.import_module("qent.kernels").BACKEND in ("python", "cython")
