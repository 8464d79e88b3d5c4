"""Bounded complexes of projectives over a path algebra, i.e. objects of per(A).

A complex stores, per degree ``n``, the tuple of vertices whose projectives
``P_i`` make up the term, and per degree the differential ``x^n -> x^{n+1}``
as an array ``D[r, c, u]``: the coefficient of path ``u`` in the component
from source summand ``c`` to target summand ``r``. Shift convention:
``shift(x, k)^n = x^{n+k}`` with differential multiplied by ``(-1)^k``, so the
object ``S1[2]`` of the object DSL lives two degrees lower than ``S1``.
"""

from __future__ import annotations

import re
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import scalars
from .algebra import ModuleRep, Path, PathAlgebra
from .errors import BudgetExceeded, InvalidChainMap, NotAComplex, ParseError, QentError
from .scalars import FieldSpec


# -- size limits -----------------------------------------------------------------

_LIMITS: ContextVar[tuple[int | None, int | None]] = ContextVar("qent_limits", default=(None, None))


@contextmanager
def size_limits(summands: int | None = None, entries: int | None = None):
    """Within the block, building a complex beyond ``summands`` total summands,
    or a differential with more than ``entries`` coefficients, raises
    :class:`BudgetExceeded` before any allocation happens."""
    token = _LIMITS.set((summands, entries))
    try:
        yield
    finally:
        _LIMITS.reset(token)


def check_size(alg: PathAlgebra, terms: dict) -> None:
    summands, entries = _LIMITS.get()
    if summands is None and entries is None:
        return
    sizes = {n: len(v) for n, v in terms.items()}
    total = sum(sizes.values())
    if summands is not None and total > summands:
        raise BudgetExceeded(f"{total} summands exceed the cap of {summands}")
    if entries is not None:
        worst = max((sizes[n] * sizes.get(n + 1, 0) for n in sizes), default=0) * alg.n_paths
        if worst > entries:
            raise BudgetExceeded(f"a differential with {worst} coefficients exceeds the cap of {entries}")


# -- path-valued matrix helpers ------------------------------------------------


def compose(alg: PathAlgebra, g: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Composite ``g o f`` of path-valued matrices ``g: (R, M, P)``, ``f: (M, C, P)``."""
    fld = alg.field
    out = fld.zeros((g.shape[0], f.shape[1], alg.n_paths))
    if g.shape[1] == 0 or out.size == 0:
        return out
    used_g = np.flatnonzero(np.any(g != 0, axis=(0, 1)))
    used_f = np.flatnonzero(np.any(f != 0, axis=(0, 1)))
    if used_g.size == 0 or used_f.size == 0:
        return out
    ug, uf = set(used_g.tolist()), set(used_f.tolist())
    for u, v, z in alg.triples:
        if u in ug and v in uf:
            out[:, :, z] = fld.reduce(out[:, :, z] + fld.matmul(g[:, :, u], f[:, :, v]))
    return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class PerfComplex:
    """An immutable bounded complex of indecomposable projectives."""

    __slots__ = ("algebra", "terms", "diffs", "_minimal")

    def __init__(self, algebra: PathAlgebra, terms: dict, diffs: dict | None = None):
        fld = algebra.field
        clean_terms = {int(n): tuple(int(v) for v in vs) for n, vs in terms.items() if len(vs)}
        clean_diffs: dict[int, np.ndarray] = {}
        diffs = diffs or {}
        P = algebra.n_paths
        for n in clean_terms:
            if n + 1 not in clean_terms:
                continue
            shape = (len(clean_terms[n + 1]), len(clean_terms[n]), P)
            d = diffs.get(n)
            if d is None:
                d = fld.zeros(shape)
            else:
                d = np.array(d, dtype=fld.dtype, copy=True)
                if d.shape != shape:
                    raise ValueError(f"differential in degree {n} has shape {d.shape}, expected {shape}")
                d = fld.reduce(d)
            clean_diffs[n] = _freeze(d)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "terms", clean_terms)
        object.__setattr__(self, "diffs", clean_diffs)
        object.__setattr__(self, "_minimal", None)

    def __setattr__(self, name, value):
        raise AttributeError("PerfComplex is immutable")

    # -- access --------------------------------------------------------------

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    @property
    def degrees(self) -> list[int]:
        return sorted(self.terms)

    def term(self, n: int) -> tuple[int, ...]:
        return self.terms.get(n, ())

    def diff(self, n: int) -> np.ndarray:
        d = self.diffs.get(n)
        if d is None:
            return self.field.zeros((len(self.term(n + 1)), len(self.term(n)), self.algebra.n_paths))
        return d

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def n_summands(self) -> int:
        return sum(len(v) for v in self.terms.values())

    def term_multiset(self) -> dict[int, tuple[int, ...]]:
        return {n: tuple(sorted(v)) for n, v in self.terms.items()}

    def vertices_touched(self) -> set[int]:
        return {v for vs in self.terms.values() for v in vs}

    def __eq__(self, other) -> bool:
        if not isinstance(other, PerfComplex) or other.algebra is not self.algebra:
            return NotImplemented
        if self.terms != other.terms:
            return False
        return all(np.array_equal(self.diffs[n], other.diffs[n]) for n in self.diffs)

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self) -> str:
        labels = self.algebra.vertices
        parts = [f"{n}:" + "+".join(f"P{labels[v]}" for v in self.terms[n]) for n in self.degrees]
        return f"PerfComplex({', '.join(parts) or '0'})"

    # -- invariants ------------------------------------------------------------

    def is_complex(self) -> bool:
        for n in self.diffs:
            if n + 1 in self.diffs:
                if np.any(compose(self.algebra, self.diffs[n + 1], self.diffs[n]) != 0):
                    return False
        return True

    def check(self) -> PerfComplex:
        if not self.is_complex():
            raise NotAComplex("d o d != 0")
        return self

    def is_minimal(self) -> bool:
        """No differential component has a nonzero coefficient on a trivial path."""
        if self._minimal is None:
            nv = self.algebra.n_vertices
            ok = all(not np.any(d[:, :, :nv] != 0) for d in self.diffs.values())
            object.__setattr__(self, "_minimal", ok)
        return self._minimal

    def euler_dims(self) -> np.ndarray:
        """Alternating sum of the dimension vectors of the terms."""
        alg = self.algebra
        proj = alg.cartan_matrix()
        out = np.zeros(alg.n_vertices, dtype=np.int64)
        for n, vs in self.terms.items():
            for v in vs:
                out += (-1) ** (n % 2) * proj[v]
        return out


def zero_complex(alg: PathAlgebra) -> PerfComplex:
    return PerfComplex(alg, {})


def stalk(alg: PathAlgebra, vertices, degree: int = 0) -> PerfComplex:
    """One-term complex ``P_{v1} + ... + P_{vm}`` placed in ``degree``."""
    return PerfComplex(alg, {degree: tuple(alg.vertex(v) for v in vertices)})


def free_module(alg: PathAlgebra) -> PerfComplex:
    """The one-term complex ``[A] = P_1 + ... + P_n``."""
    return stalk(alg, range(alg.n_vertices))


# -- structural operations -----------------------------------------------------


def shift(x: PerfComplex, k: int) -> PerfComplex:
    if k == 0:
        return x
    sign = -1 if k % 2 else 1
    terms = {n - k: vs for n, vs in x.terms.items()}
    diffs = {n - k: x.field.reduce(sign * d) for n, d in x.diffs.items()}
    out = PerfComplex(x.algebra, terms, diffs)
    object.__setattr__(out, "_minimal", x._minimal)
    return out


def direct_sum(*xs: PerfComplex) -> PerfComplex:
    if not xs:
        raise ValueError("direct_sum needs at least one complex")
    alg = xs[0].algebra
    fld = alg.field
    degrees = sorted({n for x in xs for n in x.terms})
    terms = {n: tuple(v for x in xs for v in x.term(n)) for n in degrees}
    check_size(alg, terms)
    diffs = {}
    for n in degrees:
        if n + 1 not in terms or not terms[n + 1]:
            continue
        d = fld.zeros((len(terms[n + 1]), len(terms[n]), alg.n_paths))
        r0 = c0 = 0
        for x in xs:
            R, C = len(x.term(n + 1)), len(x.term(n))
            if n in x.diffs:
                d[r0:r0 + R, c0:c0 + C] = x.diffs[n]
            r0 += R
            c0 += C
        diffs[n] = d
    return PerfComplex(alg, terms, diffs)


def contractible(alg: PathAlgebra, vertex, degree: int = 0) -> PerfComplex:
    """``P_v --id--> P_v`` in degrees ``degree, degree + 1``."""
    v = alg.vertex(vertex)
    d = alg.field.zeros((1, 1, alg.n_paths))
    d[0, 0, v] = alg.field.one
    return PerfComplex(alg, {degree: (v,), degree + 1: (v,)}, {degree: d})


def _eliminate_block(alg: PathAlgebra, terms: dict, diffs: dict, n: int, vertex: int) -> bool:
    """Cancel a maximal invertible block of ``d^n`` among the summands at ``vertex``.

    The scalar part ``U`` (coefficients of ``e_vertex``) is scanned in echelon
    order: leftmost independent columns, then the lowest independent rows.
    The update is the Schur complement ``D - C U_SS^{-1} R``. For a path
    algebra of an acyclic quiver ``End(P_v) = K``, so the update creates no
    new scalar coefficients and one pass per vertex suffices.
    """
    fld = alg.field
    D = diffs[n]
    cols = [c for c, v in enumerate(terms[n]) if v == vertex]
    rows = [r for r, v in enumerate(terms[n + 1]) if v == vertex]
    if not cols or not rows:
        return False
    U = D[np.ix_(rows, cols)][:, :, vertex]
    if not np.any(U != 0):
        return False
    _, pc = scalars.rref(U, fld)
    _, pr = scalars.rref(np.ascontiguousarray(U[:, pc].T), fld)
    s_rows = [rows[i] for i in pr]
    s_cols = [cols[j] for j in pc]
    W = scalars.inverse(np.ascontiguousarray(U[np.ix_(pr, pc)]), fld)  # cols x rows
    C = D[:, s_cols, :]
    R = D[s_rows, :, :]
    CW = fld.zeros(C.shape)
    for u in np.flatnonzero(np.any(C != 0, axis=(0, 1))):
        CW[:, :, u] = fld.matmul(np.ascontiguousarray(C[:, :, u]), W)
    D = fld.reduce(D - compose(alg, CW, R))
    D = np.delete(np.delete(D, s_rows, axis=0), s_cols, axis=1)
    diffs[n] = D
    if n - 1 in diffs:
        diffs[n - 1] = np.delete(diffs[n - 1], s_cols, axis=0)
    if n + 1 in diffs:
        diffs[n + 1] = np.delete(diffs[n + 1], s_rows, axis=1)
    drop_c, drop_r = set(s_cols), set(s_rows)
    terms[n] = tuple(v for i, v in enumerate(terms[n]) if i not in drop_c)
    terms[n + 1] = tuple(v for i, v in enumerate(terms[n + 1]) if i not in drop_r)
    return True


def minimize(x: PerfComplex, check: bool = True) -> PerfComplex:
    """Homotopy-equivalent minimal complex obtained by Gaussian elimination.

    Degrees are processed from the lowest up and vertices in index order;
    cancelling inside ``d^n`` only deletes rows of ``d^{n-1}`` and columns
    of ``d^{n+1}``, which cannot create new invertible components there.
    """
    if x.is_minimal():
        return x
    if check:
        x.check()
    alg = x.algebra
    terms = {n: tuple(v) for n, v in x.terms.items()}
    diffs = {n: np.array(d, copy=True) for n, d in x.diffs.items()}
    for n in sorted(diffs):
        for v in range(alg.n_vertices):
            if diffs[n].size:
                _eliminate_block(alg, terms, diffs, n, v)
    out = PerfComplex(alg, terms, diffs)
    object.__setattr__(out, "_minimal", True)
    return out


# -- chain maps ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChainMap:
    """Degree-0 chain map; ``components[n]`` has shape ``(|target^n|, |source^n|, P)``."""

    source: PerfComplex
    target: PerfComplex
    components: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        alg = self.source.algebra
        fld = alg.field
        comps = {}
        for n in self.source.terms:
            if n not in self.target.terms:
                continue
            shape = (len(self.target.term(n)), len(self.source.term(n)), alg.n_paths)
            c = self.components.get(n)
            c = fld.zeros(shape) if c is None else fld.reduce(np.array(c, dtype=fld.dtype, copy=True))
            if c.shape != shape:
                raise InvalidChainMap(f"component in degree {n} has shape {c.shape}, expected {shape}")
            comps[n] = _freeze(c)
        object.__setattr__(self, "components", comps)

    def component(self, n: int) -> np.ndarray:
        c = self.components.get(n)
        if c is None:
            fld = self.source.field
            return fld.zeros((len(self.target.term(n)), len(self.source.term(n)), self.source.algebra.n_paths))
        return c

    def is_chain_map(self) -> bool:
        alg = self.source.algebra
        for n in set(self.source.terms) | set(self.target.terms):
            lhs = compose(alg, self.target.diff(n), self.component(n))
            rhs = compose(alg, self.component(n + 1), self.source.diff(n))
            if lhs.shape != rhs.shape or np.any(alg.field.reduce(lhs - rhs) != 0):
                return False
        return True

    def is_zero(self) -> bool:
        return all(not np.any(c != 0) for c in self.components.values())

    def scalar_part(self, n: int) -> np.ndarray:
        """Coefficients on trivial paths: the map modulo the radical in degree ``n``."""
        c = self.component(n)
        src = self.source.term(n)
        out = self.source.field.zeros((c.shape[0], c.shape[1]))
        for j, v in enumerate(src):
            out[:, j] = c[:, j, v]
        return out


def zero_map(x: PerfComplex, y: PerfComplex) -> ChainMap:
    return ChainMap(x, y, {})


def identity_map(x: PerfComplex) -> ChainMap:
    fld = x.field
    comps = {}
    for n, vs in x.terms.items():
        c = fld.zeros((len(vs), len(vs), x.algebra.n_paths))
        for k, v in enumerate(vs):
            c[k, k, v] = fld.one
        comps[n] = c
    return ChainMap(x, x, comps)


def cone(f: ChainMap, minimal: bool = True, check: bool = True) -> PerfComplex:
    """``cone(f)^n = source^{n+1} + target^n`` with ``d = [[-d_s, 0], [f, d_t]]``."""
    if check and not f.is_chain_map():
        raise InvalidChainMap("map does not commute with the differentials")
    x, y = f.source, f.target
    alg = x.algebra
    fld = alg.field
    degrees = sorted({n - 1 for n in x.terms} | set(y.terms))
    terms = {n: x.term(n + 1) + y.term(n) for n in degrees}
    check_size(alg, terms)
    diffs = {}
    for n in degrees:
        if not terms.get(n + 1):
            continue
        xs1, xs2, yn, yn1 = len(x.term(n + 1)), len(x.term(n + 2)), len(y.term(n)), len(y.term(n + 1))
        d = fld.zeros((xs2 + yn1, xs1 + yn, alg.n_paths))
        if xs2 and xs1:
            d[:xs2, :xs1] = fld.reduce(-x.diff(n + 1))
        if yn1 and xs1:
            d[xs2:, :xs1] = f.component(n + 1)
        if yn1 and yn:
            d[xs2:, xs1:] = y.diff(n)
        diffs[n] = d
    out = PerfComplex(alg, terms, diffs)
    return minimize(out, check=False) if minimal else out


def shift_map(f: ChainMap, k: int) -> ChainMap:
    """``Sigma^k f`` with the convention ``(Sigma^k f)^n = f^{n+k}``."""
    return ChainMap(shift(f.source, k), shift(f.target, k), {n - k: c for n, c in f.components.items()})


# -- Hom complexes ---------------------------------------------------------------


@dataclass(frozen=True)
class HomProfile:
    """``dims[k] = dim Hom^k(source, target)``; only nonzero entries stored."""

    dims: dict

    def total(self) -> int:
        return sum(self.dims.values())

    def shifted(self, k: int) -> HomProfile:
        return HomProfile({d + k: v for d, v in self.dims.items()})

    def get(self, k: int) -> int:
        return self.dims.get(k, 0)


def _path_ends(alg: PathAlgebra):
    src = np.array([p.source for p in alg.paths], dtype=np.int64)
    tgt = np.array([p.target for p in alg.paths], dtype=np.int64)
    return src, tgt


class _HomSpace:
    """Basis bookkeeping for the Hom complex ``Hom^*(x, y)``."""

    def __init__(self, x: PerfComplex, y: PerfComplex):
        if x.algebra is not y.algebra:
            raise QentError("complexes live over different algebras")
        self.x, self.y = x, y
        self.alg = x.algebra
        self._idx: dict[int, tuple[dict, int]] = {}
        self._src, self._tgt = _path_ends(self.alg)

    def index(self, k: int):
        """Per source degree ``n``, an index array ``(|y^{n+k}|, |x^n|, P)`` (-1 = invalid)."""
        got = self._idx.get(k)
        if got is not None:
            return got
        blocks = {}
        total = 0
        for n in self.x.degrees:
            yv = self.y.term(n + k)
            xv = self.x.term(n)
            if not yv:
                continue
            valid = (self._src[None, None, :] == np.array(yv)[:, None, None]) & (
                self._tgt[None, None, :] == np.array(xv)[None, :, None]
            )
            idx = np.full(valid.shape, -1, dtype=np.int64)
            cnt = int(valid.sum())
            idx[valid] = np.arange(total, total + cnt)
            total += cnt
            blocks[n] = idx
        self._idx[k] = (blocks, total)
        return blocks, total

    def differential(self, k: int) -> np.ndarray:
        """Matrix of ``D f = d_y f - (-1)^k f d_x`` from ``Hom^k`` to ``Hom^{k+1}``."""
        alg, fld = self.alg, self.alg.field
        src_blocks, n_src = self.index(k)
        tgt_blocks, n_tgt = self.index(k + 1)
        M = fld.zeros((n_tgt, n_src))
        if n_src == 0 or n_tgt == 0:
            return M
        sign = -1 if k % 2 == 0 else 1
        for n, S in src_blocks.items():
            # d_y o f : block n -> block n of Hom^{k+1}
            T = tgt_blocks.get(n)
            dy = self.y.diffs.get(n + k)
            if T is not None and dy is not None:
                self._accumulate(M, dy, S, T, left=True, sign=1)
            # f o d_x : block n -> block n-1 of Hom^{k+1}
            T = tgt_blocks.get(n - 1)
            dx = self.x.diffs.get(n - 1)
            if T is not None and dx is not None:
                self._accumulate(M, dx, S, T, left=False, sign=sign)
        return fld.reduce(M)

    def _accumulate(self, M, d, S, T, left: bool, sign: int) -> None:
        alg = self.alg
        used = set(np.flatnonzero(np.any(d != 0, axis=(0, 1))).tolist())
        for u, v, z in alg.triples:
            if left:
                w, fu = u, v  # concat(w, fu) = z, w from d_y
            else:
                fu, w = u, v  # concat(fu, w) = z, w from d_x
            if w not in used:
                continue
            a, b = np.nonzero(d[:, :, w])
            if a.size == 0:
                continue
            vals = d[a, b, w] * sign
            if left:
                # f at (r=b, c) path fu -> (r'=a, c) path z
                src = S[b, :, fu]
                tgt = T[a, :, z]
            else:
                # f at (r, c=a) path fu -> (r, c''=b) path z
                src = S[:, a, fu].T
                tgt = T[:, b, z].T
            mask = src >= 0
            if not mask.any():
                continue
            rows_i, cols_i = np.nonzero(mask)
            np.add.at(M, (tgt[rows_i, cols_i], src[rows_i, cols_i]), vals[rows_i])

    def vector_to_map(self, k: int, vec: np.ndarray, target: PerfComplex) -> ChainMap:
        blocks, _ = self.index(k)
        fld = self.alg.field
        comps = {}
        for n, idx in blocks.items():
            c = fld.zeros(idx.shape)
            mask = idx >= 0
            c[mask] = vec[idx[mask]]
            comps[n] = c
        return ChainMap(self.x, target, comps)

    def map_to_vector(self, k: int, f: ChainMap) -> np.ndarray:
        blocks, total = self.index(k)
        vec = self.alg.field.zeros(total)
        for n, idx in blocks.items():
            mask = idx >= 0
            vec[idx[mask]] = f.component(n)[mask]
        return vec


def _hom_range(x: PerfComplex, y: PerfComplex) -> range:
    if x.is_zero() or y.is_zero():
        return range(0)
    return range(min(y.terms) - max(x.terms), max(y.terms) - min(x.terms) + 1)


def hom_profile(x: PerfComplex, y: PerfComplex) -> HomProfile:
    return hom_complex(x, y, cocycles=False)[0]


def hom_complex(x: PerfComplex, y: PerfComplex, cocycles: bool = True, degrees=None):
    """Dimensions of ``Hom^k(x, y)`` in the homotopy category, with cocycle bases.

    ``cocycles[k]`` is a list of chain maps ``x -> shift(y, k)`` whose classes
    form a basis of ``Hom^k``; representatives are chosen by echelon reduction
    against the coboundaries, so they are deterministic.
    """
    space = _HomSpace(x, y)
    fld = x.field
    ks = list(_hom_range(x, y)) if degrees is None else sorted(degrees)
    dims: dict[int, int] = {}
    bases: dict[int, list[ChainMap]] = {}
    mats: dict[int, np.ndarray] = {}

    def mat(k):
        if k not in mats:
            mats[k] = space.differential(k)
        return mats[k]

    ranks: dict[int, int] = {}

    def rk(k):
        if k not in ranks:
            ranks[k] = scalars.rank(mat(k), fld)
        return ranks[k]

    for k in ks:
        _, n_k = space.index(k)
        if n_k == 0:
            continue
        d = n_k - rk(k) - rk(k - 1)
        if d:
            dims[k] = d
        if cocycles and d:
            Z = scalars.kernel_basis(mat(k), fld)
            B = np.ascontiguousarray(mat(k - 1).T)
            H = scalars.complement_rows(B, Z, fld)
            target = shift(y, k)
            bases[k] = [space.vector_to_map(k, H[i], target) for i in range(H.shape[0])]
    return HomProfile(dims), bases


def chain_maps_basis(x: PerfComplex, y: PerfComplex) -> list[ChainMap]:
    """Basis of all degree-0 chain maps ``x -> y`` (not modulo homotopy)."""
    space = _HomSpace(x, y)
    _, n0 = space.index(0)
    if n0 == 0:
        return []
    Z = scalars.kernel_basis(space.differential(0), x.field)
    return [space.vector_to_map(0, Z[i], y) for i in range(Z.shape[0])]


def random_chain_map(x: PerfComplex, y: PerfComplex, rng: np.random.Generator) -> ChainMap:
    basis = chain_maps_basis(x, y)
    fld = x.field
    if not basis:
        return zero_map(x, y)
    coeffs = fld.random(rng, len(basis))
    comps = {}
    for n in x.terms:
        if n not in y.terms:
            continue
        acc = fld.zeros((len(y.term(n)), len(x.term(n)), x.algebra.n_paths))
        for c, f in zip(coeffs, basis):
            acc = fld.reduce(acc + c * f.component(n))
        comps[n] = acc
    return ChainMap(x, y, comps)


def precompose_rank(f: ChainMap, y: PerfComplex, k: int) -> int:
    """Rank of ``Hom^k(target, y) -> Hom^k(source, y)``, ``g -> g o f``, on cohomology."""
    x_t, x_s = f.target, f.source
    _, bases = hom_complex(x_t, y, degrees=[k])
    reps = bases.get(k, [])
    if not reps:
        return 0
    alg = x_s.algebra
    fld = alg.field
    space = _HomSpace(x_s, y)
    target = shift(y, k)
    vecs = []
    for g in reps:
        comps = {n: compose(alg, g.component(n), f.component(n)) for n in x_s.terms if n in x_t.terms}
        vecs.append(space.map_to_vector(k, ChainMap(x_s, target, comps)))
    V = np.stack(vecs) if vecs else fld.zeros((0, space.index(k)[1]))
    B = np.ascontiguousarray(space.differential(k - 1).T)
    return scalars.rank(scalars.reduce_modulo(V, B, fld), fld)


# -- cohomology ----------------------------------------------------------------


def _vertex_basis(x: PerfComplex, n: int, j: int):
    """Index array ``(|x^n|, P)`` numbering the basis ``(summand, path -> j)`` of ``(x^n)_j``."""
    alg = x.algebra
    src, tgt = _path_ends(alg)
    vs = np.array(x.term(n), dtype=np.int64)
    valid = (src[None, :] == vs[:, None]) & (tgt[None, :] == j)
    idx = np.full(valid.shape, -1, dtype=np.int64)
    cnt = int(valid.sum())
    idx[valid] = np.arange(cnt)
    return idx, cnt


def _vertex_differential(x: PerfComplex, n: int, j: int) -> np.ndarray:
    alg = x.algebra
    fld = alg.field
    S, ns = _vertex_basis(x, n, j)
    T, nt = _vertex_basis(x, n + 1, j)
    M = fld.zeros((nt, ns))
    d = x.diffs.get(n)
    if d is None or ns == 0 or nt == 0:
        return M
    for w, q, z in alg.triples:
        a, b = np.nonzero(d[:, :, w])
        if a.size == 0:
            continue
        src = S[b, q]
        tgt = T[a, z]
        ok = (src >= 0) & (tgt >= 0)
        if ok.any():
            np.add.at(M, (tgt[ok], src[ok]), d[a[ok], b[ok], w])
    return fld.reduce(M)


def cohomology_dims(x: PerfComplex, n: int) -> tuple[int, ...]:
    fld = x.field
    out = []
    for j in range(x.algebra.n_vertices):
        _, size = _vertex_basis(x, n, j)
        if size == 0:
            out.append(0)
            continue
        out.append(size - scalars.rank(_vertex_differential(x, n, j), fld) - scalars.rank(_vertex_differential(x, n - 1, j), fld))
    return tuple(out)


def cohomology_module(x: PerfComplex, n: int) -> ModuleRep:
    """``H^n(x)`` as a quiver representation, computed vertexwise."""
    alg = x.algebra
    fld = alg.field
    bases = {}
    images = {}
    for j in range(alg.n_vertices):
        _, size = _vertex_basis(x, n, j)
        if size == 0:
            bases[j] = fld.zeros((0, 0))
            images[j] = fld.zeros((0, 0))
            continue
        Z = scalars.kernel_basis(_vertex_differential(x, n, j), fld)
        B = np.ascontiguousarray(_vertex_differential(x, n - 1, j).T)
        images[j] = B
        bases[j] = scalars.complement_rows(B, Z, fld)
    dims = tuple(bases[j].shape[0] for j in range(alg.n_vertices))
    maps = {}
    for a, (_, s, t) in enumerate(alg.quiver.arrows):
        if dims[s] == 0 or dims[t] == 0:
            continue
        arrow_path = alg.path_index[Path(s, t, (a,))]
        Ss, _ = _vertex_basis(x, n, s)
        St, nt = _vertex_basis(x, n, t)
        # (summand c, path q : v -> s) goes to (c, concat(q, arrow))
        act = fld.zeros((nt, Ss.max() + 1))
        for c in range(Ss.shape[0]):
            for q in np.flatnonzero(Ss[c] >= 0):
                act[St[c, alg.concat(int(q), arrow_path)], Ss[c, q]] = fld.one
        images_t = fld.matmul(act, np.ascontiguousarray(bases[s].T)).T
        reduced = scalars.reduce_modulo(fld.reduce(images_t), images[t], fld)
        coords = scalars.solve_in_basis(bases[t], reduced, fld)
        maps[a] = np.ascontiguousarray(coords.T)
    return ModuleRep(alg, dims, maps)


# -- resolutions -----------------------------------------------------------------


def standard_resolution(m: ModuleRep) -> PerfComplex:
    """``0 -> (+)_{a:j->k} P_k (x) M_j -> (+)_j P_j (x) M_j -> M -> 0``, not minimized.

    Degree 0 summands are ordered by vertex then basis vector of ``M_j``;
    degree -1 summands by arrow then basis vector of ``M_{source}``.
    """
    alg = m.algebra
    fld = alg.field
    q = alg.quiver
    top = [(j, b) for j in range(alg.n_vertices) for b in range(m.dims[j])]
    low = [(a, b) for a, (_, s, _) in enumerate(q.arrows) for b in range(m.dims[s])]
    pos_top = {key: i for i, key in enumerate(top)}
    terms = {0: tuple(j for j, _ in top), -1: tuple(q.arrows[a][2] for a, _ in low)}
    d = fld.zeros((len(top), len(low), alg.n_paths))
    for c, (a, b) in enumerate(low):
        _, s, t = q.arrows[a]
        arrow_path = alg.path_index[Path(s, t, (a,))]
        d[pos_top[(s, b)], c, arrow_path] = fld.one
        col = m.maps[a][:, b]
        for w in np.flatnonzero(col != 0):
            d[pos_top[(t, int(w))], c, t] = fld.reduce(-col[w])
    return PerfComplex(alg, terms, {-1: d})


def standard_resolution_map(src: ModuleRep, tgt: ModuleRep, phi: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Scalar components of the chain map induced by ``phi = {vertex: matrix}``.

    Returns ``{0: (|top_tgt|, |top_src|), -1: (|low_tgt|, |low_src|)}`` matrices in
    the summand orderings of :func:`standard_resolution`.
    """
    alg = src.algebra
    fld = alg.field
    q = alg.quiver

    def offsets(m):
        top, off = {}, 0
        for j in range(alg.n_vertices):
            top[j] = off
            off += m.dims[j]
        low, off2 = {}, 0
        for a, (_, s, _) in enumerate(q.arrows):
            low[a] = off2
            off2 += m.dims[s]
        return top, off, low, off2

    ts, ns, ls, nls = offsets(src)
    tt, nt, lt, nlt = offsets(tgt)
    c0 = fld.zeros((nt, ns))
    c1 = fld.zeros((nlt, nls))
    for j in range(alg.n_vertices):
        if src.dims[j] and tgt.dims[j]:
            c0[tt[j]:tt[j] + tgt.dims[j], ts[j]:ts[j] + src.dims[j]] = phi[j]
    for a, (_, s, _) in enumerate(q.arrows):
        if src.dims[s] and tgt.dims[s]:
            c1[lt[a]:lt[a] + tgt.dims[s], ls[a]:ls[a] + src.dims[s]] = phi[s]
    return {0: c0, -1: c1}


def projective_resolution(m: ModuleRep) -> PerfComplex:
    """Minimal projective resolution (two terms, hereditary) in degrees -1, 0."""
    return minimize(standard_resolution(m), check=False)


# -- duality -----------------------------------------------------------------------


def dualize(x: PerfComplex) -> PerfComplex:
    """``Hom_A(x, A)``: a complex over the opposite algebra, degrees negated."""
    alg = x.algebra
    op = alg.opposite()
    perm = alg.op_path_map
    terms = {-n: vs for n, vs in x.terms.items()}
    diffs = {}
    for n, d in x.diffs.items():
        # d: x^n -> x^{n+1} becomes (x^{n+1})^* -> (x^n)^*, i.e. degree -n-1 -> -n
        t = np.transpose(d, (1, 0, 2))
        out = op.field.zeros(t.shape)
        out[:, :, perm] = t
        diffs[-n - 1] = out
    res = PerfComplex(op, terms, diffs)
    object.__setattr__(res, "_minimal", x._minimal)
    return res


# -- random generation ---------------------------------------------------------


def _radical_space(alg: PathAlgebra, rows: tuple[int, ...], cols: tuple[int, ...]):
    """Valid positions ``(r, c, u)`` of radical components ``P_{cols[c]} -> P_{rows[r]}``."""
    out = []
    for r, vr in enumerate(rows):
        for c, vc in enumerate(cols):
            for u in alg.paths_between(vr, vc):
                if alg.paths[u].length:
                    out.append((r, c, u))
    return out


def random_complex(
    alg: PathAlgebra,
    rng: np.random.Generator,
    max_summands: int = 4,
    max_degrees: int = 4,
    low_degree: int = -2,
) -> PerfComplex:
    """A random minimal complex with nonzero terms.

    Each differential is a random element of the space of radical maps
    ``x^n -> x^{n+1}`` killed by composing with the previous differential.
    """
    fld = alg.field
    n_deg = int(rng.integers(1, max_degrees + 1))
    start = int(rng.integers(low_degree, low_degree + 3))
    terms = {}
    for n in range(start, start + n_deg):
        k = int(rng.integers(0, max_summands + 1))
        terms[n] = tuple(int(v) for v in rng.integers(0, alg.n_vertices, size=k))
    if not any(terms.values()):
        terms[start] = (int(rng.integers(0, alg.n_vertices)),)
    diffs = {}
    prev = None
    for n in range(start, start + n_deg - 1):
        rows, cols = terms[n + 1], terms[n]
        space = _radical_space(alg, rows, cols)
        shape = (len(rows), len(cols), alg.n_paths)
        if not space:
            prev = fld.zeros(shape)
            diffs[n] = prev
            continue
        if prev is not None and prev.size and np.any(prev != 0):
            cols_mat = []
            for r, c, u in space:
                e = fld.zeros(shape)
                e[r, c, u] = fld.one
                cols_mat.append(compose(alg, e, prev).ravel())
            K = scalars.kernel_basis(np.stack(cols_mat, axis=1), fld)
        else:
            K = fld.identity(len(space))
        d = fld.zeros(shape)
        if K.shape[0]:
            coeff = fld.random(rng, K.shape[0])
            mask = rng.random(K.shape[0]) < 0.7
            vec = fld.reduce((coeff * mask) @ K) if not fld.is_rational else (coeff * mask).dot(K)
            for (r, c, u), val in zip(space, vec):
                d[r, c, u] = val
        diffs[n] = d
        prev = d
    return PerfComplex(alg, terms, diffs)


def scramble(x: PerfComplex, rng: np.random.Generator, extra: int = 2, moves: int = 6) -> PerfComplex:
    """Add contractible summands and apply random elementary automorphisms.

    The result is isomorphic (as a complex) to ``x`` plus contractibles, but
    generally not minimal.
    """
    alg = x.algebra
    fld = alg.field
    y = x
    degs = x.degrees or [0]
    for _ in range(extra):
        n = int(rng.choice(degs)) - int(rng.integers(0, 2))
        y = direct_sum(y, contractible(alg, int(rng.integers(0, alg.n_vertices)), n))
    terms = {n: tuple(v) for n, v in y.terms.items()}
    diffs = {n: np.array(d, copy=True) for n, d in y.diffs.items()}
    P = alg.n_paths
    for _ in range(moves):
        n = int(rng.choice(sorted(terms)))
        vs = terms[n]
        if len(vs) < 2:
            continue
        s, t = (int(v) for v in rng.choice(len(vs), size=2, replace=False))
        paths = alg.paths_between(vs[t], vs[s])
        if not paths:
            continue
        u = int(rng.choice(paths))
        lam = fld.scalar(int(rng.integers(1, 5)))
        E = fld.zeros((1, 1, P))
        E[0, 0, u] = lam
        # g = id + E_{t<-s}; rows of d^{n-1}: row t += E o row s
        if n - 1 in diffs:
            D = diffs[n - 1]
            D[t:t + 1] = fld.reduce(D[t:t + 1] + compose(alg, E, D[s:s + 1]))
        # columns of d^n: col s -= col t o E
        if n in diffs:
            D = diffs[n]
            D[:, s:s + 1] = fld.reduce(D[:, s:s + 1] - compose(alg, D[:, t:t + 1], E))
    return PerfComplex(alg, terms, diffs)


# -- object DSL ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<atom>[PSI])(?P<label>[A-Za-z0-9_.]+)|(?P<num>-?\d+)|(?P<op>[+\[\]()])|(?P<zero>0))")


@dataclass(frozen=True)
class ObjAtom:
    kind: str  # "P", "S" or "I"
    label: str


@dataclass(frozen=True)
class ObjSum:
    parts: tuple


@dataclass(frozen=True)
class ObjShift:
    base: object
    k: int


class _ObjParser:
    def __init__(self, text: str, offset: int = 0):
        self.text = text
        self.pos = 0
        self.offset = offset

    def error(self, msg: str):
        raise ParseError(msg, self.pos + self.offset, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        node = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return node

    def expr(self):
        parts = [self.term()]
        while self.peek() == "+":
            self.pos += 1
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else ObjSum(tuple(parts))

    def term(self):
        node = self.atom()
        while self.peek() == "[":
            self.pos += 1
            self.skip()
            m = re.match(r"-?\d+", self.text[self.pos:])
            if not m:
                self.error("expected an integer shift")
            self.pos += m.end()
            if self.peek() != "]":
                self.error("expected ']'")
            self.pos += 1
            node = ObjShift(node, int(m.group()))
        return node

    def atom(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return node
        if c == "0":
            self.pos += 1
            return ObjSum(())
        m = re.match(r"([PSI])([A-Za-z0-9_.]+)", self.text[self.pos:])
        if not m:
            self.error("expected an object atom P<i>, S<i> or I<i>")
        self.pos += m.end()
        return ObjAtom(m.group(1), m.group(2))


def parse_object(text: str, offset: int = 0):
    """Parse the object DSL: ``P1 + S2[1] + (I1 + P2)[-2]``."""
    return _ObjParser(text, offset).parse()


def build_object(node, alg: PathAlgebra) -> PerfComplex:
    if isinstance(node, str):
        node = parse_object(node)
    if isinstance(node, ObjAtom):
        v = alg.vertex(node.label)
        if node.kind == "P":
            return stalk(alg, [v])
        if node.kind == "S":
            return projective_resolution(alg.simple(v))
        return projective_resolution(alg.injective(v))
    if isinstance(node, ObjShift):
        return shift(build_object(node.base, alg), node.k)
    if isinstance(node, ObjSum):
        if not node.parts:
            return zero_complex(alg)
        return direct_sum(*(build_object(p, alg) for p in node.parts))
    raise TypeError(f"not an object expression: {node!r}")


def object_text(node) -> str:
    if isinstance(node, ObjAtom):
        return f"{node.kind}{node.label}"
    if isinstance(node, ObjShift):
        inner = object_text(node.base)
        if isinstance(node.base, ObjSum):
            inner = f"({inner})"
        return f"{inner}[{node.k}]"
    if isinstance(node, ObjSum):
        return " + ".join(object_text(p) for p in node.parts) if node.parts else "0"
    return str(node)


def simples_sum(alg: PathAlgebra) -> PerfComplex:
    """``S = (+)_i`` minimal resolution of the simple at ``i``."""
    return direct_sum(*(projective_resolution(alg.simple(i)) for i in range(alg.n_vertices)))
