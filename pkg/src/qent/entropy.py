"""Growth-rate estimation for the four entropy channels, plus verification harnesses.

Every channel turns an iterate ``x_N = f^N(g)`` into an exact integer
profile ``{k: w}`` with ``a_N(t) = sum w e^{k t}``:

========== ================================================
channel    profile of ``x_N``
========== ================================================
delta_hat  t-filtration: ``k -> length H^{-k}(x_N)``
delta_check co-t-filtration: ``k -> #summands of x_N^{-k}``
hom_A      ``k -> dim Hom^{-k}([A], x_N)``
hom_B      ``k -> dim Hom^{k}(x_N, S)``
========== ================================================

Profiles do not depend on ``t``; a whole ``t`` grid reuses them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import complexes as cx
from . import filtrations as fl
from . import functors as fn
from .algebra import PathAlgebra, quiver_from_spec
from .complexes import PerfComplex
from .errors import AuditFailure, BudgetExceeded, ZeroIterate
from .functors import FunctorExpr

CHANNELS = ("delta_hat", "delta_check", "hom_A", "hom_B")
HOM_CHANNELS = ("hom_A", "hom_B")
DEFAULT_NMAX = 30
DEFAULT_SUMMAND_CAP = 20000
DEFAULT_ENTRY_CAP = 50_000_000  # coefficients in one differential, about 400 MB


# -- iterates -------------------------------------------------------------------------


@dataclass
class IterateRun:
    """``f^N(g)`` for ``N = 0..len(iterates)-1``; ``truncated`` if a budget stopped it early."""

    iterates: list[PerfComplex]
    truncated: bool = False
    reason: str = ""


def iterate(
    f: FunctorExpr,
    g: PerfComplex,
    n_max: int,
    summand_cap: int = DEFAULT_SUMMAND_CAP,
    budget_s: float | None = None,
) -> IterateRun:
    x = cx.minimize(g)
    if x.is_zero():
        raise ZeroIterate("the generator is zero")
    out = [x]
    start = time.monotonic()
    for n in range(1, n_max + 1):
        try:
            with cx.size_limits(summand_cap, DEFAULT_ENTRY_CAP):
                x = fn.apply(f, x)
        except BudgetExceeded as exc:
            return IterateRun(out, True, f"N={n}: {exc}")
        if x.is_zero():
            raise ZeroIterate(f"{f}^{n}(g) is zero")
        if x.n_summands > summand_cap:
            return IterateRun(out, True, f"summand cap {summand_cap} exceeded at N={n}")
        out.append(x)
        if budget_s is not None and time.monotonic() - start > budget_s:
            return IterateRun(out, n < n_max, f"time budget exhausted at N={n}")
    return IterateRun(out)


def channel_profile(x: PerfComplex, channel: str) -> dict[int, int]:
    if channel == "delta_hat":
        return fl.t_filtration(x).as_dict()
    if channel == "delta_check":
        return fl.cot_filtration(cx.minimize(x)).as_dict()
    if channel == "hom_A":
        return fl.hom_a_weights(x)
    if channel == "hom_B":
        return fl.hom_b_weights(x)
    raise ValueError(f"unknown channel {channel!r}; expected one of {', '.join(CHANNELS)}")


# -- estimators ------------------------------------------------------------------------


def regression_slope(log_a: list[float]) -> float:
    """Least-squares slope of ``log a_N`` against ``N`` over the last half ``N > Nmax/2``."""
    n_max = len(log_a)
    lo = n_max // 2 + 1
    ns = np.arange(lo, n_max + 1, dtype=float)
    ys = np.array(log_a[lo - 1:], dtype=float)
    if len(ns) < 2:
        return float("nan")
    return float(np.polyfit(ns, ys, 1)[0])


def last_ratio(log_a: list[float]) -> float:
    if len(log_a) < 2:
        return float("nan")
    return float(log_a[-1] - log_a[-2])


def fekete_upper(log_a: list[float]) -> float:
    return float(min(v / n for n, v in enumerate(log_a, start=1)))


def exact_slope(profiles: list[dict[int, int]], t: float, max_period: int = 6, checks: int = 3) -> float | None:
    """Exact growth rate when the profiles are eventually periodic up to shifts.

    Looks for a period ``p`` such that, entrywise in sorted order, the profile
    of ``N + p`` is the profile of ``N`` with fixed weights and per-entry
    index increments ``s_i`` (the same for the last ``checks`` periods). Then
    ``a_{N+p}(t)`` is dominated by ``max_i s_i t`` and the rate is that over ``p``.
    """
    items = [sorted(p.items()) for p in profiles]
    for p in range(1, max_period + 1):
        if len(items) < p * (checks + 1):
            break
        diffs = None
        ok = True
        for j in range(checks):
            b = items[-1 - j * p]
            a = items[-1 - (j + 1) * p]
            if len(a) != len(b) or [w for _, w in a] != [w for _, w in b]:
                ok = False
                break
            d = [kb - ka for (ka, _), (kb, _) in zip(a, b)]
            if diffs is None:
                diffs = d
            elif d != diffs:
                ok = False
                break
        if ok and diffs:
            return max(s * t for s in diffs) / p
    return None


@dataclass
class GrowthSeries:
    t: float
    channel: str
    profiles: list[dict[int, int]]  # index N-1 holds the profile of f^N(g)
    truncated: bool = False
    a: list[float] = dc_field(init=False)
    log_a: list[float] = dc_field(init=False)
    regression_slope: float = dc_field(init=False)
    last_ratio: float = dc_field(init=False)
    fekete_upper: float | None = dc_field(init=False)
    exact_slope: float | None = dc_field(init=False)

    def __post_init__(self):
        self.log_a = [fl.profile_log_value(p, self.t) for p in self.profiles]
        if any(v == -math.inf for v in self.log_a):
            raise ZeroIterate(f"channel {self.channel} vanished on an iterate")
        self.a = [math.exp(v) if v < 700 else math.inf for v in self.log_a]
        self.regression_slope = regression_slope(self.log_a)
        self.last_ratio = last_ratio(self.log_a)
        self.fekete_upper = fekete_upper(self.log_a) if self.channel in HOM_CHANNELS and self.log_a else None
        self.exact_slope = exact_slope(self.profiles, self.t)

    @property
    def n_max(self) -> int:
        return len(self.profiles)

    @property
    def slope(self) -> float:
        """Best available estimate: exact if a periodic pattern was detected."""
        return self.exact_slope if self.exact_slope is not None else self.regression_slope

    def row(self) -> dict:
        return {
            "t": self.t,
            "channel": self.channel,
            "N_max": self.n_max,
            "regression_slope": self.regression_slope,
            "last_ratio": self.last_ratio,
            "fekete_upper": self.fekete_upper,
            "truncated": self.truncated,
        }


class SeriesCache:
    """Iterates and channel profiles for a fixed ``(f, g)``, extended on demand."""

    def __init__(self, f: FunctorExpr, g: PerfComplex, summand_cap: int = DEFAULT_SUMMAND_CAP, budget_s: float | None = None):
        self.f, self.g = f, g
        self.summand_cap = summand_cap
        self.budget_s = budget_s
        self.run: IterateRun | None = None
        self._profiles: dict[str, list[dict[int, int]]] = {}

    def iterates(self, n_max: int) -> IterateRun:
        if self.run is None or (len(self.run.iterates) <= n_max and not self.run.truncated):
            self.run = iterate(self.f, self.g, n_max, self.summand_cap, self.budget_s)
        return self.run

    def profiles(self, channel: str, n_max: int) -> tuple[list[dict[int, int]], bool]:
        run = self.iterates(n_max)
        have = self._profiles.setdefault(channel, [])
        xs = run.iterates[1:n_max + 1]
        for x in xs[len(have):]:
            have.append(channel_profile(x, channel))
        return have[: len(xs)], run.truncated and len(xs) < n_max

    def series(self, channel: str, t: float, n_max: int) -> GrowthSeries:
        profs, trunc = self.profiles(channel, n_max)
        return GrowthSeries(t, channel, profs, trunc)


def growth_series(f: FunctorExpr, g: PerfComplex, t: float, n_max: int = DEFAULT_NMAX, channel: str = "hom_A", **budget) -> GrowthSeries:
    return SeriesCache(f, g, **budget).series(channel, t, n_max)


def entropy_curve(f: FunctorExpr, g: PerfComplex, t_grid, n_max: int = DEFAULT_NMAX, channels=CHANNELS, **budget) -> list[GrowthSeries]:
    """One series per ``(t, channel)``, ``t`` outer, channels in the given order."""
    cache = SeriesCache(f, g, **budget)
    return [cache.series(ch, float(t), n_max) for t in t_grid for ch in channels]


def channel_disagreement(rows: list[GrowthSeries]) -> dict[float, float]:
    """Per ``t``, the spread of the regression slopes across channels."""
    by_t: dict[float, list[float]] = {}
    for r in rows:
        by_t.setdefault(r.t, []).append(r.regression_slope)
    return {t: (max(v) - min(v)) for t, v in by_t.items()}


# -- duality ----------------------------------------------------------------------------


@dataclass
class DualityRow:
    t: float
    h_a: float
    h_b: float
    gap: float
    exact_a: float | None
    exact_b: float | None


@dataclass
class DualityReport:
    functor: str
    rows: list[DualityRow]

    @property
    def max_gap(self) -> float:
        return max((r.gap for r in self.rows), default=0.0)


def duality_check(
    f: FunctorExpr,
    alg: PathAlgebra,
    t_grid,
    n_max: int = DEFAULT_NMAX,
    g_a: PerfComplex | None = None,
    g_b: PerfComplex | None = None,
    **budget,
) -> DualityReport:
    """Compare the hom_A channel of ``f`` at ``t`` with the hom_B channel of ``f^{-1}`` at ``-t``.

    Defaults: ``G_A = S`` (sum of the simples) and ``G_B = [A]``.
    """
    inv = fn.invert(f)
    g_a = cx.simples_sum(alg) if g_a is None else g_a
    g_b = cx.free_module(alg) if g_b is None else g_b
    ca = SeriesCache(f, g_a, **budget)
    cb = SeriesCache(inv, g_b, **budget)
    rows = []
    for t in t_grid:
        t = float(t)
        sa = ca.series("hom_A", t, n_max)
        sb = cb.series("hom_B", -t, n_max)
        rows.append(DualityRow(t, sa.regression_slope, sb.regression_slope, abs(sa.regression_slope - sb.regression_slope), sa.exact_slope, sb.exact_slope))
    return DualityReport(str(f), rows)


def opposite_series_pair(f: FunctorExpr, g: PerfComplex, n_max: int) -> tuple[list[dict[int, int]], list[dict[int, int]]]:
    """Two computations of ``k -> dim Hom^{-k}(f^N g, [A])`` for ``N = 1..n_max``.

    The first transports everything to the opposite algebra: it iterates the
    corresponding functor on ``g^*`` and reads the hom_A channel there. The
    second iterates ``f`` over ``A`` and measures ``Hom(-, [A])`` directly.
    Their values at ``t`` are the transported series at ``t`` and the direct
    contravariant series at ``-t``.
    """
    alg = g.algebra
    f_op = fn.to_opposite(f, alg)
    x = cx.minimize(g)
    y = cx.dualize(x)
    free = cx.free_module(alg)
    transported, direct = [], []
    for _ in range(n_max):
        x = fn.apply(f, x)
        y = fn.apply(f_op, y)
        if x.is_zero():
            raise ZeroIterate(f"{f} killed the generator")
        transported.append(fl.hom_a_weights(y))
        direct.append({-j: d for j, d in cx.hom_profile(x, free).dims.items()})
    return transported, direct


# -- semiorthogonal decomposition scenario ---------------------------------------------


def two_points(field=None) -> PathAlgebra:
    """Two vertices, no arrows: per(A) splits as per(K) x per(K)."""
    return quiver_from_spec(["1", "2"], [], field)


@dataclass
class SodRow:
    t: float
    h: float | None
    regression: float
    expected: float

    @property
    def ok(self) -> bool:
        return self.h is not None and self.h == self.expected


def sod_max_check(t_grid, n_max: int = 12, channel: str = "delta_hat") -> list[SodRow]:
    """``f`` shifts the first component by 1 and the second by 2; expect ``h_t = max(t, 2t)``."""
    alg = two_points()
    f = fn.ComponentShift(((0, 1), (1, 2)))
    cache = SeriesCache(f, cx.free_module(alg))
    out = []
    for t in t_grid:
        t = float(t)
        s = cache.series(channel, t, n_max)
        out.append(SodRow(t, s.exact_slope, s.regression_slope, max(t, 2 * t)))
    return out


# -- ST-triple audit ---------------------------------------------------------------------


@dataclass
class AuditReport:
    algebra: str
    clauses: list[tuple[str, bool, str]] = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.clauses)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.clauses.append((name, bool(ok), detail))


def st_triple_audit(alg: PathAlgebra, k_range: int = 3, raise_on_failure: bool = True) -> AuditReport:
    """Check the ST-triple data ``(per A, per A, [A])`` for a path algebra.

    * ``[A]`` is silting: ``Hom^k([A], [A]) = 0`` for ``k > 0``;
    * ``Hom^k(P_i, S_j) = delta_ij delta_k0`` for ``|k| <= k_range``;
    * ``Hom^*([A], S_j) = K`` in degree 0;
    * ``Hom^*(P_i, S) = K`` in degree 0, and every radical path
      ``P_i -> P_j`` induces zero on ``Hom^0(-, S)``.
    """
    rep = AuditReport(repr(alg))
    free = cx.free_module(alg)
    n = alg.n_vertices
    prof = cx.hom_profile(free, free)
    pos = {k: d for k, d in prof.dims.items() if k > 0}
    rep.add("silting", not pos, f"positive self-extensions {pos}" if pos else "")
    simples = [cx.projective_resolution(alg.simple(j)) for j in range(n)]
    table = np.zeros((2 * k_range + 1, n, n), dtype=np.int64)
    for i in range(n):
        p = cx.stalk(alg, [i])
        for j, s in enumerate(simples):
            dims = cx.hom_profile(p, s).dims
            for k in range(-k_range, k_range + 1):
                table[k + k_range, i, j] = dims.get(k, 0)
    expected = np.zeros_like(table)
    expected[k_range] = np.eye(n, dtype=np.int64)
    bad = [(k - k_range, i, j) for k, i, j in zip(*np.nonzero(table != expected))]
    rep.add("simple-top Hom table", not bad, f"mismatches at (k, i, j) = {bad[:5]}" if bad else "")
    for j, s in enumerate(simples):
        dims = cx.hom_profile(free, s).dims
        rep.add(f"Gamma_A(S_{alg.vertices[j]}) = K", dims == {0: 1}, str(dims))
    all_s = cx.simples_sum(alg)
    for i in range(n):
        dims = cx.hom_profile(cx.stalk(alg, [i]), all_s).dims
        rep.add(f"Gamma_B(P_{alg.vertices[i]}) = K", dims == {0: 1}, str(dims))
    for u, p in enumerate(alg.paths):
        # path u: j -> i is the morphism P_i -> P_j
        j, i = p.source, p.target
        src, tgt = cx.stalk(alg, [i]), cx.stalk(alg, [j])
        comp = alg.field.zeros((1, 1, alg.n_paths))
        comp[0, 0, u] = alg.field.one
        rk = cx.precompose_rank(cx.ChainMap(src, tgt, {0: comp}), all_s, 0)
        want = 0 if p.length else 1
        rep.add(f"Gamma_B({alg.path_name(u)})", rk == want, f"rank {rk}, expected {want}")
    if raise_on_failure and not rep.ok:
        failed = next(name for name, ok, _ in rep.clauses if not ok)
        raise AuditFailure(failed, rep)
    return rep


# -- Coxeter oracle ---------------------------------------------------------------------


def coxeter_matrix(alg: PathAlgebra) -> np.ndarray:
    """``Phi = -C^{-T} C`` for the Cartan matrix ``C`` (integer, unitriangular up to order)."""
    c = alg.cartan_matrix().astype(float)
    inv = np.rint(np.linalg.inv(c)).astype(np.int64)
    if not np.array_equal(inv @ alg.cartan_matrix(), np.eye(alg.n_vertices, dtype=np.int64)):
        raise ArithmeticError("Cartan matrix is not unimodular")
    return -inv.T @ alg.cartan_matrix()


def log_spectral_radius(m: np.ndarray, steps: int = 20000, tail: int = 64, seed: int = 0) -> float:
    """Power iteration: the mean log norm growth over the last ``tail`` steps."""
    rng = np.random.default_rng(seed)
    v = rng.random(m.shape[0]) + 0.5
    v /= np.linalg.norm(v)
    m = np.asarray(m, dtype=float)
    logs = []
    for _ in range(steps):
        w = m @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return -math.inf
        logs.append(math.log(nrm))
        v = w / nrm
    return float(np.mean(logs[-tail:]))


def coxeter_entropy(alg: PathAlgebra) -> float:
    """Reference value for the ``t = 0`` growth of ``nu``: log of the Coxeter spectral radius."""
    return log_spectral_radius(coxeter_matrix(alg))
