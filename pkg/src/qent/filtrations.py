"""t-filtrations, co-t-filtrations and the complexities built from them.

Both filtrations are summarized by a profile: a list of ``(k, weight)``
pairs with the value ``sum weight * exp(k t)``. For a complex ``x`` with
cohomology (resp. terms) in cohomological degree ``n`` the index is
``k = -n``, which makes ``delta_hat(shift(x, 1), t) = e^t delta_hat(x, t)``.

* t-filtration: weight of ``k`` is the length (total dimension) of
  ``H^{-k}(x)``; indices listed in decreasing order.
* co-t-filtration: the stupid filtration of the minimal complex; weight of
  ``k`` is the number of indecomposable summands of ``x^{-k}``; indices
  listed in increasing order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import complexes as cx
from .complexes import ChainMap, PerfComplex
from .errors import NotMinimal


@dataclass(frozen=True)
class FiltrationProfile:
    entries: tuple[tuple[int, int], ...]
    kind: str  # "t" or "cot"

    def __post_init__(self):
        ks = [k for k, _ in self.entries]
        if self.kind == "t" and any(a <= b for a, b in zip(ks, ks[1:])):
            raise ValueError("t-filtration indices must strictly decrease")
        if self.kind == "cot" and any(a >= b for a, b in zip(ks, ks[1:])):
            raise ValueError("co-t-filtration indices must strictly increase")
        if any(w <= 0 for _, w in self.entries):
            raise ValueError("filtration weights must be positive")

    @classmethod
    def from_weights(cls, weights: dict[int, int], kind: str) -> FiltrationProfile:
        items = sorted(((k, w) for k, w in weights.items() if w), reverse=(kind == "t"))
        return cls(tuple(items), kind)

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def degrees(self) -> list[int]:
        return [k for k, _ in self.entries]

    def total_weight(self) -> int:
        return sum(w for _, w in self.entries)

    def shifted(self, k: int) -> FiltrationProfile:
        return FiltrationProfile(tuple((d + k, w) for d, w in self.entries), self.kind)

    def value(self, t: float) -> float:
        return profile_value(self.as_dict(), t)

    def to_json(self) -> dict:
        return {"kind": self.kind, "entries": [{"degree": k, "weight": w} for k, w in self.entries]}


@dataclass(frozen=True)
class ComplexityValue:
    t: float
    value: float
    profile: FiltrationProfile


def profile_value(weights: dict[int, int], t: float) -> float:
    return math.fsum(w * math.exp(k * t) for k, w in weights.items())


def profile_log_value(weights: dict[int, int], t: float) -> float:
    """``log sum w e^{k t}`` evaluated without overflow."""
    if not weights:
        return -math.inf
    terms = np.array([math.log(w) + k * t for k, w in weights.items() if w > 0])
    top = terms.max()
    return float(top + math.log(math.fsum(np.exp(terms - top))))


def t_filtration(x: PerfComplex) -> FiltrationProfile:
    weights = {}
    for n in x.degrees:
        lam = sum(cx.cohomology_dims(x, n))
        if lam:
            weights[-n] = lam
    return FiltrationProfile.from_weights(weights, "t")


def cot_filtration(x: PerfComplex) -> FiltrationProfile:
    if not x.is_minimal():
        raise NotMinimal("co-t-filtration needs a minimal complex; call minimize first")
    return FiltrationProfile.from_weights({-n: len(vs) for n, vs in x.terms.items()}, "cot")


def delta_hat(x: PerfComplex, t: float) -> ComplexityValue:
    prof = t_filtration(x)
    return ComplexityValue(t, prof.value(t), prof)


def delta_check(x: PerfComplex, t: float) -> ComplexityValue:
    prof = cot_filtration(x)
    return ComplexityValue(t, prof.value(t), prof)


def delta_vect(dims: dict[int, int], t: float) -> float:
    """Complexity of a graded vector space, ``dims[n] = dim H^n``: ``sum dim H^{-k} e^{kt}``."""
    return math.fsum(d * math.exp(-n * t) for n, d in dims.items())


# -- Hom-dimension channels ------------------------------------------------------


def hom_a_weights(x: PerfComplex) -> dict[int, int]:
    """``{k: dim Hom^{-k}([A], x)}``."""
    prof = cx.hom_profile(cx.free_module(x.algebra), x)
    return {-j: d for j, d in prof.dims.items()}


def hom_b_weights(x: PerfComplex) -> dict[int, int]:
    """``{k: dim Hom^k(x, S)}`` with ``S`` the sum of the simples.

    The value ``sum_k w_k e^{kt}`` is ``sum_k dim Hom^{-k}(x, S) e^{-kt}``.
    """
    return dict(cx.hom_profile(x, cx.simples_sum(x.algebra)).dims)


def hom_b_lower_bound(x: PerfComplex, t: float) -> float:
    """``(1/n) sum_k dim Hom^{-k}(x, S) e^{-kt}``, a lower bound for ``delta_check``."""
    return profile_value(hom_b_weights(x), t) / x.algebra.n_vertices


# -- triangles -------------------------------------------------------------------


def triangle_subadditivity_check(d: PerfComplex, f: PerfComplex, g: ChainMap, t: float, rel_tol: float = 1e-12) -> bool:
    """Check ``delta(E) <= delta(D) + delta(F)`` for ``E = cone(g: F[-1] -> D)``.

    Tested for both the t and the co-t complexity.
    """
    e = cx.cone(g)
    d_min, f_min = cx.minimize(d), cx.minimize(f)

    def le(a, b):
        return a <= b * (1 + rel_tol) + rel_tol

    ok_hat = le(delta_hat(e, t).value, delta_hat(d, t).value + delta_hat(f, t).value)
    ok_check = le(delta_check(e, t).value, delta_check(d_min, t).value + delta_check(f_min, t).value)
    return ok_hat and ok_check


def random_triangle(alg, rng: np.random.Generator, **kw) -> tuple[PerfComplex, PerfComplex, ChainMap]:
    """Random ``(D, F, g)`` with ``g: F[-1] -> D`` a random degree-0 chain map."""
    d = cx.random_complex(alg, rng, **kw)
    f = cx.random_complex(alg, rng, **kw)
    g = cx.random_chain_map(cx.shift(f, -1), d, rng)
    return d, f, g
