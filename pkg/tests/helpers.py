"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from qent import complexes as cx
from qent import functors as fn

INVERTIBLE_ATOMS = ("Sigma", "Sigma^-1", "nu", "nu^-1")


def random_functor_text(alg, rng: np.random.Generator, max_atoms: int = 3, invertible_only: bool = False) -> str:
    atoms = list(INVERTIBLE_ATOMS)
    if not invertible_only:
        for v in alg.vertices:
            atoms += [f"T[P{v}]", f"T[S{v}]", f"Td[P{v}]", f"Td[S{v}]"]
    k = int(rng.integers(1, max_atoms + 1))
    return " * ".join(str(rng.choice(atoms)) for _ in range(k))


def nonzero_random_complex(alg, rng: np.random.Generator, **kw):
    while True:
        x = cx.random_complex(alg, rng, **kw)
        if not cx.minimize(x).is_zero():
            return x


def path_id(alg, *arrow_names: str) -> int:
    """Path id of the composite of the named arrows, in travel order."""
    names = [a[0] for a in alg.quiver.arrows]
    idx = tuple(names.index(a) for a in arrow_names)
    for u, p in enumerate(alg.paths):
        if p.arrows == idx:
            return u
    raise KeyError(arrow_names)


def map_between_projectives(alg, i, j, path: int, coeff: int = 1):
    """The chain map ``[P_i] -> [P_j]`` (both in degree 0) given by ``path``."""
    src, tgt = cx.stalk(alg, [i]), cx.stalk(alg, [j])
    comp = alg.field.zeros((1, 1, alg.n_paths))
    comp[0, 0, path] = alg.field.scalar(coeff)
    return cx.ChainMap(src, tgt, {0: comp})


__all__ = ["random_functor_text", "nonzero_random_complex", "path_id", "map_between_projectives", "fn"]
