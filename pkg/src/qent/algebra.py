"""Finite acyclic quivers, their path algebras, and quiver representations.

Conventions (fixed here, used everywhere else):

* A path is written in travel order; ``concat(u, v)`` is "first ``u``, then
  ``v``" and requires ``u.target == v.source``.
* A representation ``M`` has a space ``M_j`` per vertex and a matrix
  ``M_a : M_s -> M_t`` (shape ``dim M_t x dim M_s``) per arrow ``a : s -> t``.
* The indecomposable projective ``P_i`` has basis ``paths i -> j`` at vertex
  ``j``; an arrow acts by appending itself to the path.
* ``Hom(P_i, P_j)`` has basis the paths ``j -> i``: the path ``p`` sends
  ``e_i`` to ``p``. Composition of morphisms is ``g o f = concat(g, f)``.
* The injective ``I_i`` has, at vertex ``j``, the dual basis of ``paths j -> i``.

With these choices ``Hom(P_i, M) = M_i`` and ``Hom(M, I_i) = D(M_i)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .errors import CycleDetected, DuplicateLabel, ParseError, UnknownVertex
from .scalars import DEFAULT_PRIME, FieldSpec


@dataclass(frozen=True)
class Path:
    source: int
    target: int
    arrows: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.arrows)


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[tuple[str, int, int], ...]  # (label, source index, target index)

    def __post_init__(self):
        seen: set[str] = set()
        for v in self.vertices:
            if v in seen:
                raise DuplicateLabel(f"duplicate vertex label {v!r}")
            seen.add(v)
        names: set[str] = set()
        for name, _, _ in self.arrows:
            if name in names:
                raise DuplicateLabel(f"duplicate arrow label {name!r}")
            names.add(name)
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        n = len(self.vertices)
        out: list[list[int]] = [[] for _ in range(n)]
        for _, s, t in self.arrows:
            out[s].append(t)
        state = [0] * n  # 0 new, 1 on stack, 2 done
        for root in range(n):
            if state[root]:
                continue
            stack = [(root, iter(out[root]))]
            state[root] = 1
            while stack:
                v, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[v] = 2
                    stack.pop()
                elif state[nxt] == 1:
                    raise CycleDetected(f"directed cycle through vertex {self.vertices[nxt]!r}")
                elif state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, iter(out[nxt])))

    def opposite(self) -> Quiver:
        return Quiver(self.vertices, tuple((name, t, s) for name, s, t in self.arrows))

    def index(self, label) -> int:
        label = str(label)
        try:
            return self.vertices.index(label)
        except ValueError:
            raise UnknownVertex(f"unknown vertex {label!r}") from None


class PathAlgebra:
    """The path algebra of a finite acyclic quiver with its finite path basis.

    Paths are numbered deterministically: the trivial paths ``e_i`` first (id
    ``i``), then longer paths by length and arrow sequence.
    """

    def __init__(self, quiver: Quiver, field: FieldSpec | None = None):
        self.quiver = quiver
        self.field = field if field is not None else FieldSpec()
        n = len(quiver.vertices)
        paths = [Path(i, i, ()) for i in range(n)]
        frontier = list(paths)
        out: list[list[int]] = [[] for _ in range(n)]
        for a, (_, s, _) in enumerate(quiver.arrows):
            out[s].append(a)
        while frontier:
            nxt = []
            for p in frontier:
                for a in out[p.target]:
                    nxt.append(Path(p.source, quiver.arrows[a][2], p.arrows + (a,)))
            nxt.sort(key=lambda q: q.arrows)
            paths.extend(nxt)
            frontier = nxt
        self.paths: tuple[Path, ...] = tuple(paths)
        self.path_index = {p: k for k, p in enumerate(paths)}
        self._between: dict[tuple[int, int], list[int]] = {}
        for k, p in enumerate(paths):
            self._between.setdefault((p.source, p.target), []).append(k)
        triples = []
        for u, p in enumerate(paths):
            for v, q in enumerate(paths):
                if p.target == q.source:
                    z = self.path_index[Path(p.source, q.target, p.arrows + q.arrows)]
                    triples.append((u, v, z))
        self.triples = np.array(triples, dtype=np.int64).reshape(-1, 3)
        self._concat = {(u, v): z for u, v, z in triples}
        self._opposite: PathAlgebra | None = None

    # -- basic data ------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.quiver.vertices)

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    @property
    def dim(self) -> int:
        return len(self.paths)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.quiver.vertices

    def vertex(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if 0 <= label < self.n_vertices:
                return int(label)
            raise UnknownVertex(f"unknown vertex index {label}")
        return self.quiver.index(label)

    def paths_between(self, i: int, j: int) -> list[int]:
        """Ids of the paths from vertex ``i`` to vertex ``j``."""
        return self._between.get((i, j), [])

    def concat(self, u: int, v: int) -> int | None:
        return self._concat.get((u, v))

    def path_name(self, u: int) -> str:
        p = self.paths[u]
        if not p.arrows:
            return f"e_{self.vertices[p.source]}"
        return "*".join(self.quiver.arrows[a][0] for a in p.arrows)

    def __repr__(self) -> str:
        return f"PathAlgebra(vertices={list(self.vertices)}, arrows={len(self.quiver.arrows)}, dim={self.dim}, field={self.field})"

    def opposite(self) -> PathAlgebra:
        if self._opposite is None:
            op = PathAlgebra(self.quiver.opposite(), self.field)
            op._opposite = self
            self._opposite = op
        return self._opposite

    @cached_property
    def op_path_map(self) -> np.ndarray:
        """``op_path_map[u]`` is the id in the opposite algebra of the reversed path."""
        op = self.opposite()
        out = np.empty(self.n_paths, dtype=np.int64)
        for u, p in enumerate(self.paths):
            out[u] = op.path_index[Path(p.target, p.source, tuple(reversed(p.arrows)))]
        return out

    def hom_proj_basis(self, i, j) -> list[int]:
        """Basis of ``Hom(P_i, P_j)``: the paths ``j -> i`` (see module docs)."""
        return list(self.paths_between(self.vertex(j), self.vertex(i)))

    def cartan_matrix(self) -> np.ndarray:
        """``C[i, j] = #paths i -> j = dim (P_i)_j``."""
        n = self.n_vertices
        c = np.zeros((n, n), dtype=np.int64)
        for p in self.paths:
            c[p.source, p.target] += 1
        return c

    def connected_components(self) -> list[list[int]]:
        parent = list(range(self.n_vertices))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for _, s, t in self.quiver.arrows:
            parent[find(s)] = find(t)
        groups: dict[int, list[int]] = {}
        for v in range(self.n_vertices):
            groups.setdefault(find(v), []).append(v)
        return list(groups.values())

    # -- modules ---------------------------------------------------------------

    def simple(self, i) -> ModuleRep:
        i = self.vertex(i)
        dims = tuple(1 if j == i else 0 for j in range(self.n_vertices))
        return ModuleRep.zero_maps(self, dims)

    def projective(self, i) -> ModuleRep:
        i = self.vertex(i)
        f = self.field
        dims = tuple(len(self.paths_between(i, j)) for j in range(self.n_vertices))
        maps = {}
        for a, (_, s, t) in enumerate(self.quiver.arrows):
            m = f.zeros((dims[t], dims[s]))
            tgt = {u: r for r, u in enumerate(self.paths_between(i, t))}
            arrow_path = self.path_index[Path(s, t, (a,))]
            for c, q in enumerate(self.paths_between(i, s)):
                m[tgt[self._concat[(q, arrow_path)]], c] = f.one
            maps[a] = m
        return ModuleRep(self, dims, maps)

    def injective(self, i) -> ModuleRep:
        i = self.vertex(i)
        f = self.field
        dims = tuple(len(self.paths_between(j, i)) for j in range(self.n_vertices))
        maps = {}
        for a, (_, s, t) in enumerate(self.quiver.arrows):
            m = f.zeros((dims[t], dims[s]))
            src = {q: c for c, q in enumerate(self.paths_between(s, i))}
            arrow_path = self.path_index[Path(s, t, (a,))]
            # phi in D(paths s->i) maps to (u -> phi(a then u)) for u: t->i
            for r, u in enumerate(self.paths_between(t, i)):
                m[r, src[self._concat[(arrow_path, u)]]] = f.one
            maps[a] = m
        return ModuleRep(self, dims, maps)

    def nakayama_path_map(self, u: int) -> dict[int, np.ndarray]:
        """The Nakayama image ``I_i -> I_j`` of the morphism ``P_i -> P_j`` given by path ``u : j -> i``.

        Returned vertexwise: ``{l: matrix (dim (I_j)_l) x (dim (I_i)_l)}``; at
        vertex ``l`` a functional ``phi`` goes to ``q -> phi(concat(q, u))``.
        """
        p = self.paths[u]
        j, i = p.source, p.target
        f = self.field
        out = {}
        for l in range(self.n_vertices):
            rows = self.paths_between(l, j)
            cols = {r: c for c, r in enumerate(self.paths_between(l, i))}
            m = f.zeros((len(rows), len(cols)))
            for a, q in enumerate(rows):
                m[a, cols[self._concat[(q, u)]]] = f.one
            out[l] = m
        return out


@dataclass
class ModuleRep:
    """A finite-dimensional representation of the quiver of ``algebra``."""

    algebra: PathAlgebra
    dims: tuple[int, ...]
    maps: dict[int, np.ndarray] = dc_field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        q = self.algebra.quiver
        if len(self.dims) != len(q.vertices):
            raise ValueError("dimension vector has the wrong length")
        for a, (name, s, t) in enumerate(q.arrows):
            m = self.maps.get(a)
            if m is None:
                self.maps[a] = self.algebra.field.zeros((self.dims[t], self.dims[s]))
            elif m.shape != (self.dims[t], self.dims[s]):
                raise ValueError(f"map for arrow {name!r} has shape {m.shape}, expected {(self.dims[t], self.dims[s])}")

    @classmethod
    def zero_maps(cls, algebra: PathAlgebra, dims) -> ModuleRep:
        return cls(algebra, tuple(dims), {})

    @property
    def length(self) -> int:
        """Composition length; every simple is one-dimensional at one vertex."""
        return sum(self.dims)

    def is_zero(self) -> bool:
        return self.length == 0

    def map_ranks(self) -> dict[int, int]:
        from .scalars import rank

        return {a: rank(m, self.algebra.field) for a, m in self.maps.items()}

    def act(self, u: int) -> np.ndarray:
        """Matrix of the path ``u`` acting ``M_source -> M_target``."""
        f = self.algebra.field
        p = self.algebra.paths[u]
        out = f.identity(self.dims[p.source])
        for a in p.arrows:
            out = f.matmul(self.maps[a], out)
        return out


# -- file format ---------------------------------------------------------------


def load_quiver(text: str, field: FieldSpec | None = None) -> PathAlgebra:
    """Parse the JSON quiver format into a :class:`PathAlgebra`.

    ``{"vertices": ["1","2"], "arrows": [{"name":"a","from":"1","to":"2"}],
    "prime": 1000003}``; ``"rational": true`` selects exact rationals.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid quiver JSON at line {exc.lineno}: {exc.msg}", exc.pos) from None
    if not isinstance(data, dict) or "vertices" not in data:
        raise ParseError("quiver file must be an object with a 'vertices' list")
    vertices = tuple(str(v) for v in data["vertices"])
    index: dict[str, int] = {}
    for k, v in enumerate(vertices):
        if v in index:
            raise DuplicateLabel(f"duplicate vertex label {v!r}")
        index[v] = k
    arrows = []
    for k, arr in enumerate(data.get("arrows", [])):
        try:
            name, src, tgt = str(arr["name"]), str(arr["from"]), str(arr["to"])
        except (KeyError, TypeError):
            raise ParseError(f"arrow #{k} needs 'name', 'from' and 'to'") from None
        for end in (src, tgt):
            if end not in index:
                raise ParseError(f"arrow {name!r} refers to unknown vertex {end!r}")
        arrows.append((name, index[src], index[tgt]))
    if field is None:
        if data.get("rational"):
            field = FieldSpec.rational()
        else:
            field = FieldSpec.from_env(int(data.get("prime", DEFAULT_PRIME)))
    return PathAlgebra(Quiver(vertices, tuple(arrows)), field)


def quiver_from_spec(vertices, arrows, field: FieldSpec | None = None) -> PathAlgebra:
    """Build from Python data: ``arrows`` is a list of ``(name, from, to)`` labels."""
    payload = {
        "vertices": [str(v) for v in vertices],
        "arrows": [{"name": n, "from": str(s), "to": str(t)} for n, s, t in arrows],
    }
    return load_quiver(json.dumps(payload), field)


def linear_a(n: int, field: FieldSpec | None = None) -> PathAlgebra:
    """``1 -> 2 -> ... -> n``."""
    return quiver_from_spec(range(1, n + 1), [(f"a{k}", k, k + 1) for k in range(1, n)], field)


def kronecker(field: FieldSpec | None = None, arrows: int = 2) -> PathAlgebra:
    return quiver_from_spec([1, 2], [(chr(ord("a") + k), 1, 2) for k in range(arrows)], field)
