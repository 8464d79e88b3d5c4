"""Endofunctors of per(A) acting on minimal complexes, and their DSL.

Grammar::

    expr := term { "*" term }
    term := atom [ "^" int ]
    atom := "Sigma" | "nu" | "nu^-1" | "T[" obj "]" | "Td[" obj "]" | "id" | "(" expr ")"

``f * g`` applies ``g`` first. ``T[F]`` is the twist
``X -> cone(sum_k Hom^k(F, X) (x) F[-k] -> X)`` and ``Td[F]`` its dual
``X -> cone(X -> sum_k Hom^k(X, F)^* (x) F[k])[-1]``. ``nu`` is the derived
Nakayama (Serre) functor.
"""

from __future__ import annotations

import re
import weakref
from dataclasses import dataclass

import numpy as np

from . import complexes as cx
from .algebra import PathAlgebra
from .complexes import ChainMap, PerfComplex
from .errors import NegativePowerOfNonInvertible, NonInvertibleFunctor, ParseError

# -- AST ---------------------------------------------------------------------------


class FunctorExpr:
    def __mul__(self, other: FunctorExpr) -> FunctorExpr:
        return compose(self, other)

    def __pow__(self, n: int) -> FunctorExpr:
        return power(self, n)


@dataclass(frozen=True)
class Id(FunctorExpr):
    def __str__(self):
        return "id"


@dataclass(frozen=True)
class Shift(FunctorExpr):
    k: int

    def __str__(self):
        return "Sigma" if self.k == 1 else f"Sigma^{self.k}"


@dataclass(frozen=True)
class Serre(FunctorExpr):
    def __str__(self):
        return "nu"


@dataclass(frozen=True)
class SerreInv(FunctorExpr):
    def __str__(self):
        return "nu^-1"


@dataclass(frozen=True, eq=False)
class Twist(FunctorExpr):
    """``obj`` is an object-DSL node or an explicit :class:`PerfComplex`."""

    obj: object

    def __str__(self):
        return f"T[{_obj_str(self.obj)}]"

    def __eq__(self, other):
        return type(other) is type(self) and _obj_key(self.obj) == _obj_key(other.obj)

    def __hash__(self):
        return hash((type(self).__name__, _obj_key(self.obj)))


@dataclass(frozen=True, eq=False)
class DualTwist(Twist):
    def __str__(self):
        return f"Td[{_obj_str(self.obj)}]"


@dataclass(frozen=True)
class ComponentShift(FunctorExpr):
    """Shift each connected component by its own amount: ``shifts[v]`` for the component of vertex ``v``."""

    shifts: tuple[tuple[int, int], ...]

    def __str__(self):
        return "ComponentShift(" + ", ".join(f"{v}:{k}" for v, k in self.shifts) + ")"


@dataclass(frozen=True)
class Compose(FunctorExpr):
    parts: tuple[FunctorExpr, ...]  # leftmost applied last

    def __str__(self):
        return " * ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Power(FunctorExpr):
    base: FunctorExpr
    n: int

    def __str__(self):
        return f"{_wrap(self.base, power=True)}^{self.n}"


def _wrap(f: FunctorExpr, power: bool = False) -> str:
    s = str(f)
    if isinstance(f, Compose) or (power and isinstance(f, (Power, SerreInv)) or (power and isinstance(f, Shift) and f.k != 1)):
        return f"({s})"
    return s


def _obj_str(obj) -> str:
    if isinstance(obj, PerfComplex):
        return repr(obj)
    return cx.object_text(obj)


def _obj_key(obj):
    if isinstance(obj, PerfComplex):
        return ("complex", id(obj))
    return ("dsl", obj)


def is_invertible(f: FunctorExpr) -> bool:
    if isinstance(f, Twist):
        return False
    if isinstance(f, Compose):
        return all(is_invertible(p) for p in f.parts)
    if isinstance(f, Power):
        return is_invertible(f.base)
    return True


def compose(*parts: FunctorExpr) -> FunctorExpr:
    flat: list[FunctorExpr] = []
    for p in parts:
        if isinstance(p, Compose):
            flat.extend(p.parts)
        elif not isinstance(p, Id):
            flat.append(p)
    if not flat:
        return Id()
    if len(flat) == 1:
        return flat[0]
    return Compose(tuple(flat))


def power(f: FunctorExpr, n: int) -> FunctorExpr:
    if n < 0:
        if not is_invertible(f):
            raise NegativePowerOfNonInvertible(f"cannot take a negative power of the non-invertible {f}")
        return power(invert(f), -n)
    if n == 0 or isinstance(f, Id):
        return Id()
    if n == 1:
        return f
    if isinstance(f, Shift):
        return Shift(f.k * n)
    if isinstance(f, Power):
        return Power(f.base, f.n * n)
    return Power(f, n)


def invert(f: FunctorExpr) -> FunctorExpr:
    if isinstance(f, Id):
        return f
    if isinstance(f, Shift):
        return Shift(-f.k)
    if isinstance(f, Serre):
        return SerreInv()
    if isinstance(f, SerreInv):
        return Serre()
    if isinstance(f, ComponentShift):
        return ComponentShift(tuple((v, -k) for v, k in f.shifts))
    if isinstance(f, Twist):
        raise NonInvertibleFunctor(f"{f} is not known to be invertible")
    if isinstance(f, Compose):
        return compose(*(invert(p) for p in reversed(f.parts)))
    if isinstance(f, Power):
        return power(invert(f.base), f.n)
    raise TypeError(f"unknown functor {f!r}")


# -- parser ------------------------------------------------------------------------


class _FunctorParser:
    _INT = re.compile(r"[+-]?\d+")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str, pos: int | None = None):
        raise ParseError(msg, self.pos if pos is None else pos, self.text)

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, word: str) -> bool:
        self.peek()
        if self.text.startswith(word, self.pos):
            end = self.pos + len(word)
            if word[-1].isalpha() and end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
                return False
            self.pos = end
            return True
        return False

    def parse(self) -> FunctorExpr:
        if not self.text.strip():
            self.error("empty functor expression", 0)
        node = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return node

    def expr(self) -> FunctorExpr:
        parts = [self.term()]
        while self.peek() == "*":
            self.pos += 1
            parts.append(self.term())
        return compose(*parts) if len(parts) > 1 else parts[0]

    def term(self) -> FunctorExpr:
        self.peek()
        start = self.pos
        node = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.peek()
            m = self._INT.match(self.text, self.pos)
            if not m:
                self.error("expected an integer exponent")
            self.pos = m.end()
            n = int(m.group())
            if n < 0 and not is_invertible(node):
                raise NegativePowerOfNonInvertible(
                    f"negative power of the non-invertible {node} (column {start + 1})"
                )
            return power(node, n)
        return node

    def atom(self) -> FunctorExpr:
        c = self.peek()
        if c == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return node
        if self.take("Sigma"):
            return Shift(1)
        if self.text.startswith("nu^-1", self.pos):
            self.pos += len("nu^-1")
            return SerreInv()
        if self.take("nu"):
            return Serre()
        if self.take("id"):
            return Id()
        for word, cls in (("Td[", DualTwist), ("T[", Twist)):
            if self.text.startswith(word, self.pos):
                self.pos += len(word)
                depth, end = 1, self.pos
                while end < len(self.text) and depth:
                    depth += {"[": 1, "]": -1}.get(self.text[end], 0)
                    end += 1
                if depth:
                    self.error("unclosed '['")
                inner = self.text[self.pos:end - 1]
                obj = cx.parse_object(inner, offset=self.pos)
                self.pos = end
                return cls(obj)
        if not c:
            self.error("unexpected end of input")
        self.error(f"unknown functor atom starting at {self.text[self.pos:self.pos + 8]!r}")


def parse_functor(text: str) -> FunctorExpr:
    return _FunctorParser(text).parse()


# -- Serre functor -----------------------------------------------------------------

_SERRE_TABLES: "weakref.WeakKeyDictionary[PathAlgebra, _SerreTable]" = weakref.WeakKeyDictionary()


class _SerreTable:
    """Standard resolutions of the injectives and the induced maps of every path."""

    def __init__(self, alg: PathAlgebra):
        self.alg = alg
        self.inj = [alg.injective(i) for i in range(alg.n_vertices)]
        self.res = [cx.standard_resolution(m) for m in self.inj]
        self.path_maps = {}
        for u, p in enumerate(alg.paths):
            # path u: j -> i is the morphism P_i -> P_j; nu of it is I_i -> I_j
            j, i = p.source, p.target
            phi = alg.nakayama_path_map(u)
            self.path_maps[u] = cx.standard_resolution_map(self.inj[i], self.inj[j], phi)


def _serre_table(alg: PathAlgebra) -> _SerreTable:
    tab = _SERRE_TABLES.get(alg)
    if tab is None:
        tab = _SerreTable(alg)
        _SERRE_TABLES[alg] = tab
    return tab


def serre(x: PerfComplex) -> PerfComplex:
    """Derived Nakayama functor: replace each ``P_i`` by the resolution of ``I_i``."""
    alg = x.algebra
    fld = alg.field
    tab = _serre_table(alg)
    P = alg.n_paths

    def layout(n: int, part: int):
        """Summand vertices and offsets of the degree-``part`` piece of ``nu(x^n)``."""
        verts, offs = [], []
        for v in x.term(n):
            offs.append(len(verts))
            verts.extend(tab.res[v].term(part))
        return verts, offs

    degs = x.degrees
    if not degs:
        return x
    lo, hi = min(degs) - 1, max(degs)
    terms, blocks = {}, {}
    for m in range(lo, hi + 1):
        low_v, low_o = layout(m + 1, -1)
        top_v, top_o = layout(m, 0)
        terms[m] = tuple(low_v) + tuple(top_v)
        blocks[m] = (len(low_v), low_o, top_o)
    cx.check_size(alg, terms)
    diffs = {}
    for m in range(lo, hi):
        nlow_s, low_o_s, top_o_s = blocks[m]
        nlow_t, low_o_t, top_o_t = blocks[m + 1]
        d = fld.zeros((len(terms[m + 1]), len(terms[m]), P))
        # vertical: low(x^{m+1}) -> top(x^{m+1}), sign (-1)^{m+1}
        sign = -1 if (m + 1) % 2 else 1
        for c, v in enumerate(x.term(m + 1)):
            r = tab.res[v]
            dv = r.diff(-1)
            if dv.size == 0:
                continue
            rt = nlow_t + top_o_t[c]
            cs = low_o_s[c]
            d[rt:rt + dv.shape[0], cs:cs + dv.shape[1]] = fld.reduce(sign * dv)
        # horizontal, top part: nu(d_x^m) on degree 0 of the resolutions
        dx = x.diffs.get(m)
        if dx is not None:
            _place_horizontal(d, dx, tab, 0, x.term(m), x.term(m + 1), top_o_s, top_o_t, nlow_s, nlow_t)
        dx1 = x.diffs.get(m + 1)
        if dx1 is not None:
            _place_horizontal(d, dx1, tab, -1, x.term(m + 1), x.term(m + 2), low_o_s, low_o_t, 0, 0)
        diffs[m] = d
    return cx.minimize(PerfComplex(alg, terms, diffs), check=False)


def _place_horizontal(d, dx, tab: _SerreTable, part, src_terms, tgt_terms, src_off, tgt_off, src_base, tgt_base):
    alg = tab.alg
    fld = alg.field
    rows, cols, us = np.nonzero(dx)
    for r, c, u in zip(rows.tolist(), cols.tolist(), us.tolist()):
        coeff = dx[r, c, u]
        mat = tab.path_maps[u][part]  # scalar matrix between resolution terms
        if mat.size == 0:
            continue
        tgt_res = tab.res[tgt_terms[r]]
        tv = tgt_res.term(part)
        r0 = tgt_base + tgt_off[r]
        c0 = src_base + src_off[c]
        nz_r, nz_c = np.nonzero(mat)
        for a, b in zip(nz_r.tolist(), nz_c.tolist()):
            e = tv[a]  # scalar on the trivial path of the summand's vertex
            d[r0 + a, c0 + b, e] = fld.reduce(d[r0 + a, c0 + b, e] + coeff * mat[a, b])


def serre_inverse(x: PerfComplex) -> PerfComplex:
    """``nu^{-1} = (-)^* o nu_{A^op} o (-)^*`` with ``(-)^* = Hom_A(-, A)``."""
    return cx.dualize(serre(cx.dualize(x)))


# -- twists --------------------------------------------------------------------------


def _resolve_object(obj, alg: PathAlgebra) -> PerfComplex:
    if isinstance(obj, PerfComplex):
        if obj.algebra is not alg:
            raise ValueError("twist object lives over a different algebra")
        return cx.minimize(obj)
    return cx.build_object(obj, alg)


def twist(f_obj: PerfComplex, x: PerfComplex) -> PerfComplex:
    """``cone(sum_k Hom^k(F, X) (x) F[-k] -> X)`` with the evaluation map."""
    _, bases = cx.hom_complex(f_obj, x)
    pieces, maps = [], []
    for k in sorted(bases):
        for g in bases[k]:
            pieces.append(cx.shift(f_obj, -k))
            maps.append((k, g))
    if not pieces:
        return x
    src = cx.direct_sum(*pieces)
    comps = {}
    for m in x.terms:
        blocks = []
        for k, g in maps:
            blocks.append(g.component(m - k))  # F^{m-k} -> x^m
        comps[m] = np.concatenate(blocks, axis=1)
    return cx.cone(ChainMap(src, x, comps))


def dual_twist(f_obj: PerfComplex, x: PerfComplex) -> PerfComplex:
    """``cone(X -> sum_k Hom^k(X, F)^* (x) F[k])[-1]`` with the coevaluation map."""
    _, bases = cx.hom_complex(x, f_obj)
    pieces, maps = [], []
    for k in sorted(bases):
        for g in bases[k]:
            pieces.append(cx.shift(f_obj, k))
            maps.append(g)
    if not pieces:
        return x
    tgt = cx.direct_sum(*pieces)
    comps = {}
    for m in x.terms:
        if not tgt.term(m):
            continue
        comps[m] = np.concatenate([g.component(m) for g in maps], axis=0)
    return cx.shift(cx.cone(ChainMap(x, tgt, comps)), -1)


def component_shift(shifts: dict[int, int], x: PerfComplex) -> PerfComplex:
    alg = x.algebra
    comp_of = {}
    for ci, comp in enumerate(alg.connected_components()):
        for v in comp:
            comp_of[v] = ci
    amount = {comp_of[alg.vertex(v)]: k for v, k in shifts.items()}
    parts = []
    for ci in sorted(set(comp_of.values())):
        keep = {n: [i for i, v in enumerate(vs) if comp_of[v] == ci] for n, vs in x.terms.items()}
        terms = {n: tuple(x.terms[n][i] for i in idx) for n, idx in keep.items()}
        diffs = {n: d[np.ix_(keep[n + 1], keep[n])] for n, d in x.diffs.items()}
        sub = PerfComplex(alg, terms, diffs)
        parts.append(cx.shift(sub, amount.get(ci, 0)))
    return cx.direct_sum(*parts) if parts else x


# -- application ---------------------------------------------------------------------


def apply(f: FunctorExpr, x: PerfComplex) -> PerfComplex:
    """``f(x)`` as a minimal complex."""
    x = cx.minimize(x)
    if isinstance(f, Id):
        return x
    if isinstance(f, Shift):
        return cx.shift(x, f.k)
    if isinstance(f, Serre):
        return serre(x)
    if isinstance(f, SerreInv):
        return serre_inverse(x)
    if isinstance(f, DualTwist):
        return dual_twist(_resolve_object(f.obj, x.algebra), x)
    if isinstance(f, Twist):
        return twist(_resolve_object(f.obj, x.algebra), x)
    if isinstance(f, ComponentShift):
        return component_shift(dict(f.shifts), x)
    if isinstance(f, Compose):
        for p in reversed(f.parts):
            x = apply(p, x)
        return x
    if isinstance(f, Power):
        if f.n < 0:
            return apply(Power(invert(f.base), -f.n), x)
        for _ in range(f.n):
            x = apply(f.base, x)
        return x
    raise TypeError(f"unknown functor {f!r}")


def to_opposite(f: FunctorExpr, alg: PathAlgebra) -> FunctorExpr:
    """The functor on per(A^op) corresponding to ``f`` under ``(-)^* = Hom_A(-, A)``."""
    if isinstance(f, Id):
        return f
    if isinstance(f, Shift):
        return Shift(-f.k)
    if isinstance(f, Serre):
        return SerreInv()
    if isinstance(f, SerreInv):
        return Serre()
    if isinstance(f, ComponentShift):
        return ComponentShift(tuple((v, -k) for v, k in f.shifts))
    if isinstance(f, Twist):
        dual_obj = cx.dualize(_resolve_object(f.obj, alg))
        return Twist(dual_obj) if isinstance(f, DualTwist) else DualTwist(dual_obj)
    if isinstance(f, Compose):
        return compose(*(to_opposite(p, alg) for p in f.parts))
    if isinstance(f, Power):
        return power(to_opposite(f.base, alg), f.n)
    raise TypeError(f"unknown functor {f!r}")


# -- isomorphism ---------------------------------------------------------------------


def iso_test(x: PerfComplex, y: PerfComplex, attempts: int = 4, seed: int = 0) -> bool:
    """Decide ``x ~ y`` for complexes of projectives.

    Minimal complexes are homotopy equivalent iff isomorphic, and a chain map
    between them is an isomorphism iff it is invertible modulo the radical in
    every degree. Such maps form a dense open subset of the chain maps, so a
    random chain map finds one with high probability when it exists; a
    positive answer is always certified.
    """
    if x.algebra is not y.algebra:
        return False
    x, y = cx.minimize(x), cx.minimize(y)
    if x.term_multiset() != y.term_multiset():
        return False
    if x.is_zero():
        return True
    basis = cx.chain_maps_basis(x, y)
    if not basis:
        return False
    fld = x.field
    rng = np.random.default_rng(seed)
    from . import scalars

    for _ in range(attempts):
        coeffs = fld.asarray(rng.integers(-(2**20), 2**20, size=len(basis)))
        ok = True
        for n, vs in x.terms.items():
            s = fld.zeros((len(vs), len(vs)))
            for c, g in zip(coeffs, basis):
                s = fld.reduce(s + c * g.scalar_part(n))
            if scalars.rank(s, fld) != len(vs):
                ok = False
                break
        if ok:
            return True
    return False
