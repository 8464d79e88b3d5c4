"""Categorical entropy of endofunctors of per(A) for path algebras of finite acyclic quivers."""

from .algebra import ModuleRep, PathAlgebra, Quiver, kronecker, linear_a, load_quiver
from .complexes import ChainMap, HomProfile, PerfComplex, build_object, cone, direct_sum, hom_complex, minimize, shift
from .entropy import GrowthSeries, duality_check, entropy_curve, growth_series, sod_max_check, st_triple_audit
from .filtrations import FiltrationProfile, cot_filtration, delta_check, delta_hat, delta_vect, t_filtration
from .functors import apply, iso_test, parse_functor
from .scalars import FieldSpec

__version__ = "0.1.0"

__all__ = [
    "ChainMap",
    "FieldSpec",
    "FiltrationProfile",
    "GrowthSeries",
    "HomProfile",
    "ModuleRep",
    "PathAlgebra",
    "PerfComplex",
    "Quiver",
    "apply",
    "build_object",
    "cone",
    "cot_filtration",
    "delta_check",
    "delta_hat",
    "delta_vect",
    "direct_sum",
    "duality_check",
    "entropy_curve",
    "growth_series",
    "hom_complex",
    "iso_test",
    "kronecker",
    "linear_a",
    "load_quiver",
    "minimize",
    "parse_functor",
    "shift",
    "sod_max_check",
    "st_triple_audit",
    "t_filtration",
]
