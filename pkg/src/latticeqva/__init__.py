"""Exact symbolic engine for lattice vertex algebras and their deformations.

Constructs the lattice vertex algebra, the associated commutative vertex
bialgebra and its twisted sibling on the shared Fock space, the comodule and
module deformation machinery with the resulting quantum vertex algebras, and
the Yang-Baxter operator; the verifier suites check every implemented
identity coefficient-by-coefficient at finite truncation order over exact
cyclotomic-rational scalars.
"""

from .deform import DeformationMap, Deformer, ModuleStructure, eta_average, r_apply
from .fock import State, basis_states, parse_state, render_state
from .lattice import Isometry, Lattice
from .scalars import CyclotomicField
from .series import BiSeries, LaurentSeries, iota_binom, subst_affine
from .vertex import Engine, SeriesState

__all__ = [
    "BiSeries", "CyclotomicField", "DeformationMap", "Deformer", "Engine",
    "Isometry", "Lattice", "LaurentSeries", "ModuleStructure", "SeriesState",
    "State", "basis_states", "eta_average", "iota_binom", "parse_state",
    "r_apply", "render_state", "subst_affine",
]
