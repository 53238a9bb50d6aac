"""Lieb-Robinson bounds for harmonic lattice systems.

Exact commutator kernels of ``H = (x X x + p P p) / 2`` on a graph, the
closed-form bounds they obey, Weyl-operator commutators and a
Klein-Gordon light-cone scan.
"""
from ._kernels import BACKEND
from .bounds import (
    BoundError,
    BoundReport,
    BoundRow,
    ConeQuantities,
    OutsideValidity,
    bound_local,
    bound_local_cone,
    bound_local_explicit_cone,
    bound_local_P1,
    bound_local_P1_cone,
    bound_nonlocal,
    cone_quantities,
    evaluate_bounds,
    riemann_zeta,
    verify_power_support,
)
from .couplings import (
    AlgebraicDecay,
    CouplingError,
    CouplingPair,
    DerivedScales,
    LocalRange,
    MissingRangeError,
    Unconstrained,
    build_couplings,
    derived_scales,
    spectral_norms,
)
from .dynamics import (
    KINDS,
    KernelSet,
    SeriesRangeError,
    kernels,
    kernels_series,
    kernels_spectral,
    propagator,
    symplectic_form,
)
from .experiments import KGConfig, LightconeTable, kg_coupling, kg_lightcone_scan, tightness_sweep
from .graph import Graph, GraphError, build_graph, cubic, dimension_profile, path, ring
from .report import emit_report
from .weyl import WeylDescriptor, weyl_bound_pairwise, weyl_bound_surface, weyl_commutator_norm_exact, weyl_phase

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
