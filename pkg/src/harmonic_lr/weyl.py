"""Commutators of time-separated Weyl operators.

For ``W = exp(i sum_i (p_i x_i - x_i p_i))`` the commutator with a second
Weyl operator is ``W' W(t) (e^{i phi} - 1)``, so its norm is
``|e^{i phi} - 1| = 2 |sin(phi / 2)|`` with a phase ``phi`` that is bilinear in
the two phase-space vectors and linear in the kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import E, OutsideValidity, bound_local_cone
from .couplings import DerivedScales
from .dynamics import KernelSet
from .graph import DimensionProfile, Graph, SiteSet, boundary_sets, set_distance


@dataclass(frozen=True, eq=False)
class WeylDescriptor:
    """Support ``Xi`` and vector ``xi = (x_1..x_k, p_1..p_k)`` with ``k = |Xi|``."""

    support: SiteSet
    xi: np.ndarray

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(set(support)) != len(support):
            raise ValueError("Weyl support has repeated sites")
        xi = np.array(self.xi, dtype=float).ravel()
        if xi.size != 2 * len(support):
            raise ValueError(f"xi must have length {2 * len(support)}, got {xi.size}")
        xi.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "xi", xi)

    @property
    def x(self) -> np.ndarray:
        return self.xi[: len(self.support)]

    @property
    def p(self) -> np.ndarray:
        return self.xi[len(self.support):]

    @property
    def norm(self) -> float:
        # Euclidean length of xi
        return float(np.linalg.norm(self.xi))


def weyl_phase(w: WeylDescriptor, w2: WeylDescriptor, k: KernelSet) -> float:
    """Phase ``phi`` in ``W(t) W' = W' W(t) e^{i phi}``."""
    A, B = list(w.support), list(w2.support)
    ix = np.ix_(A, B)
    return float(
        w.p @ k.cxx[ix] @ w2.p
        - w.p @ k.cxp[ix] @ w2.x
        - w.x @ k.cpx[ix] @ w2.p
        + w.x @ k.cpp[ix] @ w2.x
    )


def weyl_commutator_norm_exact(phi: float) -> float:
    return 2.0 * abs(math.sin(phi / 2.0))


def kernel_magnitude_sum(k: KernelSet, A: Sequence[int], B: Sequence[int]) -> float:
    ix = np.ix_(list(A), list(B))
    return float(sum(np.abs(k.matrix(kind)[ix]).sum() for kind in ("xx", "xp", "px", "pp")))


def weyl_bound_pairwise(w: WeylDescriptor, w2: WeylDescriptor, k: KernelSet) -> float:
    """``|xi| |xi'|`` times the summed kernel magnitudes over ``Xi x Xi'``."""
    return w.norm * w2.norm * kernel_magnitude_sum(k, w.support, w2.support)


def g_function(z: float, dp: DimensionProfile, R: int, rel_tol: float = 1e-10) -> float:
    """``(1 - z^2)^-1 sum_{d>=0} z^(d/R) (d+1)^(D-1) (1 + c_D (d+1)^D)``.

    Summation stops once a geometric majorant of the remaining terms is
    below ``rel_tol`` times the partial sum. The term ratio is bounded by
    ``rho_d = z^(1/R) ((d+2)/(d+1))^(2D-1)``, which decreases in ``d``.
    """
    if not 0 < z < 1:
        raise OutsideValidity(f"g(z) needs 0 < z < 1, got {z}")
    D, c = dp.D, dp.c_D
    zr = z ** (1.0 / R)
    total = 0.0
    d = 0
    while True:
        term = zr**d * (d + 1) ** (D - 1) * (1 + c * (d + 1) ** D)
        total += term
        rho = zr * ((d + 2) / (d + 1)) ** (2 * D - 1)
        if rho < 1 and term * rho / (1 - rho) < rel_tol * total:
            break
        d += 1
    return total / (1 - z * z)


@dataclass(frozen=True)
class SurfaceBoundInputs:
    """Geometry feeding the surface form of the Weyl bound."""

    D: int
    c_D: float
    R: int
    dist: int
    n_boundary: int
    n_boundary_prime: int

    @property
    def d(self) -> float:
        return self.dist / self.R

    @property
    def min_boundary(self) -> int:
        return min(self.n_boundary, self.n_boundary_prime)


def surface_inputs(g: Graph, w: WeylDescriptor, w2: WeylDescriptor, dp: DimensionProfile, R: int) -> SurfaceBoundInputs:
    dist = set_distance(g, w.support, w2.support)
    if math.isinf(dist):
        raise OutsideValidity("supports lie in different components")
    b1, _ = boundary_sets(g, w.support, 0)
    b2, _ = boundary_sets(g, w2.support, 0)
    return SurfaceBoundInputs(dp.D, dp.c_D, int(R), int(dist), len(b1), len(b2))


def _canonical_prefactor(scales: DerivedScales) -> float:
    if scales.norm_PX <= 0 or scales.norm_XP <= 0:
        raise OutsideValidity("surface bound needs nonzero |PX| and |XP|")
    return scales.norm_P / math.sqrt(scales.norm_PX) + scales.norm_X / math.sqrt(scales.norm_XP) + 2.0


def cone_majorant(scales: DerivedScales, R: int) -> Callable[[int], float]:
    """Distance majorant ``f`` of the summed kernel magnitudes from the cone bound.

    Returns ``inf`` for distances outside the cone.
    """
    pre = _canonical_prefactor(scales)
    from .bounds import cone_quantities

    def f(dist: int) -> float:
        try:
            return pre * bound_local_cone(cone_quantities(dist, R, scales.tau))
        except OutsideValidity:
            return math.inf

    return f


def surface_geometric_sum(inputs: SurfaceBoundInputs, f: Callable[[int], float], d_max: int) -> float:
    """``c_D min(|dXi|, |dXi'|) sum_{d=dist}^{d_max} f(d) d^(D-1) (1 + c_D (d - dist)^D)``.

    On a finite graph ``d_max`` is its diameter; no pair lies farther apart.
    """
    D, c, dist = inputs.D, inputs.c_D, inputs.dist
    total = 0.0
    for d in range(dist, d_max + 1):
        fd = f(d)
        if fd == 0.0:
            continue
        total += fd * d ** (D - 1) * (1 + c * (d - dist) ** D)
    return c * inputs.min_boundary * total


def weyl_bound_surface(
    inputs: SurfaceBoundInputs, scales: DerivedScales, norm_xi: float, norm_xi2: float
) -> float:
    """``C min(|dXi|, |dXi'|) g(z) e^{d log z} d^(D - 3/2)`` with ``z = e tau / d``.

    ``C = R^(D-1) c_D |xi| |xi'| (|P|/sqrt|PX| + |X|/sqrt|XP| + 2)``; requires
    ``e tau < d = dist(Xi, Xi') / R``.
    """
    d = inputs.d
    if d <= 0:
        raise OutsideValidity("surface bound needs disjoint, separated supports")
    z = E * scales.tau / d
    if z >= 1:
        raise OutsideValidity(f"outside the cone: e*tau={E * scales.tau:.6g} >= d={d:.6g}")
    if inputs.min_boundary == 0 or z == 0:
        return 0.0
    C = inputs.R ** (inputs.D - 1) * inputs.c_D * norm_xi * norm_xi2 * _canonical_prefactor(scales)
    dp = DimensionProfile(D=inputs.D, c_D=inputs.c_D, sphere_table=np.zeros((0, 0), dtype=np.int64))
    log_val = (
        math.log(C * inputs.min_boundary * g_function(z, dp, inputs.R))
        + d * math.log(z)
        + (inputs.D - 1.5) * math.log(d)
    )
    return math.exp(log_val)
