"""Coupling matrices of quadratic lattice Hamiltonians and their scales.

The Hamiltonian is ``H = 1/2 sum_ij (x_i X_ij x_j + p_i P_ij p_j)`` with real
symmetric ``X`` and ``P``. Locality is carried as metadata on the pair and
checked against the graph when the pair is built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Union

import numpy as np

from .graph import UNREACHABLE, Graph


class CouplingError(ValueError):
    """Coupling matrices inconsistent with their declared structure."""


class MissingRangeError(CouplingError):
    """A quantity needs the interaction range ``R`` but none was declared."""


@dataclass(frozen=True)
class LocalRange:
    R: int


@dataclass(frozen=True)
class AlgebraicDecay:
    c0: float
    eta: float


@dataclass(frozen=True)
class Unconstrained:
    pass


Locality = Union[LocalRange, AlgebraicDecay, Unconstrained]


def _symmetric(M, name: str, n: int) -> np.ndarray:
    M = np.array(M, dtype=float)
    if M.shape != (n, n):
        raise CouplingError(f"{name} must be {n}x{n}, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise CouplingError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.T).max(initial=0.0) > 1e-12 * scale:
        raise CouplingError(f"{name} is not symmetric")
    upper = np.triu(M)
    M = upper + np.triu(M, 1).T
    M.setflags(write=False)
    return M


def validate_locality(g: Graph, M: np.ndarray, R: int) -> bool:
    """True iff every entry of ``M`` beyond graph distance ``R`` is exactly zero."""
    far = g.dist > R
    return not np.any(np.asarray(M)[far] != 0.0)


def validate_algebraic_decay(g: Graph, M: np.ndarray, c0: float, eta: float) -> bool:
    """True iff ``|M_ij| <= c0 / (1 + dist(i, j))**eta`` for all pairs."""
    d = g.dist.astype(float)
    d[g.dist >= UNREACHABLE] = np.inf
    limit = c0 / (1.0 + d) ** eta
    return bool(np.all(np.abs(np.asarray(M)) <= limit))


@dataclass(frozen=True, eq=False)
class CouplingPair:
    """Position and momentum couplings on a graph.

    Construction symmetrizes from the upper triangle, so ``X`` and ``P`` are
    bit-for-bit symmetric, and checks the declared locality.
    """

    graph: Graph
    X: np.ndarray
    P: np.ndarray
    locality: Locality = field(default_factory=Unconstrained)

    def __post_init__(self):
        n = self.graph.n
        object.__setattr__(self, "X", _symmetric(self.X, "X", n))
        object.__setattr__(self, "P", _symmetric(self.P, "P", n))
        loc = self.locality
        if isinstance(loc, LocalRange):
            if int(loc.R) < 1:
                raise CouplingError("range R must be a positive integer")
            for name, M in (("X", self.X), ("P", self.P)):
                if not validate_locality(self.graph, M, loc.R):
                    raise CouplingError(f"{name} has nonzero entries beyond distance R={loc.R}")
        elif isinstance(loc, AlgebraicDecay):
            if loc.c0 <= 0 or loc.eta <= 0:
                raise CouplingError("algebraic decay needs c0 > 0 and eta > 0")
            for name, M in (("X", self.X), ("P", self.P)):
                if not validate_algebraic_decay(self.graph, M, loc.c0, loc.eta):
                    raise CouplingError(
                        f"{name} exceeds c0/(1+dist)^eta with c0={loc.c0}, eta={loc.eta}"
                    )

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def p_is_identity(self) -> bool:
        return bool(np.array_equal(self.P, np.eye(self.n)))

    @property
    def R(self) -> int | None:
        return int(self.locality.R) if isinstance(self.locality, LocalRange) else None


@dataclass(frozen=True)
class DerivedScales:
    """Spectral norms and the kinematic scales built from them.

    ``tau = tau_rate * |t|``. ``speed_of_light`` needs a declared range and is
    ``None`` otherwise; ``speed_of_light_P1`` is set only when ``P`` is the
    identity.
    """

    norm_X: float
    norm_P: float
    norm_XP: float
    norm_PX: float
    tau_rate: float
    p_identity: bool
    R: int | None = None
    t: float = 0.0
    tau: float = 0.0
    speed_of_light: float | None = None
    speed_of_light_P1: float | None = None


def _sym_norm(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(M)
    return float(max(abs(w[0]), abs(w[-1])))


def _product_norm(A: np.ndarray) -> float:
    # largest singular value from the symmetric eigenproblem of A A^T
    if A.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(A @ A.T)
    return float(math.sqrt(max(w[-1], 0.0)))


def spectral_norms(cp: CouplingPair) -> DerivedScales:
    nx, npp = _sym_norm(cp.X), _sym_norm(cp.P)
    nxp = _product_norm(cp.X @ cp.P)
    npx = _product_norm(cp.P @ cp.X)
    rate = max(math.sqrt(npx), math.sqrt(nxp))
    R = cp.R
    c = math.e * R * rate if R is not None else None
    c1 = math.e * R * math.sqrt(nx) / 2 if (R is not None and cp.p_is_identity) else None
    return DerivedScales(
        norm_X=nx, norm_P=npp, norm_XP=nxp, norm_PX=npx, tau_rate=rate,
        p_identity=cp.p_is_identity, R=R, speed_of_light=c, speed_of_light_P1=c1,
    )


def derived_scales(cp: CouplingPair, t: float, norms: DerivedScales | None = None) -> DerivedScales:
    """Norms plus ``tau`` at time ``t`` and the light-cone speeds.

    Raises
    ------
    MissingRangeError
        If the pair does not declare a finite interaction range.
    """
    if cp.R is None:
        raise MissingRangeError("cone quantities need LocalRange couplings")
    s = norms if norms is not None else spectral_norms(cp)
    return DerivedScales(**{**s.__dict__, "t": float(t), "tau": s.tau_rate * abs(float(t))})


# --- construction rules ----------------------------------------------------

def spring_chain(g: Graph, omega: float = 1.0, kappa: float = 1.0) -> CouplingPair:
    """``X = (omega^2 + 2 kappa) 1 - kappa A`` with ``A`` the adjacency, ``P = 1``."""
    X = (omega**2 + 2 * kappa) * np.eye(g.n) - kappa * g.adjacency
    return CouplingPair(g, X, np.eye(g.n), LocalRange(1))


def algebraic_kernel(
    g: Graph,
    c0: float,
    eta: float,
    sign: str = "positive",
    scale: float = 1.0,
    momentum: str = "identity",
    seed: int | None = None,
) -> CouplingPair:
    """``X_ij = s_ij * scale * c0 / (1 + dist)^eta`` with a sign pattern ``s``.

    ``sign`` is ``"positive"``, ``"alternating"`` (``(-1)^dist``) or
    ``"random"`` (symmetric random signs from ``seed``). ``momentum`` is
    ``"identity"`` or ``"kernel"`` (same magnitudes, independent signs).
    Unreachable pairs get zero coupling.
    """
    if not 0 < scale <= 1:
        raise CouplingError("scale must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    d = g.dist.astype(float)
    far = g.dist >= UNREACHABLE
    mag = scale * c0 / (1.0 + np.where(far, 0.0, d)) ** eta
    mag[far] = 0.0

    def signs(pattern):
        if pattern == "positive":
            return np.ones_like(mag)
        if pattern == "alternating":
            return np.where(far, 1.0, (-1.0) ** np.where(far, 0.0, d))
        if pattern == "random":
            s = np.triu(rng.choice([-1.0, 1.0], size=mag.shape))
            return s + np.triu(s, 1).T
        raise CouplingError(f"unknown sign pattern {pattern!r}")

    X = mag * signs(sign)
    if momentum == "identity":
        P = np.eye(g.n)
    elif momentum == "kernel":
        P = mag * signs("random" if sign == "random" else sign)
    else:
        raise CouplingError(f"unknown momentum rule {momentum!r}")
    return CouplingPair(g, X, P, AlgebraicDecay(float(c0), float(eta)))


def random_local(
    g: Graph,
    R: int,
    seed: int,
    momentum: str = "identity",
    diag_shift: float = 0.0,
) -> CouplingPair:
    """Random symmetric couplings supported within distance ``R``.

    Off-diagonal entries are standard normal; ``diag_shift`` is added to the
    diagonal of ``X``. ``momentum="random"`` draws ``P`` the same way.
    """
    rng = np.random.default_rng(seed)
    mask = (g.dist <= R).astype(float)

    def draw():
        A = rng.standard_normal((g.n, g.n))
        A = np.triu(A)
        A = A + np.triu(A, 1).T
        return A * mask

    X = draw() + diag_shift * np.eye(g.n)
    if momentum == "identity":
        P = np.eye(g.n)
    elif momentum == "random":
        P = draw()
    else:
        raise CouplingError(f"unknown momentum rule {momentum!r}")
    return CouplingPair(g, X, P, LocalRange(int(R)))


def _locality_from(spec) -> Locality:
    if spec is None:
        return Unconstrained()
    if "R" in spec:
        return LocalRange(int(spec["R"]))
    if "c0" in spec:
        return AlgebraicDecay(float(spec["c0"]), float(spec["eta"]))
    raise CouplingError(f"unrecognized locality {spec!r}")


def build_couplings(g: Graph, rule: Mapping) -> CouplingPair:
    """Dispatch a JSON-style coupling rule.

    Kinds: ``spring_chain`` (``omega``, ``kappa``), ``explicit`` (``X``,
    optional ``P``, ``locality``), ``algebraic`` (``c0``, ``eta``, ``sign``,
    ``scale``, ``momentum``, ``seed``), ``random_local`` (``R``, ``seed``,
    ``momentum``, ``diag_shift``) and ``klein_gordon`` (``m``; the graph must
    be a periodic cubic lattice).
    """
    kind = rule.get("kind")
    if kind == "spring_chain":
        return spring_chain(g, float(rule.get("omega", 1.0)), float(rule.get("kappa", 1.0)))
    if kind == "explicit":
        X = rule["X"]
        P = rule.get("P", np.eye(g.n))
        return CouplingPair(g, X, P, _locality_from(rule.get("locality")))
    if kind == "algebraic":
        return algebraic_kernel(
            g, float(rule["c0"]), float(rule["eta"]), rule.get("sign", "positive"),
            float(rule.get("scale", 1.0)), rule.get("momentum", "identity"), rule.get("seed"),
        )
    if kind == "random_local":
        return random_local(
            g, int(rule["R"]), int(rule.get("seed", 0)), rule.get("momentum", "identity"),
            float(rule.get("diag_shift", 0.0)),
        )
    if kind == "klein_gordon":
        from .experiments import kg_coupling_on
        return kg_coupling_on(g, float(rule.get("m", 0.0)))
    raise CouplingError(f"unknown coupling rule {kind!r}")
