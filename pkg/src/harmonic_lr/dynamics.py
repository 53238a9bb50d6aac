"""Commutator kernels of the Heisenberg-evolved canonical coordinates.

For ``H = 1/2 (x X x + p P p)`` every commutator ``i[r_a(t), r_b]`` is a real
multiple of the identity. The four kernel matrices are

* ``Cxx = sum_n (-1)^n t^(2n+1) / (2n+1)! (PX)^n P``
* ``Cpp = sum_n (-1)^n t^(2n+1) / (2n+1)! (XP)^n X``
* ``Cxp = -sum_n (-1)^n t^(2n) / (2n)! (PX)^n``
* ``Cpx = sum_n (-1)^n t^(2n) / (2n)! (XP)^n``

and together they form the phase-space propagator
``S(t) = expm(t [[0, P], [-X, 0]]) = [[-Cxp, Cxx], [-Cpp, Cpx]]``.

Two independent evaluators are provided. :func:`kernels_series` sums the
power series for any symmetric ``X, P``; :func:`kernels_spectral` diagonalizes
``X`` when ``P`` is the identity. Both attach an error certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .couplings import CouplingPair, spectral_norms

KINDS = ("xx", "pp", "xp", "px")

_U = np.finfo(float).eps / 2  # unit roundoff
_NORM_SAFETY = 1.0 + 1e-12


class SeriesRangeError(ValueError):
    """The series path cannot certify the requested tolerance at this time."""


class SpectralPathError(ValueError):
    """The spectral path needs ``P`` equal to the identity."""


def _gamma(k: float) -> float:
    ku = k * _U
    return ku / (1.0 - ku)


@dataclass(frozen=True, eq=False)
class KernelSet:
    """Commutator kernels at one time.

    ``certified_error`` bounds the absolute error of every entry of every
    kernel. ``entry_errors`` refines it per kind and entry.
    """

    t: float
    cxx: np.ndarray
    cpp: np.ndarray
    cxp: np.ndarray
    cpx: np.ndarray
    certified_error: float
    method: str
    entry_errors: Mapping[str, np.ndarray] | None = None
    n_terms: int | None = None

    @property
    def n(self) -> int:
        return self.cxx.shape[0]

    def matrix(self, kind: str) -> np.ndarray:
        try:
            return {"xx": self.cxx, "pp": self.cpp, "xp": self.cxp, "px": self.cpx}[kind]
        except KeyError:
            raise ValueError(f"unknown kernel kind {kind!r}") from None

    def error(self, kind: str, i: int | None = None, j: int | None = None):
        """Error bound for one entry, or the whole kind if ``i, j`` are omitted."""
        if self.entry_errors is None:
            return self.certified_error
        e = self.entry_errors[kind]
        return e if i is None else float(e[i, j])


def kernel_entry(k: KernelSet, kind: str, i: int, j: int) -> float:
    n = k.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"kernel index ({i}, {j}) out of range for n={n}")
    return float(k.matrix(kind)[i, j])


def symplectic_form(n: int) -> np.ndarray:
    """``sigma_ab = i[r_a, r_b]`` for ``r = (x_1..x_n, p_1..p_n)``."""
    z = np.zeros((n, n))
    one = np.eye(n)
    return np.block([[z, -one], [one, z]])


def propagator(k: KernelSet) -> np.ndarray:
    """Phase-space propagator ``S`` with ``r(t) = S r``."""
    return np.block([[-k.cxp, k.cxx], [-k.cpp, k.cpx]])


def series_term_matrices(cp: CouplingPair, n: int) -> dict[str, np.ndarray]:
    """Unscaled ``n``-th series terms: ``(PX)^n P, (XP)^n X, (PX)^n, (XP)^n``.

    Computed by plain repeated products, so entries that vanish structurally
    come out as exact zeros.
    """
    PX = cp.P @ cp.X
    XP = cp.X @ cp.P
    ex = np.eye(cp.n)
    ep = np.eye(cp.n)
    for _ in range(n):
        ex = ex @ PX
        ep = ep @ XP
    return {"xx": ex @ cp.P, "pp": ep @ cp.X, "xp": ex, "px": ep}


# --- series path -----------------------------------------------------------

def _log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def _series_tails(N: int, at: float, u: float, nP: float, nX: float) -> dict[str, float]:
    """Rigorous bounds on the omitted terms ``n > N`` of each series."""
    if u == 0.0:
        return dict.fromkeys(KINDS, 0.0)
    lc = _log_cosh(u)
    log_u = math.log(u)
    even = math.exp((2 * N + 2) * log_u - math.lgamma(2 * N + 3) + lc)
    odd = at * math.exp((2 * N + 2) * log_u - math.lgamma(2 * N + 4) + lc)
    return {"xx": nP * odd, "pp": nX * odd, "xp": even, "px": even}


class _Compensated:
    """Neumaier summation of matrices."""

    def __init__(self, first: np.ndarray):
        self.s = first.copy()
        self.c = np.zeros_like(first)

    def add(self, x: np.ndarray):
        t = self.s + x
        big = np.abs(self.s) >= np.abs(x)
        self.c += np.where(big, (self.s - t) + x, (x - t) + self.s)
        self.s = t

    @property
    def value(self) -> np.ndarray:
        return self.s + self.c


def _direct_series(cp: CouplingPair, t: float, tol: float, norms, max_terms: int = 20000):
    """Sum the four series directly; returns values, entrywise errors, term count.

    Entry errors combine the tail bound, first-order rounding of the matrix
    products (through products of absolute values) and compensated summation.
    """
    X, P, m = cp.X, cp.P, cp.n
    at = abs(t)
    t2 = t * t
    q = max(norms.norm_PX, norms.norm_XP) * _NORM_SAFETY
    u = at * math.sqrt(q)
    nP = norms.norm_P * _NORM_SAFETY
    nX = norms.norm_X * _NORM_SAFETY

    PX, XP = P @ X, X @ P
    aP, aX = np.abs(P), np.abs(X)
    W, Wt = aP @ aX, aX @ aP
    eye = np.eye(m)

    terms = {"xx": t * P, "pp": t * X, "xp": eye.copy(), "px": eye.copy()}
    chains = {"xx": at * aP, "pp": at * aX, "xp": eye.copy(), "px": eye.copy()}
    sums = {k: _Compensated(v) for k, v in terms.items()}
    abs_terms = {k: np.abs(v) for k, v in terms.items()}
    prod_err = {k: _gamma(m + 2) * chains[k] for k in ("xx", "pp")}
    prod_err.update({"xp": np.zeros((m, m)), "px": np.zeros((m, m))})

    N = 0
    tails = _series_tails(0, at, u, nP, nX)
    while max(tails.values()) > tol and N < max_terms:
        N += 1
        ce = -t2 / ((2 * N - 1) * (2 * N))
        co = -t2 / ((2 * N) * (2 * N + 1))
        terms["xp"] = (terms["xp"] @ PX) * ce
        terms["px"] = (terms["px"] @ XP) * ce
        terms["xx"] = (PX @ terms["xx"]) * co
        terms["pp"] = (XP @ terms["pp"]) * co
        chains["xp"] = (chains["xp"] @ W) * abs(ce)
        chains["px"] = (chains["px"] @ Wt) * abs(ce)
        chains["xx"] = (W @ chains["xx"]) * abs(co)
        chains["pp"] = (Wt @ chains["pp"]) * abs(co)
        g_even = _gamma(2 * N * (m + 2))
        g_odd = _gamma((2 * N + 1) * (m + 2))
        for k in KINDS:
            sums[k].add(terms[k])
            abs_terms[k] += np.abs(terms[k])
            prod_err[k] += (g_odd if k in ("xx", "pp") else g_even) * chains[k]
        tails = _series_tails(N, at, u, nP, nX)

    values = {k: sums[k].value for k in KINDS}
    errors = {}
    for k in KINDS:
        summation = 2 * _U * np.abs(values[k]) + 2 * (N + 1) * _U * _U * abs_terms[k]
        errors[k] = (tails[k] + prod_err[k] + summation) * (1.0 + 1e-6)
    values["xp"] = -values["xp"]
    return values, errors, N + 1


def _squaring_series(cp: CouplingPair, t: float, norms, split_tau: float):
    """Series at ``t / 2^k`` in a balanced frame, then ``k`` squarings.

    The frame ``x -> a x, p -> p / a`` with ``a^2 = sqrt(|X| / |P|)`` keeps
    the propagator well scaled; the error bound is propagated in the 2-norm.
    """
    m = cp.n
    tau = norms.tau_rate * abs(t)
    k = max(1, math.ceil(math.log2(tau / split_tau)))
    h = t / 2**k
    vals, errs, n_terms = _direct_series(cp, h, tol=1e-3 * _U, norms=norms)
    a2 = 1.0
    if norms.norm_X > 0 and norms.norm_P > 0:
        a2 = math.sqrt(norms.norm_X / norms.norm_P)
    S = np.block([[-vals["xp"], a2 * vals["xx"]], [-vals["pp"] / a2, vals["px"]]])
    E = float(np.linalg.norm(np.block([[errs["xp"], a2 * errs["xx"]], [errs["pp"] / a2, errs["px"]]])))
    g = _gamma(2 * m + 2)
    for _ in range(k):
        A = np.abs(S)
        normS = float(np.linalg.norm(S, 2)) if 2 * m <= 512 else float(np.linalg.norm(S))
        rounding = g * float(np.linalg.norm(A @ A))
        S = S @ S
        E = 2.0 * normS * E + E * E + rounding
    E *= 1.0 + 1e-6
    values = {
        "xx": S[:m, m:] / a2,
        "pp": -S[m:, :m] * a2,
        "xp": -S[:m, :m],
        "px": S[m:, m:],
    }
    errors = {"xx": E / a2, "pp": E * a2, "xp": E, "px": E}
    return values, {kk: np.full((m, m), v) for kk, v in errors.items()}, n_terms


def kernels_series(
    cp: CouplingPair,
    t: float,
    tol: float = 1e-12,
    *,
    split: bool | None = None,
    split_tau: float = 1.0,
    max_tau: float = 30.0,
    norms=None,
) -> KernelSet:
    """Kernels from the power series, with a certified error ``<= tol``.

    Parameters
    ----------
    cp : CouplingPair
    t : float
    tol : float
        Target bound on the absolute error of every kernel entry.
    split : bool, optional
        ``False`` sums the series at ``t`` directly. ``True`` sums it at
        ``t / 2^k`` and squares the propagator ``k`` times. ``None`` (default)
        tries the direct sum and falls back to squaring if the direct
        certificate misses ``tol`` and ``tau > split_tau``.
    max_tau : float
        Refuse times with ``tau = tau_rate |t|`` above this.

    Raises
    ------
    SeriesRangeError
        ``tau`` exceeds ``max_tau`` or no variant certifies ``tol``; use
        :func:`kernels_spectral` when ``P`` is the identity.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t = float(t)
    norms = norms if norms is not None else spectral_norms(cp)
    tau = norms.tau_rate * abs(t)
    if tau > max_tau:
        raise SeriesRangeError(
            f"tau={tau:.4g} exceeds the series limit {max_tau}; use kernels_spectral "
            "(P = 1) or split the time interval"
        )
    candidates = []
    if split is not True:
        vals, errs, nt = _direct_series(cp, t, tol / 2, norms)
        cert = max(float(e.max(initial=0.0)) for e in errs.values())
        candidates.append((cert, vals, errs, nt))
    if split is True or (split is None and candidates[0][0] > tol and tau > split_tau):
        vals, errs, nt = _squaring_series(cp, t, norms, split_tau)
        cert = max(float(e.max(initial=0.0)) for e in errs.values())
        candidates.append((cert, vals, errs, nt))
    cert, vals, errs, nt = min(candidates, key=lambda c: c[0])
    if cert > tol:
        raise SeriesRangeError(
            f"series certificate {cert:.3g} misses tol={tol:.3g} at tau={tau:.4g}; "
            "use kernels_spectral (P = 1) or a larger tolerance"
        )
    return KernelSet(
        t=t, cxx=vals["xx"], cpp=vals["pp"], cxp=vals["xp"], cpx=vals["px"],
        certified_error=cert, method="series", entry_errors=errs, n_terms=nt,
    )


def kernels_series_uncertified(cp: CouplingPair, t: float, tol: float, norms=None) -> KernelSet:
    """Direct series at ``t`` without the tolerance gate.

    Used where only a few far-away entries matter: there the entrywise
    certificate is tight even when near entries lose digits to cancellation.
    """
    norms = norms if norms is not None else spectral_norms(cp)
    vals, errs, nt = _direct_series(cp, float(t), tol, norms)
    cert = max(float(e.max(initial=0.0)) for e in errs.values())
    return KernelSet(
        t=float(t), cxx=vals["xx"], cpp=vals["pp"], cxp=vals["xp"], cpx=vals["px"],
        certified_error=cert, method="series", entry_errors=errs, n_terms=nt,
    )


# --- spectral path ---------------------------------------------------------

_TAYLOR_CUT = 1e-4
_TAYLOR_TERMS = 6


def mode_functions(lam: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-eigenvalue ``s = sin(w t)/w``, ``c = cos(w t)``, ``lam * s`` with ``w = sqrt(lam)``.

    Negative ``lam`` uses the hyperbolic continuation. For ``|lam| t^2`` below
    ``1e-4`` a six-term Taylor expansion avoids the ``0/0`` form.
    """
    lam = np.asarray(lam, dtype=float)
    s = np.empty_like(lam)
    c = np.empty_like(lam)
    ls = np.empty_like(lam)
    z = lam * t * t
    small = np.abs(z) < _TAYLOR_CUT
    pos = ~small & (lam > 0)
    neg = ~small & (lam < 0)

    w = np.sqrt(lam[pos])
    s[pos] = np.sin(w * t) / w
    c[pos] = np.cos(w * t)
    ls[pos] = w * np.sin(w * t)

    w = np.sqrt(-lam[neg])
    s[neg] = np.sinh(w * t) / w
    c[neg] = np.cosh(w * t)
    ls[neg] = -w * np.sinh(w * t)

    zs = z[small]
    ts, cs = np.zeros_like(zs), np.zeros_like(zs)
    term_s, term_c = np.ones_like(zs), np.ones_like(zs)
    for n in range(_TAYLOR_TERMS):
        ts += term_s
        cs += term_c
        term_s = term_s * (-zs) / ((2 * n + 2) * (2 * n + 3))
        term_c = term_c * (-zs) / ((2 * n + 1) * (2 * n + 2))
    s[small] = t * ts
    c[small] = cs
    ls[small] = lam[small] * t * ts
    return s, c, ls


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigendecomposition of ``X`` with its backward-error estimate."""

    lam: np.ndarray
    U: np.ndarray
    backward_error: float  # Frobenius-norm perturbation explained by eigh

    @classmethod
    def of(cls, X: np.ndarray) -> "SpectralData":
        lam, U = np.linalg.eigh(X)
        m = X.shape[0]
        resid = np.linalg.norm(X @ U - U * lam)
        ortho = np.linalg.norm(U.T @ U - np.eye(m))
        scale = float(np.abs(lam).max(initial=0.0))
        return cls(lam=lam, U=U, backward_error=float(resid + 2.0 * scale * ortho))

    def lipschitz(self, t: float) -> dict[str, float]:
        """Bounds on ``|df/dlam|`` over the spectral hull for each kernel function."""
        mu = math.sqrt(max(0.0, -float(self.lam[0]))) if self.lam.size else 0.0
        grow = math.cosh(mu * abs(t))
        at = abs(t)
        return {"xx": at**3 / 6 * grow, "pp": at * grow, "xp": t * t / 2 * grow, "px": t * t / 2 * grow}


def spectral_error(sd: SpectralData, t: float, s, c, ls) -> dict[str, float]:
    m = sd.lam.size
    L = sd.lipschitz(t)
    g = _gamma(m + 2)
    fmax = {
        "xx": float(np.abs(s).max(initial=0.0)),
        "pp": float(np.abs(ls).max(initial=0.0)),
        "xp": float(np.abs(c).max(initial=0.0)),
        "px": float(np.abs(c).max(initial=0.0)),
    }
    return {k: 2.0 * (L[k] * sd.backward_error + g * fmax[k]) + _U * fmax[k] for k in KINDS}


def kernels_spectral(cp: CouplingPair, t: float, spectral: SpectralData | None = None) -> KernelSet:
    """Kernels for ``P = 1`` from the eigendecomposition ``X = U diag(lam) U^T``.

    ``Cxx = U s U^T``, ``Cpp = U (lam s) U^T``, ``Cpx = -Cxp = U c U^T``.
    The certificate is first order in the eigensolver backward error.
    """
    if not cp.p_is_identity:
        raise SpectralPathError("kernels_spectral needs P = 1; use kernels_series")
    t = float(t)
    m = cp.n
    if t == 0.0:
        eye, zero = np.eye(m), np.zeros((m, m))
        return KernelSet(
            t=t, cxx=zero, cpp=zero.copy(), cxp=-eye, cpx=eye, certified_error=0.0, method="spectral",
            entry_errors={k: np.zeros((m, m)) for k in KINDS},
        )
    sd = spectral if spectral is not None else SpectralData.of(cp.X)
    s, c, ls = mode_functions(sd.lam, t)
    U = sd.U

    def assemble(f):
        M = (U * f) @ U.T
        return (M + M.T) / 2

    cxx = assemble(s)
    cpp = assemble(ls)
    cpx = assemble(c)
    errs = spectral_error(sd, t, s, c, ls)
    return KernelSet(
        t=t, cxx=cxx, cpp=cpp, cxp=-cpx, cpx=cpx,
        certified_error=max(errs.values()), method="spectral",
        entry_errors={k: np.full((m, m), v) for k, v in errs.items()},
    )


def kernels(cp: CouplingPair, t: float, tol: float = 1e-12) -> KernelSet:
    """Spectral kernels when ``P = 1``, otherwise the certified series."""
    if cp.p_is_identity:
        return kernels_spectral(cp, t)
    return kernels_series(cp, t, tol)
