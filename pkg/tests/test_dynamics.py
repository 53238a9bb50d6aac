import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from harmonic_lr.couplings import CouplingPair, LocalRange, random_local, spring_chain
from harmonic_lr.dynamics import (
    KINDS,
    SeriesRangeError,
    SpectralPathError,
    kernel_entry,
    kernels,
    kernels_series,
    kernels_spectral,
    mode_functions,
    propagator,
    series_term_matrices,
    symplectic_form,
)
from harmonic_lr.graph import path, ring


def single(x):
    return CouplingPair(path(1), [[x]], [[1.0]], LocalRange(1))


def generator(cp):
    n = cp.n
    return np.block([[np.zeros((n, n)), cp.P], [-cp.X, np.zeros((n, n))]])


def mp_propagator(cp, t, dps=40):
    with mpmath.workdps(dps):
        M = mpmath.matrix(generator(cp).tolist()) * mpmath.mpf(t)
        return mpmath.expm(M)


def test_time_zero_is_exact(chain4):
    for k in (kernels_series(chain4, 0.0), kernels_spectral(chain4, 0.0)):
        assert not k.cxx.any() and not k.cpp.any()
    k = kernels_series(chain4, 0.0)
    assert np.array_equal(k.cxp, -np.eye(4)) and np.array_equal(k.cpx, np.eye(4))
    assert kernel_entry(k, "xp", 2, 2) == -1.0
    assert kernel_entry(k, "xx", 0, 3) == 0.0


def test_single_mode_closed_forms():
    for method in (kernels_series, kernels_spectral):
        k = method(single(4.0), 0.5)
        tol = k.certified_error + 1e-15
        assert k.cxx[0, 0] == pytest.approx(math.sin(1) / 2, abs=tol)
        assert k.cpp[0, 0] == pytest.approx(2 * math.sin(1), abs=tol)
        assert k.cpx[0, 0] == pytest.approx(math.cos(1), abs=tol)
        k = method(single(-1.0), 1.0)
        assert k.cxx[0, 0] == pytest.approx(math.sinh(1), abs=k.certified_error + 1e-15)
    assert kernels_series(single(4.0), 0.5, tol=1e-13).cxx[0, 0] == pytest.approx(math.sin(1) / 2, abs=1e-14)


def test_free_particles():
    cp = CouplingPair(path(3), np.zeros((3, 3)), np.eye(3), LocalRange(1))
    k = kernels_spectral(cp, 2.5)
    assert np.allclose(k.cxx, 2.5 * np.eye(3), atol=1e-15)
    assert np.allclose(k.cxp, -np.eye(3), atol=1e-15)
    assert np.allclose(k.cpp, 0, atol=1e-15)


def test_dual_method_on_chain(chain4):
    a, b = kernels_series(chain4, 1.0), kernels_spectral(chain4, 1.0)
    for kind in KINDS:
        assert np.allclose(a.matrix(kind), b.matrix(kind), atol=1e-10, rtol=0)
    assert abs(a.cxx[0, 3] - b.cxx[0, 3]) < 1e-10


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("t", [0.3, 1.7, -2.2])
def test_propagator_matches_expm(seed, t):
    cp = random_local(ring(7), 1, seed=seed, momentum="random")
    k = kernels_series(cp, t, tol=1e-9)
    S = propagator(k)
    ref = expm(t * generator(cp))
    assert np.abs(S - ref).max() <= 1e-9 * max(1.0, np.abs(ref).max())


@pytest.mark.parametrize("t", [0.5, 3.0, 8.0])
def test_series_certificate_is_honest(t):
    cp = random_local(ring(5), 1, seed=11, momentum="random", diag_shift=0.5)
    k = kernels_series(cp, t, tol=1e-6)
    ref = mp_propagator(cp, t)
    S = propagator(k)
    err = max(abs(float(ref[i, j]) - S[i, j]) for i in range(10) for j in range(10))
    assert err <= k.certified_error


@pytest.mark.parametrize("t", [0.5, 4.0])
def test_spectral_certificate_is_honest(t):
    cp = random_local(ring(6), 1, seed=2, diag_shift=4.0)
    k = kernels_spectral(cp, t)
    ref = mp_propagator(cp, t)
    S = propagator(k)
    err = max(abs(float(ref[i, j]) - S[i, j]) for i in range(12) for j in range(12))
    assert err <= k.certified_error


def test_spectral_needs_identity_momentum():
    cp = random_local(ring(5), 1, seed=0, momentum="random")
    with pytest.raises(SpectralPathError):
        kernels_spectral(cp, 1.0)


def test_series_refuses_large_tau():
    cp = spring_chain(ring(8))
    with pytest.raises(SeriesRangeError, match="kernels_spectral"):
        kernels_series(cp, 100.0)


def test_dispatch_picks_method(chain4):
    assert kernels(chain4, 1.0).method == "spectral"
    cp = random_local(ring(5), 1, seed=0, momentum="random")
    assert kernels(cp, 1.0).method == "series"


def test_entry_index_checked(chain4):
    with pytest.raises(IndexError):
        kernel_entry(kernels(chain4, 1.0), "xx", 0, 9)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_group_law_and_symplectic(t1, t2):
    cp = random_local(ring(6), 1, seed=5, diag_shift=5.0)
    S1 = propagator(kernels(cp, t1))
    S2 = propagator(kernels(cp, t2))
    S12 = propagator(kernels(cp, t1 + t2))
    scale = max(1.0, np.linalg.norm(S12, 2)) ** 2
    assert np.abs(S1 @ S2 - S12).max() <= 1e-9 * scale
    sig = symplectic_form(6)
    assert np.abs(S1 @ sig @ S1.T - sig).max() <= 1e-9 * scale


@given(st.floats(0.01, 2.0))
def test_time_reversal_parity(t):
    cp = random_local(ring(6), 1, seed=3, momentum="random")
    a, b = kernels_series(cp, t, tol=1e-10), kernels_series(cp, -t, tol=1e-10)
    assert np.allclose(a.cxx, -b.cxx, atol=1e-12, rtol=0)
    assert np.allclose(a.cpp, -b.cpp, atol=1e-12, rtol=0)
    assert np.allclose(a.cxp, b.cxp, atol=1e-12, rtol=0)


def test_mode_functions_branches():
    lam = np.array([-4.0, -1e-9, 0.0, 1e-9, 9.0])
    s, c, ls = mode_functions(lam, 0.7)
    for li, si, ci in zip(lam, s, c):
        w = mpmath.sqrt(mpmath.mpf(li))
        ref_s = 0.7 if li == 0 else mpmath.sin(w * 0.7) / w
        assert si == pytest.approx(float(mpmath.re(ref_s)), rel=1e-14)
        assert ci == pytest.approx(float(mpmath.re(mpmath.cos(w * 0.7))), rel=1e-14)
    assert np.allclose(ls, lam * s, rtol=1e-14, atol=0)


def test_series_terms_support():
    cp = spring_chain(path(6))
    terms = series_term_matrices(cp, 2)
    # (X)^2 reaches distance 2, times P=1 adds nothing
    assert terms["xp"][0, 3] == 0.0 and terms["xp"][0, 2] != 0.0
