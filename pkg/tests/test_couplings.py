import math

import numpy as np
import pytest

from harmonic_lr.couplings import (
    AlgebraicDecay,
    CouplingError,
    CouplingPair,
    LocalRange,
    MissingRangeError,
    Unconstrained,
    algebraic_kernel,
    build_couplings,
    derived_scales,
    random_local,
    spectral_norms,
    spring_chain,
    validate_algebraic_decay,
    validate_locality,
)
from harmonic_lr.experiments import kg_coupling_on
from harmonic_lr.graph import cubic, path, ring


def power_iteration(M, iters=5000, seed=0):
    v = np.random.default_rng(seed).standard_normal(M.shape[0])
    for _ in range(iters):
        v = M.T @ (M @ v)
        v /= np.linalg.norm(v)
    return math.sqrt(v @ (M.T @ (M @ v)))


def test_spring_chain_matrix():
    cp = spring_chain(path(3), 1.0, 1.0)
    assert np.array_equal(cp.X, [[3, -1, 0], [-1, 3, -1], [0, -1, 3]])
    assert cp.p_is_identity and cp.R == 1


def test_explicit_range_violation():
    X = np.eye(3)
    X[0, 2] = X[2, 0] = 0.1
    with pytest.raises(CouplingError):
        CouplingPair(path(3), X, np.eye(3), LocalRange(1))


def test_asymmetric_rejected():
    X = np.eye(2)
    X[0, 1] = 1.0
    with pytest.raises(CouplingError):
        CouplingPair(path(2), X, np.eye(2), Unconstrained())


def test_near_symmetric_is_mirrored_exactly():
    X = np.array([[2.0, 1.0], [1.0 + 1e-15, 2.0]])
    cp = CouplingPair(path(2), X, np.eye(2), LocalRange(1))
    assert np.array_equal(cp.X, cp.X.T)
    assert not cp.X.flags.writeable


def test_algebraic_kernel_entry():
    cp = algebraic_kernel(ring(4), 1.0, 3.0)
    assert abs(cp.X[0, 2]) <= 1 / 27
    assert validate_algebraic_decay(cp.graph, cp.X, 1.0, 3.0)


@pytest.mark.parametrize("sign", ["positive", "alternating", "random"])
def test_algebraic_patterns_valid(sign):
    cp = algebraic_kernel(ring(9), 0.5, 2.0, sign=sign, momentum="kernel", seed=4)
    assert isinstance(cp.locality, AlgebraicDecay)
    assert validate_algebraic_decay(cp.graph, cp.P, 0.5, 2.0)


def test_validate_locality_examples():
    g = path(4)
    A = g.adjacency
    assert validate_locality(g, A, 1)
    assert not validate_locality(g, A @ A, 1)
    assert validate_locality(g, np.zeros((4, 4)), 1)


def test_validate_decay_examples():
    assert validate_algebraic_decay(path(3), np.eye(3), 1.0, 2.5)
    M = np.array([[0.0, 0.6], [0.6, 0.0]])
    assert not validate_algebraic_decay(path(2), M, 1.0, 1.0)


def test_identity_norms():
    cp = CouplingPair(path(3), np.eye(3), np.eye(3), LocalRange(1))
    s = spectral_norms(cp)
    assert (s.norm_X, s.norm_P, s.norm_XP, s.norm_PX) == (1.0, 1.0, 1.0, 1.0)


def test_klein_gordon_norm():
    cp = kg_coupling_on(cubic(4, 1), 0.0)
    assert spectral_norms(cp).norm_X == pytest.approx(64.0, rel=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_norms_against_power_iteration(seed):
    cp = random_local(ring(5), 2, seed=seed, momentum="random")
    s = spectral_norms(cp)
    assert s.norm_X == pytest.approx(power_iteration(cp.X), rel=1e-10)
    assert s.norm_XP == pytest.approx(power_iteration(cp.X @ cp.P), rel=1e-10)
    # transposes share singular values
    assert s.norm_XP == pytest.approx(s.norm_PX, rel=1e-12)


def test_derived_scales_examples():
    g = path(2)
    cp = CouplingPair(g, 2 * np.eye(2), 2 * np.eye(2), LocalRange(1))
    sc = derived_scales(cp, 0.5)
    assert sc.tau == pytest.approx(1.0)
    assert sc.speed_of_light == pytest.approx(2 * math.e)
    kg = kg_coupling_on(cubic(4, 1), 0.0)
    assert derived_scales(kg, 0.0).speed_of_light_P1 == pytest.approx(4 * math.e)
    assert derived_scales(kg, 0.0).tau == 0.0


def test_missing_range():
    cp = algebraic_kernel(ring(5), 1.0, 3.0)
    with pytest.raises(MissingRangeError):
        derived_scales(cp, 1.0)


def test_build_couplings_dispatch():
    g = ring(6)
    assert build_couplings(g, {"kind": "spring_chain", "omega": 2.0}).X[0, 0] == 6.0
    cp = build_couplings(g, {"kind": "explicit", "X": np.eye(6).tolist(), "locality": {"R": 1}})
    assert cp.R == 1
    cp = build_couplings(g, {"kind": "random_local", "R": 2, "seed": 1})
    assert validate_locality(g, cp.X, 2)
    kg = build_couplings(cubic(4, 1), {"kind": "klein_gordon", "m": 1.0})
    assert kg.X[0, 0] == 33.0
    with pytest.raises(CouplingError):
        build_couplings(g, {"kind": "nope"})


def test_random_local_is_seeded():
    a = random_local(ring(8), 1, seed=7)
    b = random_local(ring(8), 1, seed=7)
    assert np.array_equal(a.X, b.X)
