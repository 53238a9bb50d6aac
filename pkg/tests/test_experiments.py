import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from harmonic_lr.couplings import algebraic_kernel, spring_chain
from harmonic_lr.experiments import (
    KGConfig,
    kg_coupling,
    kg_eigenvalues,
    kg_lightcone_scan,
    ordered_map,
    tightness_sweep,
)
from harmonic_lr.graph import ring
from harmonic_lr.report import emit_report

# N |Cxx_{N/4, 0}(t)| from a 60-digit Fourier sum over the lattice modes
KG_ORACLE = {
    (0.0, 16, 0.05): 3.4892148524367093e-7,
    (0.0, 32, 0.05): 7.2489849947344008e-12,
    (0.0, 64, 0.05): 4.0152187961521718e-21,
    (0.0, 16, 0.5): 0.37904767033598915,
    (0.0, 32, 0.5): 0.44353260393450135,
    (0.0, 64, 0.5): 0.54773641619265843,
    (1.0, 64, 0.05): 4.0150730783850414e-21,
    (10.0, 64, 0.05): 4.0006717139930234e-21,
    (10.0, 64, 0.5): 0.14032193785022107,
}


def fourier_value(N, t, site, m, dps=60):
    with mpmath.workdps(dps):
        t = mpmath.mpf(t)
        total = mpmath.mpf(0)
        for k in range(N):
            lam = m * m + 2 * N * N - 2 * N * N * mpmath.cos(2 * mpmath.pi * k / N)
            w = mpmath.sqrt(lam)
            total += (t if lam == 0 else mpmath.sin(w * t) / w) * mpmath.cos(2 * mpmath.pi * k * site / N)
        return float(abs(total))


def test_oracle_spot_check():
    assert fourier_value(16, "0.05", 4, 0) == pytest.approx(KG_ORACLE[(0.0, 16, 0.05)], rel=1e-14)


def test_kg_coupling_entries():
    cp = kg_coupling(KGConfig(D=1, N=4, m=0.0, x=Fraction(1, 4)))
    assert cp.X[0, 0] == 32 and cp.X[0, 1] == -16 and cp.X[0, 2] == 0


def test_kg_eigenvalues_match_matrix():
    cfg = KGConfig(D=2, N=6, m=0.5, x=Fraction(1, 2))
    lam = np.linalg.eigvalsh(kg_coupling(cfg).X)
    assert np.allclose(np.sort(lam), kg_eigenvalues(2, 6, 0.5), atol=1e-10)
    assert kg_eigenvalues(1, 8, 0.0).max() == pytest.approx(4 * 64)


def test_config_validation():
    with pytest.raises(ValueError):
        KGConfig(N=10, x=Fraction(1, 4))
    with pytest.raises(ValueError):
        KGConfig(N=1)


@pytest.mark.parametrize("m", [0.0, 1.0, 10.0])
def test_scan_matches_oracle(m):
    cfg = KGConfig(m=m, t_grid=(0.0, 0.05, 0.5))
    tab = kg_lightcone_scan(cfg, [16, 32, 64])
    for r in tab.rows:
        if r.t == 0.0:
            assert r.value == 0.0
            continue
        key = (m, r.N, r.t)
        if key in KG_ORACLE:
            assert abs(r.value - KG_ORACLE[key]) <= r.error + 1e-15 * KG_ORACLE[key]


def test_scan_cone_flags():
    tab = kg_lightcone_scan(KGConfig(t_grid=(0.05, 0.09, 0.1)), [16])
    assert [r.cone_flag for r in tab.rows] == [True, True, False]


def test_scan_in_2d():
    cfg = KGConfig(D=2, N=8, x=Fraction(1, 2), t_grid=(0.05,))
    (row,) = kg_lightcone_scan(cfg).rows
    assert row.value > 0 and row.cone_flag


def test_ordered_map_keeps_order():
    assert ordered_map(lambda x: x * x, range(20), jobs=8) == [x * x for x in range(20)]


def test_chain_sweep_is_dominated():
    cp = spring_chain(ring(32))
    rate = math.sqrt(5.0)  # |X| = omega^2 + 4 kappa on an even ring
    grid = [tau / rate for tau in np.linspace(0, 10, 6)]
    rep = tightness_sweep(cp, grid, ("T1",))
    assert not rep.violations
    zero = [r for r in rep.rows if r.t == 0.0 and r.kind == "xx"]
    assert all(r.exact == 0.0 and r.margin == r.bound for r in zero)


def test_algebraic_sweep_is_dominated():
    cp = algebraic_kernel(ring(16), 1.0, 3.0, sign="alternating", scale=0.5)
    rep = tightness_sweep(cp, [0.0, 0.01, 0.05], ("T5",), dimension=1)
    assert rep.rows and not rep.violations


def test_sweep_needs_dimension_for_nonlocal():
    cp = algebraic_kernel(ring(8), 1.0, 3.0)
    with pytest.raises(ValueError):
        tightness_sweep(cp, [0.1], ("T5",))


def test_sweep_is_deterministic_across_jobs():
    cp = spring_chain(ring(12))
    grid = [0.0, 0.2, 0.7, 1.5, 3.0]
    a = emit_report(tightness_sweep(cp, grid, ("T1", "T2"), jobs=1), "csv", None)
    b = emit_report(tightness_sweep(cp, grid, ("T1", "T2"), jobs=8), "csv", None)
    assert a == b
