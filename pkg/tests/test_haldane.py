from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Rational, sqrt
from sympy.physics.quantum.cg import CG
from sympy.physics.wigner import wigner_9j

from oracles import hubbard_dense
from phsym.haldane import (
    DeformationPath,
    TwoChainSystem,
    clebsch_gordan,
    compare_effective,
    conserved_quantity_residuals,
    default_path,
    effective_couplings,
    endpoint_comparison,
    low_levels,
    recoupling_table,
    run_deformation,
    singlet_triplet_splitting,
    spin_ladder_hamiltonian,
    strong_coupling_check,
    triplet_isometry,
)
from phsym.models import two_chain_single_particle

HALF = Rational(1, 2)


def nine_j_overlap(S: int, Sp: int, J: int) -> float:
    """Recoupling coefficient from the Wigner 9j symbol."""
    w = wigner_9j(HALF, HALF, 1, HALF, HALF, 1, S, Sp, J)
    return float(sqrt(3 * 3 * (2 * S + 1) * (2 * Sp + 1)) * w)


half_integers = st.integers(0, 4).map(lambda k: Rational(k, 2))


@settings(max_examples=80, deadline=None)
@given(half_integers, half_integers, st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
def test_clebsch_gordan_matches_sympy(j1, j2, a, b, c):
    J = abs(j1 - j2) + (c % (int(2 * min(j1, j2)) + 1))
    m1 = -j1 + a % (int(2 * j1) + 1)
    m2 = -j2 + b % (int(2 * j2) + 1)
    M = m1 + m2
    ref = float(CG(j1, m1, j2, m2, J, M).doit()) if abs(M) <= J else 0.0
    assert clebsch_gordan(j1, m1, j2, m2, J, M) == pytest.approx(ref, abs=1e-12)


def test_clebsch_gordan_selection_rules():
    assert clebsch_gordan(0.5, 0.5, 0.5, 0.5, 0, 0) == 0.0
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == pytest.approx(1 / np.sqrt(2))


def test_recoupling_matches_nine_j():
    table = recoupling_table()
    for J, row in table.items():
        for S in (0, 1):
            for Sp in (0, 1):
                if abs(S - Sp) <= J <= S + Sp:
                    assert row.get((S, Sp), 0.0) == pytest.approx(nine_j_overlap(S, Sp, J), abs=1e-12)


def test_recoupling_magnitudes():
    table = recoupling_table()
    assert sorted(abs(v) for v in table[0].values()) == pytest.approx([0.5, np.sqrt(3) / 2])
    assert [abs(v) for v in table[1].values()] == pytest.approx([1 / np.sqrt(2)] * 2)
    assert [abs(v) for v in table[2].values()] == pytest.approx([1.0])
    for row in table.values():
        assert sum(v * v for v in row.values()) == pytest.approx(1.0)


def test_triplet_isometry_is_isometric():
    T = triplet_isometry()
    np.testing.assert_allclose(T.conj().T @ T, np.eye(3), atol=1e-14)


def test_effective_couplings():
    h = effective_couplings()
    assert h[0] == pytest.approx((-0.75, 1))
    assert h[1] == pytest.approx((-0.5, 3))
    assert h[2][0] == pytest.approx(0.0, abs=1e-14) and h[2][1] == 5


@pytest.mark.parametrize("L, boundary", [(2, "open"), (3, "open"), (4, "open"), (4, "periodic")])
def test_projected_ladder_equals_spin_one_chain(L, boundary):
    assert compare_effective(L, 1.0, boundary) < 1e-12


def test_projected_ladder_scales_with_coupling():
    assert compare_effective(3, 2.5) < 1e-12
    H1 = spin_ladder_hamiltonian(2, 1.0).toarray()
    H2 = spin_ladder_hamiltonian(2, 2.0).toarray()
    np.testing.assert_allclose(H2, 2 * H1, atol=1e-14)


def test_compare_effective_bounds():
    with pytest.raises(ValueError):
        compare_effective(7)


# --- strong coupling ------------------------------------------------------------------


def test_singlet_triplet_splitting_against_dense_oracle():
    t, U = 1.0, 6.0
    H = hubbard_dense(2, t, U, [(0, 1)])
    half = [b for b in range(16) if bin(b).count("1") == 2]
    E = np.linalg.eigvalsh(H[np.ix_(half, half)])
    # the two-site spectrum at half filling: singlet ground, triplet at U-shifted zero
    gap = np.sqrt(U ** 2 + 4 * t ** 2) - U
    assert singlet_triplet_splitting(t, U) == pytest.approx(gap, rel=1e-12)
    assert E[0] == pytest.approx(U - np.sqrt(U ** 2 + 4 * t ** 2), abs=1e-12)


def test_strong_coupling_relative_error_shrinks_as_t_over_u_squared():
    r50 = strong_coupling_check(50)
    r100 = strong_coupling_check(100)
    assert r50 < 5e-3
    assert 2 < r50 / r100 < 8


def test_splitting_vanishes_without_hopping():
    assert singlet_triplet_splitting(0.0, 4.0) == pytest.approx(0.0, abs=1e-14)


def test_strong_coupling_requires_large_ratio():
    with pytest.raises(ValueError):
        strong_coupling_check(5)


# --- deformation path -------------------------------------------------------------------


def test_default_path_layout():
    samples = default_path().samples()
    assert len(samples) == 24
    assert samples[0] == (0, (1.0, 0.5, 0.0, 0.0))
    assert samples[-1] == (2, (1.0, 1.0, 8.0, 8.0))


@pytest.mark.parametrize("waypoints, steps", [
    (((1, 0.5, 0, 0),), 4),
    (((1, 0.5, 0, 0), (1, 1.5, 0, 0)), 4),
    (((1, 0.5, 0, 0), (1, 1.0, float("nan"), 0)), 4),
    (((1, 0.5, 0, 0), (1, 1.0, 0, 0)), 0),
])
def test_path_validation(waypoints, steps):
    with pytest.raises(ValueError):
        DeformationPath(waypoints, steps)


def test_system_orbital_cap():
    with pytest.raises(ValueError):
        TwoChainSystem(6)


def test_free_start_gap_matches_single_particle_oracle():
    L = 4
    h, _ = two_chain_single_particle(L, 1.0, 0.5, "periodic")
    eps = np.linalg.eigvalsh(h.matrix)
    path = DeformationPath(((1.0, 0.5, 0.0, 0.0), (1.0, 0.6, 0.0, 0.0)), 2)
    sample = run_deformation(path, L).samples[0]
    assert sample.gap == pytest.approx(eps[2 * L] - eps[2 * L - 1], abs=1e-9)
    assert sample.E0 == pytest.approx(eps[: 2 * L].sum(), abs=1e-9)
    assert sample.ground_degeneracy == 1


def test_short_two_site_path_stays_gapped():
    path = DeformationPath(((1.0, 0.5, 0.0, 0.0), (1.0, 1.0, 0.0, 0.0), (1.0, 1.0, 6.0, 0.0),
                            (1.0, 1.0, 6.0, 4.0)), 4)
    profile = run_deformation(path, L=2)
    assert len(profile.samples) == 12
    for s in profile.samples:
        assert s.gap > 0.1
        assert s.ground_degeneracy == 1
        assert s.k_residual < 1e-10
        assert s.ground_k_overlap == pytest.approx(1.0, abs=1e-8)
    assert profile.to_json()["samples"][0]["leg"] == 0


def test_low_levels_agree_with_dense_diagonalization():
    system = TwoChainSystem(2, "periodic")
    H = system.hamiltonian(1.0, 0.8, 3.0, 1.5)
    E = np.linalg.eigvalsh(H.toarray())
    assert low_levels(system, H, k=4)[0] == pytest.approx(E[0], abs=1e-10)


def test_conserved_quantities():
    r = conserved_quantity_residuals(2)
    assert r["charge"] < 1e-12 and r["spin_z"] < 1e-12


def test_deep_strong_coupling_endpoint_two_rungs():
    out = endpoint_comparison(L=2, U=32, V=4)
    assert out["discrepancy"] < out["tolerance"]
    assert out["manifold_gap"] > 1.0
