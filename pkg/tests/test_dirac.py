from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phsym.dirac import (
    Grid2D,
    build_em_hamiltonian,
    build_vortex_hamiltonian,
    random_fields,
    relation_trials,
    signed_residuals,
    verify_c_relation,
    verify_composed_relation,
    verify_ct_relation,
    verify_em_c_relation,
    verify_t_relation,
)
from phsym.fock import max_abs

S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S2 = np.array([[0, -1j], [1j, 0]])
S3 = np.diag([1.0, -1.0]).astype(complex)


def dense_reference(nx, ny, p, m, vF=1.0):
    """Site-by-site assembly of the lattice Dirac operator on a periodic grid."""
    n = nx * ny
    H = np.zeros((2 * n, 2 * n), dtype=complex)

    def idx(x, y):
        return (x % nx) * ny + (y % ny)

    for x in range(nx):
        for y in range(ny):
            i = idx(x, y)
            for sigma, (dx, dy), field in ((S1, (1, 0), p[0]), (S2, (0, 1), p[1])):
                fwd, bwd = idx(x + dx, y + dy), idx(x - dx, y - dy)
                for a in range(2):
                    for b in range(2):
                        s = vF * sigma[a, b]
                        # -i (psi(x+1) - psi(x-1)) / 2
                        H[a * n + i, b * n + fwd] += -0.5j * s
                        H[a * n + i, b * n + bwd] += 0.5j * s
                        H[a * n + i, b * n + i] += 2 * s * field[x, y]
            for a in range(2):
                H[a * n + i, a * n + i] -= 2 * m[x, y]
    return H


def test_matches_site_assembly():
    grid = Grid2D(4, 3)
    rng = np.random.default_rng(0)
    p, m = random_fields(grid, rng)
    h = build_vortex_hamiltonian(grid, p, m).matrix.toarray()
    np.testing.assert_allclose(h, dense_reference(4, 3, p, m), atol=1e-14)


def test_difference_is_real_antisymmetric():
    for grid in (Grid2D(5, 4), Grid2D(4, 4, periodic=(False, True)), Grid2D(3, 6, spacing=0.5)):
        for axis in (0, 1):
            D = grid.difference(axis).toarray()
            assert np.isrealobj(D) or np.abs(D.imag).max() == 0
            np.testing.assert_array_equal(D, -D.T)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2D(1, 4)
    with pytest.raises(ValueError):
        Grid2D(4, 4, spacing=0)


def test_field_shape_mismatch():
    grid = Grid2D(4, 4)
    with pytest.raises(ValueError):
        build_vortex_hamiltonian(grid, np.zeros((2, 3, 4)), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        build_vortex_hamiltonian(grid, np.zeros((2, 4, 4)), np.zeros((4, 3)))


def test_free_spectrum_is_symmetric():
    grid = Grid2D(4, 4)
    zero = np.zeros((2, 4, 4)), np.zeros((4, 4))
    E = np.linalg.eigvalsh(build_vortex_hamiltonian(grid, *zero).matrix.toarray())
    np.testing.assert_allclose(E, -E[::-1], atol=1e-12)


def test_constant_mass_shifts_spectrum():
    grid = Grid2D(4, 4)
    p = np.zeros((2, 4, 4))
    E0 = np.linalg.eigvalsh(build_vortex_hamiltonian(grid, p, np.zeros((4, 4))).matrix.toarray())
    E = np.linalg.eigvalsh(build_vortex_hamiltonian(grid, p, 0.3 * np.ones((4, 4))).matrix.toarray())
    np.testing.assert_allclose(E, E0 - 0.6, atol=1e-12)


def test_random_fields_hermitian():
    grid = Grid2D(6, 6)
    p, m = random_fields(grid, np.random.default_rng(4))
    assert build_vortex_hamiltonian(grid, p, m).hermiticity_residual < 1e-12


def test_relation_examples_on_six_by_six():
    grid = Grid2D(6, 6)
    p, m = random_fields(grid, np.random.default_rng(7))
    assert verify_t_relation(grid, p, m) < 1e-12
    assert verify_t_relation(grid, 2 * p, m) < 1e-12
    assert verify_c_relation(grid, p, m) < 1e-12
    assert verify_ct_relation(grid, p, m) < 1e-12
    assert verify_composed_relation(grid, p, m) < 1e-12


def test_massless_sigma3_anticommutes():
    grid = Grid2D(4, 4)
    p, _ = random_fields(grid, np.random.default_rng(2))
    h = build_vortex_hamiltonian(grid, p, np.zeros((4, 4))).matrix.toarray()
    S = np.kron(S3, np.eye(16))
    np.testing.assert_allclose(S @ h @ S, -h, atol=1e-14)


def test_c_relation_free_case():
    grid = Grid2D(4, 4)
    h = build_vortex_hamiltonian(grid, np.zeros((2, 4, 4)), np.zeros((4, 4))).matrix.toarray()
    S = np.kron(S1, np.eye(16))
    np.testing.assert_allclose(S @ h.conj() @ S, -h, atol=1e-14)


def test_mass_only_field_is_ct_symmetric():
    grid = Grid2D(4, 4)
    m = np.random.default_rng(3).standard_normal((4, 4))
    h = build_vortex_hamiltonian(grid, np.zeros((2, 4, 4)), m).matrix.toarray()
    S = np.kron(S2, np.eye(16))
    np.testing.assert_allclose(S @ h.conj() @ S, h, atol=1e-14)


def test_wrong_signs_leave_large_residuals():
    grid = Grid2D(4, 4)
    p, m = random_fields(grid, np.random.default_rng(5))
    r = signed_residuals(grid, p, m)
    assert r["T"]["anticommute"] < 1e-12 and r["T"]["commute"] > 1
    assert r["C"]["anticommute"] < 1e-12 and r["C"]["commute"] > 1
    assert r["CT"]["commute"] < 1e-12 and r["CT"]["anticommute"] > 1


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.floats(0.1, 3), st.integers(0, 2 ** 32 - 1))
def test_relations_hold_on_any_grid(nx, ny, vF, seed):
    grid = Grid2D(nx, ny)
    p, m = random_fields(grid, np.random.default_rng(seed))
    assert verify_t_relation(grid, p, m, vF) < 1e-12
    assert verify_c_relation(grid, p, m, vF) < 1e-12
    assert verify_ct_relation(grid, p, m, vF) < 1e-12


def test_open_boundaries_keep_relations():
    grid = Grid2D(5, 4, periodic=(False, False))
    p, m = random_fields(grid, np.random.default_rng(9))
    assert verify_c_relation(grid, p, m) < 1e-12
    assert verify_ct_relation(grid, p, m) < 1e-12


def test_electromagnetic_c_relation():
    grid = Grid2D(4, 4)
    rng = np.random.default_rng(6)
    A0 = rng.standard_normal((4, 4))
    A = rng.standard_normal((2, 4, 4))
    assert verify_em_c_relation(grid, A0, A) < 1e-12
    h = build_em_hamiltonian(grid, A0, A)
    assert max_abs(h - h.conj().T) < 1e-12


def test_trials_are_reproducible():
    grid = Grid2D(4, 4)
    assert relation_trials(grid, 3, seed=1) == relation_trials(grid, 3, seed=1)
    worst = relation_trials(grid, 5, seed=2)
    assert max(worst.values()) < 1e-12
