from __future__ import annotations

from math import comb

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import jw_annihilation, jw_creation, minors_exterior_power, number
from phsym.fock import (
    AntilinearMap,
    BdgHamiltonian,
    FockSpace,
    ManyBodyOperator,
    OperatorExpression,
    SingleParticleHamiltonian,
    annihilation_matrix,
    c,
    cdag,
    conjugate_by_antilinear,
    constant,
    creation_matrix,
    exterior_power,
    from_triplets,
    identity,
    max_abs,
    realize_expression,
    second_quantize_bdg,
    second_quantize_weyl,
    to_triplets,
)
from phsym.phc import xi_fast


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


# --- basis -----------------------------------------------------------------


def test_two_orbital_basis_is_ordered_by_pattern():
    assert FockSpace(2).basis.tolist() == [0, 1, 2, 3]


def test_sector_dimensions():
    assert FockSpace(4, 2).dim == 6
    assert FockSpace(16, 8).dim == 12870
    assert FockSpace(16, 8).dim == comb(16, 8)


@pytest.mark.parametrize("N, sector", [(0, None), (25, None), (4, 5), (4, -1)])
def test_invalid_spaces_raise(N, sector):
    with pytest.raises(ValueError):
        FockSpace(N, sector)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10).flatmap(lambda N: st.tuples(st.just(N), st.integers(0, N))))
def test_index_round_trip(args):
    N, n = args
    space = FockSpace(N, n)
    for i, b in enumerate(space.basis):
        assert space.index_of(int(b)) == i
        assert sum(space.occupations(i)) == n
    assert np.all(np.diff(space.basis) > 0)


def test_missing_pattern_lookup():
    space = FockSpace(4, 2)
    with pytest.raises(KeyError):
        space.index_of(0b111)
    assert space.indices_of(np.array([0b11, 0b111])).tolist() == [0, -1]


def test_custom_space_keeps_patterns():
    space = FockSpace.from_patterns(4, [0b1001, 0b0011])
    assert space.is_custom and space.sector == 2
    assert space.basis.tolist() == [0b0011, 0b1001]
    with pytest.raises(ValueError):
        FockSpace.from_patterns(2, [4])


# --- creation and annihilation ----------------------------------------------


@pytest.mark.parametrize("N", range(1, 6))
def test_creation_matches_kron_oracle(N):
    space = FockSpace(N)
    for j in range(N):
        np.testing.assert_array_equal(creation_matrix(space, j).toarray(), jw_creation(N, j))
        np.testing.assert_array_equal(annihilation_matrix(space, j).toarray(), jw_annihilation(N, j))


def test_single_orbital_creation():
    vac = np.array([1, 0])
    a = creation_matrix(FockSpace(1), 0)
    np.testing.assert_array_equal(a.matrix @ vac, [0, 1])
    np.testing.assert_array_equal(annihilation_matrix(FockSpace(1), 0).matrix @ vac, [0, 0])


def test_low_side_sign_convention():
    # a†_1 on |orbital 0 occupied> passes one occupied orbital below it
    a1 = creation_matrix(FockSpace(2), 1).toarray()
    assert a1[3, 1] == -1
    assert a1[2, 0] == 1


@pytest.mark.parametrize("N", range(1, 7))
def test_canonical_anticommutation(N):
    space = FockSpace(N)
    a = [realize_expression(c(j), space).matrix for j in range(N)]
    ad = [realize_expression(cdag(j), space).matrix for j in range(N)]
    eye = sp.identity(space.dim)
    for i in range(N):
        assert max_abs(ad[i] @ ad[i]) == 0
        for j in range(N):
            assert max_abs(a[i] @ ad[j] + ad[j] @ a[i] - (i == j) * eye) == 0
            assert max_abs(a[i] @ a[j] + a[j] @ a[i]) == 0


def test_sector_blocks_agree_with_full_space():
    N = 5
    full = jw_creation(N, 2)
    for n in range(N):
        dom, cod = FockSpace(N, n), FockSpace(N, n + 1)
        block = creation_matrix(dom, 2).toarray()
        np.testing.assert_array_equal(block, full[np.ix_(cod.basis, dom.basis)])
        ann = annihilation_matrix(cod, 2).toarray()
        np.testing.assert_array_equal(ann, block.conj().T)


def test_creation_errors():
    with pytest.raises(ValueError):
        creation_matrix(FockSpace(3, 3), 0)
    with pytest.raises(ValueError):
        annihilation_matrix(FockSpace(3, 0), 0)
    with pytest.raises(IndexError):
        creation_matrix(FockSpace(3), 3)


# --- expressions ------------------------------------------------------------


def test_number_operator_on_one_orbital():
    m = realize_expression(cdag(0) * c(0), FockSpace(1)).toarray()
    np.testing.assert_array_equal(m, np.diag([0, 1]))


def test_expression_mixing_sectors_raises():
    with pytest.raises(ValueError):
        realize_expression(cdag(0) + cdag(0) * c(0), FockSpace(2, 1))
    with pytest.raises(IndexError):
        realize_expression(cdag(4), FockSpace(2))


def test_expression_merges_and_prunes():
    e = cdag(0) * c(1) + cdag(0) * c(1) - 2 * (cdag(0) * c(1))
    assert len(e) == 0
    e = cdag(1) * c(0) + 3 * constant(1)
    assert len(e) == 2
    # words keep their written order
    words = [w for _, w in cdag(0) * c(1) + c(1) * cdag(0)]
    assert len(words) == 2


def test_expression_dagger():
    e = (2 + 1j) * cdag(0) * c(1)
    space = FockSpace(2)
    np.testing.assert_allclose(realize_expression(e.dagger(), space).toarray(),
                               realize_expression(e, space).toarray().conj().T)


# --- second quantization ----------------------------------------------------


def test_weyl_two_level_spectrum():
    eps = 0.7
    H = second_quantize_weyl(np.diag([eps, -eps]), FockSpace(2))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(H.toarray())), sorted([0, eps, -eps, 0]))


def test_weyl_sigma_x_in_half_filling():
    H = second_quantize_weyl(np.array([[0, 1], [1, 0]]), FockSpace(2, 1))
    np.testing.assert_allclose(np.linalg.eigvalsh(H.toarray()), [-1, 1])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_weyl_matches_kron_oracle(N, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, N)
    ref = sum(h[j, k] * jw_creation(N, j) @ jw_annihilation(N, k)
              for j in range(N) for k in range(N)) - np.trace(h) / 2 * np.eye(2 ** N)
    np.testing.assert_allclose(second_quantize_weyl(h, FockSpace(N)).toarray(), ref, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_traceless_weyl_is_traceless(N, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, N)
    h -= np.trace(h) / N * np.eye(N)
    H = second_quantize_weyl(h, FockSpace(N))
    assert abs(H.matrix.diagonal().sum()) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_weyl_is_linear(seed, x, y):
    rng = np.random.default_rng(seed)
    h1, h2 = random_hermitian(rng, 3), random_hermitian(rng, 3)
    space = FockSpace(3)
    lhs = second_quantize_weyl(x * h1 + y * h2, space).matrix
    rhs = x * second_quantize_weyl(h1, space).matrix + y * second_quantize_weyl(h2, space).matrix
    assert max_abs(lhs - rhs) < 1e-12


def test_weyl_rejects_non_hermitian():
    with pytest.raises(ValueError):
        SingleParticleHamiltonian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        second_quantize_weyl(np.eye(3), FockSpace(2))


def test_bdg_without_pairing_is_weyl():
    rng = np.random.default_rng(3)
    h = random_hermitian(rng, 4)
    space = FockSpace(4)
    H = second_quantize_bdg(BdgHamiltonian(h, np.zeros((4, 4))), space)
    assert max_abs(H.matrix - second_quantize_weyl(h, space).matrix) < 1e-12


def test_bdg_pure_pairing_matches_oracle():
    d = 0.6 - 0.3j
    delta = np.array([[0, d], [-d, 0]])
    H = second_quantize_bdg(BdgHamiltonian(np.zeros((2, 2)), delta), FockSpace(2)).toarray()
    a0d, a1d = jw_creation(2, 0), jw_creation(2, 1)
    pair = 0.5 * (d * a0d @ a1d - d * a1d @ a0d)
    ref = pair + pair.conj().T
    np.testing.assert_allclose(H, ref, atol=1e-14)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(H)), [-abs(d), 0, 0, abs(d)], atol=1e-14)


def test_bdg_commutes_with_parity():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    space = FockSpace(4)
    H = second_quantize_bdg(BdgHamiltonian(random_hermitian(rng, 4), a - a.T), space).matrix
    P = space.parity()
    assert max_abs(H @ P - P @ H) == 0


def test_bdg_errors():
    with pytest.raises(ValueError):
        BdgHamiltonian(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        second_quantize_bdg(BdgHamiltonian(np.zeros((2, 2)), np.zeros((2, 2))), FockSpace(2, 1))


# --- operators and antilinear maps -------------------------------------------


def test_operator_shape_and_composition_checks():
    with pytest.raises(ValueError):
        ManyBodyOperator(FockSpace(2), FockSpace(2), sp.identity(3))
    a = creation_matrix(FockSpace(3, 1), 0)
    with pytest.raises(ValueError):
        a @ a
    n_op = annihilation_matrix(FockSpace(3, 2), 0) @ a
    assert n_op.domain == FockSpace(3, 1)


def test_antilinear_requires_unitary():
    space = FockSpace(1)
    with pytest.raises(ValueError):
        AntilinearMap(space, space, sp.csr_matrix(np.diag([1.0, 2.0])))


def test_complex_conjugation_flips_i():
    space = FockSpace(2)
    conj = AntilinearMap(space, space, sp.identity(4))
    out = conjugate_by_antilinear(conj, 1j * identity(space))
    np.testing.assert_array_equal(out.toarray(), -1j * np.eye(4))


def test_xi_swaps_number_operator_for_hole_number():
    space = FockSpace(2)
    xi = xi_fast(2)
    n0 = realize_expression(cdag(0) * c(0), space)
    hole = realize_expression(c(0) * cdag(0), space)
    assert max_abs(conjugate_by_antilinear(xi, n0).matrix - hole.matrix) == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_double_antilinear_conjugation_is_linear_conjugation(seed):
    rng = np.random.default_rng(seed)
    space = FockSpace(3)
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    M = AntilinearMap(space, space, q)
    L = ManyBodyOperator(space, space, rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    twice = conjugate_by_antilinear(M, conjugate_by_antilinear(M, L))
    lin = (M @ M).matrix.toarray()
    np.testing.assert_allclose(twice.toarray(), lin @ L.toarray() @ np.linalg.inv(lin), atol=1e-10)


def test_antilinear_inverse_and_apply():
    rng = np.random.default_rng(1)
    space = FockSpace(2)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    M = AntilinearMap(space, space, q)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    np.testing.assert_allclose(M.inverse().apply(M.apply(psi)), psi, atol=1e-12)
    np.testing.assert_allclose(M.apply(2j * psi), -2j * M.apply(psi), atol=1e-12)


# --- exterior powers and serialization ---------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2), st.integers(0, 2 ** 32 - 1))
def test_exterior_power_equals_minors(N, extra, seed):
    rng = np.random.default_rng(seed)
    Nout = N + extra
    A = rng.standard_normal((Nout, N)) + 1j * rng.standard_normal((Nout, N))
    for n in range(N + 1):
        op = exterior_power(A, FockSpace(N, n), FockSpace(Nout, n))
        np.testing.assert_allclose(op.toarray(), minors_exterior_power(A, N, Nout, n), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_exterior_power_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    space = FockSpace(4)
    lhs = exterior_power(A @ B, space, space).toarray()
    rhs = exterior_power(A, space, space).toarray() @ exterior_power(B, space, space).toarray()
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_diagonal_exterior_power_on_full_space():
    d = np.diag([2.0, -1.0, 3.0])
    op = exterior_power(d, FockSpace(3), FockSpace(3)).toarray()
    expected = [np.prod([d[j, j] for j in range(3) if b >> j & 1]) for b in range(8)]
    np.testing.assert_array_equal(np.diag(op), expected)


def test_exterior_power_sector_mismatch():
    with pytest.raises(ValueError):
        exterior_power(np.eye(3), FockSpace(3, 1), FockSpace(3, 2))


def test_triplet_round_trip():
    m = realize_expression((1 + 2j) * cdag(1) * c(0), FockSpace(3)).matrix
    d = to_triplets(m)
    assert d["rows"] == d["cols"] == 8
    assert max_abs(from_triplets(d) - m) == 0


def test_number_operator_matches_oracle_sum():
    N = 4
    total = sum(number(N, j) for j in range(N))
    expr = sum((cdag(j) * c(j) for j in range(1, N)), cdag(0) * c(0))
    np.testing.assert_array_equal(realize_expression(expr, FockSpace(N)).toarray(), total)
