"""Lattice Dirac Hamiltonians in 2+1 dimensions and their C, T, CT relations.

Matrices act on ``C^2 ⊗ C^{nx ny}`` with the spinor index slowest.  Sites
are flattened C-order from field arrays of shape ``(nx, ny)``.  The
momentum is ``-i D_l`` with ``D_l`` a real antisymmetric central
difference, so every identity below holds exactly in the sigma algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fock import max_abs
from .models import PAULI

SIGMA1, SIGMA2, SIGMA3 = (sp.csr_matrix(s) for s in PAULI)


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    spacing: float = 1.0
    periodic: tuple[bool, bool] = (True, True)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs nx, ny >= 2")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def sites(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return self.nx, self.ny

    def difference(self, axis: int) -> sp.csr_matrix:
        """Real antisymmetric central difference along ``axis``."""
        return _difference(self, axis)


@lru_cache(maxsize=64)
def _difference(grid: Grid2D, axis: int) -> sp.csr_matrix:
    n = grid.shape[axis]
    d = sp.lil_matrix((n, n))
    for i in range(n):
        for j, s in ((i + 1, 1.0), (i - 1, -1.0)):
            if 0 <= j < n:
                d[i, j] += s
            elif grid.periodic[axis]:
                d[i, j % n] += s
    d = d.tocsr() / (2 * grid.spacing)
    eye = [sp.identity(grid.nx), sp.identity(grid.ny)]
    eye[axis] = d
    return sp.kron(eye[0], eye[1], format="csr")


def _diag(field, grid: Grid2D) -> sp.dia_matrix:
    field = np.asarray(field, dtype=float)
    if field.shape != grid.shape:
        raise ValueError(f"field shape {field.shape} does not match grid {grid.shape}")
    return sp.diags(field.ravel())


def _momentum(grid: Grid2D, axis: int) -> sp.csr_matrix:
    return -1j * grid.difference(axis)


@dataclass(frozen=True, eq=False)
class VortexFieldHamiltonian:
    grid: Grid2D
    p: np.ndarray
    m: np.ndarray
    vF: float
    matrix: sp.csr_matrix

    @property
    def hermiticity_residual(self) -> float:
        return max_abs(self.matrix - self.matrix.conj().T)


def _pair(p, grid: Grid2D) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2, *grid.shape):
        raise ValueError(f"one-form field needs shape (2, {grid.nx}, {grid.ny})")
    return p


def build_vortex_hamiltonian(grid: Grid2D, p, m, vF: float = 1.0, q: float = 1.0) -> VortexFieldHamiltonian:
    """``vF sum_l sigma_l (-i D_l + (2/q) p_l) - (2/q) m``."""
    p = _pair(p, grid)
    m = np.asarray(m, dtype=float)
    H = -(2 / q) * sp.kron(sp.identity(2), _diag(m, grid))
    for axis, sigma in ((0, SIGMA1), (1, SIGMA2)):
        H = H + vF * sp.kron(sigma, _momentum(grid, axis) + (2 / q) * _diag(p[axis], grid))
    return VortexFieldHamiltonian(grid, p, m, vF, sp.csr_matrix(H))


def build_em_hamiltonian(grid: Grid2D, A0, A, mass: float = 0.0, q: float = 1.0) -> sp.csr_matrix:
    """``sigma_3 mass - q A_0 + sum_l sigma_l (-i D_l - q A_l)``."""
    A = _pair(A, grid)
    n = grid.sites
    H = mass * sp.kron(SIGMA3, sp.identity(n)) - q * sp.kron(sp.identity(2), _diag(A0, grid))
    for axis, sigma in ((0, SIGMA1), (1, SIGMA2)):
        H = H + sp.kron(sigma, _momentum(grid, axis) - q * _diag(A[axis], grid))
    return sp.csr_matrix(H)


def _spinor(sigma: sp.spmatrix, grid: Grid2D) -> sp.csr_matrix:
    return sp.kron(sigma, sp.identity(grid.sites), format="csr")


def _conjugate(S: sp.spmatrix, h: sp.spmatrix, antilinear: bool) -> sp.csr_matrix:
    """``S h S^dagger`` or ``S conj(h) S^dagger``."""
    h = h.conj() if antilinear else h
    return S @ h @ S.conj().T


def verify_t_relation(grid: Grid2D, p, m, vF: float = 1.0) -> float:
    """``max |sigma_3 h(p,-m) sigma_3 + h(p,m)|``."""
    h = build_vortex_hamiltonian(grid, p, m, vF).matrix
    h_flip = build_vortex_hamiltonian(grid, p, -np.asarray(m), vF).matrix
    return max_abs(_conjugate(_spinor(SIGMA3, grid), h_flip, False) + h)


def verify_c_relation(grid: Grid2D, p, m, vF: float = 1.0) -> float:
    """``max |sigma_1 conj(h(-p,-m)) sigma_1 + h(p,m)|``."""
    h = build_vortex_hamiltonian(grid, p, m, vF).matrix
    h_flip = build_vortex_hamiltonian(grid, -np.asarray(p), -np.asarray(m), vF).matrix
    return max_abs(_conjugate(_spinor(SIGMA1, grid), h_flip, True) + h)


def verify_ct_relation(grid: Grid2D, p, m, vF: float = 1.0) -> float:
    """``max |sigma_2 conj(h(-p,m)) sigma_2 - h(p,m)|``."""
    h = build_vortex_hamiltonian(grid, p, m, vF).matrix
    h_flip = build_vortex_hamiltonian(grid, -np.asarray(p), m, vF).matrix
    return max_abs(_conjugate(_spinor(SIGMA2, grid), h_flip, True) - h)


def verify_composed_relation(grid: Grid2D, p, m, vF: float = 1.0) -> float:
    """C after T: ``sigma_1 sigma_3`` with complex conjugation must commute with h."""
    h = build_vortex_hamiltonian(grid, p, m, vF).matrix
    h_flip = build_vortex_hamiltonian(grid, -np.asarray(p), m, vF).matrix
    S = _spinor(SIGMA1 @ SIGMA3, grid)
    return max_abs(_conjugate(S, h_flip, True) - h)


def verify_em_c_relation(grid: Grid2D, A0, A, mass: float = 0.0, q: float = 1.0) -> float:
    """``max |sigma_1 conj(h(A)) sigma_1 + h(-A)|``, i.e. ``-Gamma h(A) = h(-A) Gamma``."""
    h = build_em_hamiltonian(grid, A0, A, mass, q)
    h_neg = build_em_hamiltonian(grid, -np.asarray(A0), -np.asarray(A), mass, q)
    return max_abs(_conjugate(_spinor(SIGMA1, grid), h, True) + h_neg)


def signed_residuals(grid: Grid2D, p, m, vF: float = 1.0) -> dict[str, dict[str, float]]:
    """Residuals for both signs of each relation.

    T and C hold with the minus sign (anti-commuting), CT with the plus
    sign.  The wrong sign must leave a residual of order ``|h|``.
    """
    h = build_vortex_hamiltonian(grid, p, m, vF).matrix
    p, m = np.asarray(p), np.asarray(m)
    images = {
        "T": _conjugate(_spinor(SIGMA3, grid), build_vortex_hamiltonian(grid, p, -m, vF).matrix, False),
        "C": _conjugate(_spinor(SIGMA1, grid), build_vortex_hamiltonian(grid, -p, -m, vF).matrix, True),
        "CT": _conjugate(_spinor(SIGMA2, grid), build_vortex_hamiltonian(grid, -p, m, vF).matrix, True),
    }
    return {k: {"anticommute": max_abs(v + h), "commute": max_abs(v - h)} for k, v in images.items()}


def random_fields(grid: Grid2D, rng: np.random.Generator, scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    p = scale * rng.standard_normal((2, *grid.shape))
    m = scale * rng.standard_normal(grid.shape)
    return p, m


def relation_trials(grid: Grid2D, trials: int, seed: int = 0) -> dict[str, float]:
    """Worst T, C, CT and composed residuals over ``trials`` random field draws."""
    rng = np.random.default_rng(seed)
    worst = {"T": 0.0, "C": 0.0, "CT": 0.0, "C_after_T": 0.0, "hermiticity": 0.0}
    for _ in range(trials):
        p, m = random_fields(grid, rng)
        worst["T"] = max(worst["T"], verify_t_relation(grid, p, m))
        worst["C"] = max(worst["C"], verify_c_relation(grid, p, m))
        worst["CT"] = max(worst["CT"], verify_ct_relation(grid, p, m))
        worst["C_after_T"] = max(worst["C_after_T"], verify_composed_relation(grid, p, m))
        worst["hermiticity"] = max(worst["hermiticity"],
                                   build_vortex_hamiltonian(grid, p, m).hermiticity_residual)
    return worst
