"""From two spinful dimerized chains to the spin-1 Heisenberg chain.

Spin-1/2 basis vectors are ordered ``m = +1/2, -1/2`` and spin-1 vectors
``m = +1, 0, -1``, matching :func:`phsym.models.spin_matrices`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import FockSpace, max_abs, popcount, realize_expression
from .models import (
    HubbardSpec,
    SpinChainSpec,
    _bonds,
    bond_weight,
    heisenberg_spin_chain,
    hubbard_terms,
    orbital_index,
    site_operator,
    spin_expression,
    spin_matrices,
    staggered_K,
)
from .phc import check_symmetry

MAX_ORBITALS = 20


# ---------------------------------------------------------------------------
# angular momentum coupling


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley ``<j1 m1 j2 m2 | J M>`` from the Racah formula."""
    j1, m1, j2, m2, J, M = map(Fraction, (j1, m1, j2, m2, J, M))
    if m1 + m2 != M or not abs(j1 - j2) <= J <= j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return 0.0
    for q in (j1 + m1, j2 + m2, J + M, j1 + j2 + J):
        if q.denominator != 1:
            return 0.0

    def f(x: Fraction) -> int:
        return factorial(int(x))

    pref = Fraction((2 * J + 1).numerator, (2 * J + 1).denominator)
    pref *= Fraction(f(J + j1 - j2) * f(J - j1 + j2) * f(j1 + j2 - J), f(j1 + j2 + J + 1))
    pref *= f(J + M) * f(J - M) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2)
    total = Fraction(0)
    k = 0
    while True:
        args = (k, j1 + j2 - J - k, j1 - m1 - k, j2 + m2 - k, J - j2 + m1 + k, J - j1 - m2 + k)
        if args[1] < 0 or args[2] < 0 or args[3] < 0:
            break
        if args[4] >= 0 and args[5] >= 0:
            denom = 1
            for a in args:
                denom *= f(a)
            total += Fraction((-1) ** k, denom)
        k += 1
    return float(sqrt(pref) * total)


def _basis_vector(j, m) -> np.ndarray:
    d = int(round(2 * j + 1))
    v = np.zeros(d)
    v[int(round(j - m))] = 1.0
    return v


def _ms(j):
    d = int(round(2 * j + 1))
    return [j - i for i in range(d)]


def couple(a: dict, ja, b: dict, jb, J, pattern: str) -> dict:
    """Couple multiplets ``a`` (spin ja) and ``b`` (spin jb) to total ``J``.

    ``a`` and ``b`` map ``m`` to arrays; ``pattern`` is the einsum rule that
    places the outer product on the combined axes.
    """
    out = {}
    for M in _ms(J):
        acc = 0
        for ma in _ms(ja):
            mb = M - ma
            if abs(mb) > jb:
                continue
            cg = clebsch_gordan(ja, ma, jb, mb, J, M)
            if cg:
                acc = acc + cg * np.einsum(pattern, a[ma], b[mb])
        out[M] = acc
    return out


def _half() -> dict:
    return {m: _basis_vector(0.5, m) for m in _ms(0.5)}


def triplet_states() -> dict:
    """``m -> 2x2`` array of the on-site triplet (axes: chain 1, chain 2)."""
    return couple(_half(), 0.5, _half(), 0.5, 1, "a,b->ab")


def recoupling_table() -> dict[int, dict[tuple[int, int], float]]:
    """Overlaps of (psi_x ⊗ psi_{x+1})^J with (phi_1^S ⊗ phi_2^S')^J.

    Four-index arrays carry axes (x chain 1, x chain 2, x+1 chain 1,
    x+1 chain 2).  ``psi`` couples the two chains on one site, ``phi_lam``
    couples the two sites of one chain.
    """
    psi = triplet_states()
    table: dict[int, dict[tuple[int, int], float]] = {}
    for J in (0, 1, 2):
        left = couple(psi, 1, psi, 1, J, "ab,cd->abcd")[0]
        row = {}
        for S in (0, 1):
            phi1 = couple(_half(), 0.5, _half(), 0.5, S, "a,c->ac")
            for Sp in (0, 1):
                if not abs(S - Sp) <= J <= S + Sp:
                    continue
                phi2 = couple(_half(), 0.5, _half(), 0.5, Sp, "b,d->bd")
                right = couple(phi1, S, phi2, Sp, J, "ac,bd->abcd")[0]
                overlap = float(np.vdot(right, left).real)
                if abs(overlap) > 1e-14:
                    row[(S, Sp)] = overlap
        table[J] = row
    return table


def triplet_isometry() -> np.ndarray:
    """4x3 map from spin-1 states to the triplet in C^2 ⊗ C^2."""
    psi = triplet_states()
    return np.stack([psi[m].ravel() for m in _ms(1)], axis=1)


def effective_couplings() -> dict[int, tuple[float, int]]:
    """Eigenvalues of the triplet-projected ``S_{x,2}.S_{x+1,2} - 1/4`` per total J.

    Returns ``J -> (value, degeneracy)``.
    """
    sx, sy, sz = spin_matrices(0.5)
    eye2 = np.eye(2)

    def on(op, axis):
        mats = [eye2] * 4
        mats[axis] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    # axes: (x,1), (x,2), (x+1,1), (x+1,2)
    O = sum(on(s, 1) @ on(s, 3) for s in (sx, sy, sz)) - 0.25 * np.eye(16)
    W = np.kron(triplet_isometry(), triplet_isometry())
    block = W.conj().T @ O @ W
    S1 = spin_matrices(1)
    total2 = sum(np.linalg.matrix_power(np.kron(s, np.eye(3)) + np.kron(np.eye(3), s), 2) for s in S1)
    E, V = np.linalg.eigh(block)
    out: dict[int, list] = {}
    for e, v in zip(E, V.T):
        jj = float(np.real(np.vdot(v, total2 @ v)))
        J = int(round((-1 + sqrt(1 + 4 * jj)) / 2))
        out.setdefault(J, []).append(e)
    return {J: (float(np.mean(vals)), len(vals)) for J, vals in sorted(out.items())}


# ---------------------------------------------------------------------------
# projected spin-1/2 ladder vs spin-1 chain


def spin_ladder_hamiltonian(L: int, coupling: float, delta: float = 1.0,
                            boundary: str = "open") -> sp.csr_matrix:
    """``coupling * sum (1 + (-1)^{x+lam+1} delta)^2 (S.S - 1/4)`` on 2L spins.

    Spin ``(x, lam)`` sits at tensor position ``2 x + lam``.
    """
    mats = spin_matrices(0.5)
    n = 2 * L
    H = sp.csr_matrix((2 ** n, 2 ** n), dtype=complex)
    ident = sp.identity(2 ** n, format="csr")
    for lam in (0, 1):
        for x, y in _bonds(L, boundary):
            w = bond_weight(x, delta, lam) ** 2
            if w == 0:
                continue
            bond = sum(site_operator(s, 2 * x + lam, n) @ site_operator(s, 2 * y + lam, n)
                       for s in mats)
            H = H + coupling * w * (bond - 0.25 * ident)
    return H


def compare_effective(L: int, coupling: float = 1.0, boundary: str = "open") -> float:
    """Max eigenvalue gap between the triplet-projected ladder and the spin-1 chain."""
    if not 2 <= L <= 6:
        raise ValueError("compare_effective supports 2 <= L <= 6")
    T = sp.csr_matrix(triplet_isometry())
    iso = T
    for _ in range(L - 1):
        iso = sp.kron(iso, T, format="csr")
    projected = (iso.conj().T @ spin_ladder_hamiltonian(L, coupling, 1.0, boundary) @ iso).toarray()
    eff = heisenberg_spin_chain(SpinChainSpec(L, coupling, 1, boundary)).toarray()
    return float(np.abs(np.linalg.eigvalsh(projected) - np.linalg.eigvalsh(eff)).max())


# ---------------------------------------------------------------------------
# strong coupling


def singlet_triplet_splitting(t: float, U: float) -> float:
    """Triplet minus singlet energy of the two-site Hubbard model at half filling."""
    spec = HubbardSpec(2, t, U)
    space = FockSpace(4, 2)
    from .models import hubbard_hamiltonian

    H = realize_expression(hubbard_hamiltonian(spec), space).toarray()
    S = [realize_expression(spin_expression(spec, 0, i) + spin_expression(spec, 1, i), space).toarray()
         for i in range(3)]
    S2 = sum(s @ s for s in S)
    # diagonalize H inside each S^2 eigenspace so degeneracies cannot mix spins
    s2, W = np.linalg.eigh(S2)

    def lowest(value):
        B = W[:, np.abs(s2 - value) < 1e-8]
        return np.linalg.eigvalsh(B.conj().T @ H @ B)[0]

    return float(lowest(2) - lowest(0))


def strong_coupling_check(U_over_t: float, t: float = 1.0) -> float:
    """Relative error of the two-site splitting against ``2 |t|^2 / U``."""
    if U_over_t < 10:
        raise ValueError("strong-coupling check needs U/t >= 10")
    U = U_over_t * abs(t)
    J = 2 * abs(t) ** 2 / U
    return abs(singlet_triplet_splitting(t, U) - J) / J


# ---------------------------------------------------------------------------
# deformation path


@dataclass(frozen=True)
class DeformationPath:
    """Piecewise-linear path through (t, delta, U, V) with ``steps`` samples per leg."""

    waypoints: tuple[tuple[float, float, float, float], ...]
    steps: int = 8

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        for w in self.waypoints:
            if len(w) != 4 or not all(np.isfinite(w)):
                raise ValueError("waypoints are finite (t, delta, U, V) tuples")
            if not 0 <= w[1] <= 1:
                raise ValueError("delta must lie in [0, 1]")
        if self.steps < 1:
            raise ValueError("need at least one step per leg")

    def samples(self) -> list[tuple[int, tuple[float, float, float, float]]]:
        out = []
        for leg, (a, b) in enumerate(zip(self.waypoints[:-1], self.waypoints[1:])):
            for s in range(self.steps):
                frac = s / (self.steps - 1) if self.steps > 1 else 1.0
                out.append((leg, tuple(float(x + frac * (y - x)) for x, y in zip(a, b))))
        return out


def default_path(steps: int = 8, t: float = 1.0, U: float = 8.0, V: float = 8.0) -> DeformationPath:
    return DeformationPath(((t, 0.5, 0.0, 0.0), (t, 1.0, 0.0, 0.0), (t, 1.0, U, 0.0), (t, 1.0, U, V)),
                           steps)


@dataclass
class GapSample:
    leg: int
    t: float
    delta: float
    U: float
    V: float
    E0: float
    E1: float
    gap: float
    ground_degeneracy: int
    k_residual: float
    ground_k_overlap: float


@dataclass
class GapProfile:
    L: int
    boundary: str
    samples: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"L": self.L, "boundary": self.boundary, "samples": [asdict(s) for s in self.samples]}


class TwoChainSystem:
    """Pieces of the two-chain Hamiltonian realized once on the half-filling sector."""

    def __init__(self, L: int, boundary: str = "periodic"):
        if 4 * L > MAX_ORBITALS:
            raise ValueError(f"4L = {4 * L} exceeds the {MAX_ORBITALS}-orbital cap")
        spec = HubbardSpec(L, 1.0, 0.0, 0.0, chains=2, boundary=boundary)
        self.L = L
        self.boundary = boundary
        self.space = FockSpace(4 * L, 2 * L)
        parts = hubbard_terms(spec)
        self.parts = {k: realize_expression(e, self.space).matrix for k, e in parts.items()}
        self.K = staggered_K(self.space, spec.layout())
        up = sum(1 << orbital_index(x, 0, lam, L) for x in range(L) for lam in (0, 1))
        n_up = popcount(self.space.basis & up)
        self.sz_blocks = {int(2 * m - 2 * L): np.nonzero(n_up == m)[0] for m in np.unique(n_up)}

    def hamiltonian(self, t: float, delta: float, U: float, V: float) -> sp.csr_matrix:
        p = self.parts
        return (abs(t) * ((1 + delta) * p["kinetic_plus"] + (1 - delta) * p["kinetic_minus"])
                + U * p["charge"] - V * p["hund"]).tocsr()

    def k_residual(self, H: sp.csr_matrix) -> float:
        from .fock import ManyBodyOperator

        return check_symmetry(self.K, ManyBodyOperator(self.space, self.space, H))


def _block_levels(H: sp.csr_matrix, idx: np.ndarray, k: int) -> np.ndarray:
    block = H[idx][:, idx]
    if block.nnz == 0 or abs(block.imag).max() == 0:
        block = block.real
    n = block.shape[0]
    if n <= 600:
        return np.linalg.eigvalsh(block.toarray())[:k]
    E = spla.eigsh(block, k=min(k, n - 2), which="SA", tol=1e-12, return_eigenvectors=False)
    return np.sort(E)


def low_levels(system: TwoChainSystem, H: sp.csr_matrix, k: int = 4) -> np.ndarray:
    """The lowest ``k`` levels of every S_z block, merged and sorted."""
    return np.sort(np.concatenate([_block_levels(H, idx, k) for idx in system.sz_blocks.values()]))


def _ground_vector(system: TwoChainSystem, H: sp.csr_matrix, E0: float) -> np.ndarray:
    for idx in system.sz_blocks.values():
        block = H[idx][:, idx]
        if block.shape[0] <= 600:
            E, V = np.linalg.eigh(block.toarray())
        else:
            E, V = spla.eigsh(block, k=2, which="SA", tol=1e-12)
        j = int(np.argmin(E))
        if abs(E[j] - E0) < 1e-8 * max(1.0, abs(E0)):
            psi = np.zeros(system.space.dim, dtype=complex)
            psi[idx] = V[:, j]
            return psi
    raise RuntimeError("ground vector not found")


def _evaluate(system: TwoChainSystem, leg: int, params) -> GapSample:
    t, delta, U, V = params
    H = system.hamiltonian(t, delta, U, V)
    levels = low_levels(system, H)
    norm = spla.norm(H, 1)
    tol = 1e-8 * norm
    E0 = float(levels[0])
    degeneracy = int(np.sum(levels < E0 + tol))
    above = levels[levels >= E0 + tol]
    E1 = float(above[0]) if above.size else E0
    overlap = float("nan")
    if degeneracy == 1:
        psi = _ground_vector(system, H, E0)
        overlap = float(abs(np.vdot(psi, system.K.unitary_part @ psi.conj())))
    return GapSample(leg, t, delta, U, V, E0, E1, E1 - E0, degeneracy, system.k_residual(H), overlap)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PHSYM_THREADS", "1")))
    except ValueError:
        return 1


def run_deformation(path: DeformationPath | None = None, L: int = 4,
                    boundary: str = "periodic") -> GapProfile:
    path = default_path() if path is None else path
    system = _system(L, boundary)
    samples = path.samples()
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda s: _evaluate(system, *s), samples))
    return GapProfile(L, boundary, results)


@lru_cache(maxsize=4)
def _system(L: int, boundary: str) -> TwoChainSystem:
    return TwoChainSystem(L, boundary)


def endpoint_comparison(L: int = 4, t: float = 1.0, U: float = 32.0, V: float = 4.0,
                        boundary: str = "periodic") -> dict:
    """Compare the S_z = 0 low-energy levels with the spin-1 chain.

    Both spectra are measured from their own ground energy.  The S_z = 0
    block holds one member of every multiplet, so the ``3^L``-state spin-1
    manifold appears there as the lowest ``dim(S_z = 0)`` levels.  The
    Hund term shifts the virtual-hopping energy by O(V), so agreement
    needs ``|t|^2 / U << V << U``.
    """
    system = _system(L, boundary)
    J = 2 * abs(t) ** 2 / U
    eff = heisenberg_spin_chain(SpinChainSpec(L, J, 1, boundary)).matrix
    sz_total = sum(site_operator(spin_matrices(1)[2], x, L) for x in range(L)).diagonal().real
    zero = np.nonzero(np.abs(sz_total) < 1e-12)[0]
    eff_levels = np.linalg.eigvalsh(eff[zero][:, zero].toarray())
    m = eff_levels.size
    H = system.hamiltonian(t, 1.0, U, V)
    full = _block_levels(H, system.sz_blocks[0], m + 3)
    low = full[:m] - full[0]
    ref = eff_levels - eff_levels[0]
    eff_norm = float(np.abs(np.linalg.eigvalsh(eff.toarray())).max())
    tolerance = 10 * abs(t) ** 2 / (U * min(U, V)) * eff_norm
    return {
        "levels": low.tolist(),
        "spin_one_levels": ref.tolist(),
        "discrepancy": float(np.abs(low - ref).max()),
        "tolerance": tolerance,
        "manifold_gap": float(full[m] - full[m - 1]),
    }


def conserved_quantity_residuals(L: int = 2, boundary: str = "periodic",
                                 params=(1.0, 0.7, 3.0, 2.0)) -> dict[str, float]:
    """Commutators of the two-chain H with total charge and total S_z."""
    spec = HubbardSpec(L, params[0], params[2], params[3], chains=2, delta=params[1], boundary=boundary)
    from .models import hubbard_hamiltonian, number_expression

    space = FockSpace(4 * L)
    H = realize_expression(hubbard_hamiltonian(spec), space).matrix
    Nop = realize_expression(number_expression(4 * L), space).matrix
    Sz = sum(realize_expression(spin_expression(spec, x, 2, lam), space).matrix
             for x in range(L) for lam in (0, 1))
    return {"charge": max_abs(H @ Nop - Nop @ H), "spin_z": max_abs(H @ Sz - Sz @ H)}
