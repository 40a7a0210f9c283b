"""Model Hamiltonians together with their sublattice involutions.

Orbital layout for sites ``x``, spin ``s`` (0 = up, 1 = down) and chain
``lam`` (0 or 1) is ``x + L * (s + 2 * lam)``.  Chain ``lam`` carries the
stagger sign ``(-1)**(x + lam + 1)``, so chain 0 has its weak bond on (0, 1)
and a dangling site at ``x = 0`` when fully dimerized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .fock import (
    AntilinearMap,
    BdgHamiltonian,
    FockSpace,
    ManyBodyOperator,
    OperatorExpression,
    SingleParticleHamiltonian,
    SpinSpace,
    c,
    cdag,
    realize_expression,
    second_quantize_bdg,
)
from .phc import GammaInvolution, make_K

Boundary = Literal["open", "periodic"]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def orbital_index(x: int, s: int, lam: int, L: int) -> int:
    return x + L * (s + 2 * lam)


def site_layout(L: int, spinful: bool = True, chains: int = 1) -> np.ndarray:
    """Site coordinate ``x`` of every orbital in the standard layout."""
    copies = (2 if spinful else 1) * chains
    return np.tile(np.arange(L), copies)


def _bonds(L: int, boundary: str) -> list[tuple[int, int]]:
    bonds = [(x, x + 1) for x in range(L - 1)]
    if boundary == "periodic" and L > 2:
        bonds.append((L - 1, 0))
    elif boundary == "periodic" and L == 2:
        bonds.append((1, 0))
    elif boundary != "open" and boundary != "periodic":
        raise ValueError(f"unknown boundary {boundary!r}")
    return bonds


@dataclass(frozen=True)
class ChainSpec:
    L: int
    t: float = 1.0
    delta: float = 0.0
    boundary: Boundary = "open"
    strong_first: bool = False

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("chains need L >= 2")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("stagger must lie in [0, 1]")
        if self.boundary == "periodic" and self.L % 2:
            raise ValueError("periodic staggered chains need an even number of sites")


def bond_weight(x: int, delta: float, lam: int = 0) -> float:
    """``1 + (-1)**(x + lam + 1) * delta`` for the bond (x, x+1)."""
    return 1.0 + (-1) ** (x + lam + 1) * delta


def ssh_single_particle(spec: ChainSpec) -> tuple[SingleParticleHamiltonian, GammaInvolution]:
    L = spec.L
    h = np.zeros((L, L), dtype=complex)
    shift = 1 if spec.strong_first else 0
    for x, y in _bonds(L, spec.boundary):
        amp = -spec.t * bond_weight(x, spec.delta, shift)
        h[y, x] += amp
        h[x, y] += np.conj(amp)
    return SingleParticleHamiltonian(h), GammaInvolution.staggered(np.arange(L))


def cosine_band_ring(L: int, t0: float = 1.0) -> tuple[SingleParticleHamiltonian, GammaInvolution]:
    """Uniform ring with band ``-t0 cos k``; Gamma is the staggering ``(-1)**x``."""
    if L % 2:
        raise ValueError("the cosine ring needs an even number of sites")
    h = np.zeros((L, L), dtype=complex)
    for x, y in _bonds(L, "periodic"):
        h[y, x] += -t0 / 2
        h[x, y] += -t0 / 2
    return SingleParticleHamiltonian(h), GammaInvolution.staggered(np.arange(L))


def two_chain_single_particle(L: int, t: float = 1.0, delta: float = 1.0,
                              boundary: Boundary = "open"
                              ) -> tuple[SingleParticleHamiltonian, GammaInvolution]:
    """Hopping part of the two spinful chains on ``4 L`` orbitals."""
    if boundary == "periodic" and L % 2:
        raise ValueError("periodic staggered chains need an even number of sites")
    N = 4 * L
    h = np.zeros((N, N), dtype=complex)
    for lam in (0, 1):
        for s in (0, 1):
            for x, y in _bonds(L, boundary):
                i, j = orbital_index(x, s, lam, L), orbital_index(y, s, lam, L)
                amp = -abs(t) * bond_weight(x, delta, lam)
                h[j, i] += amp
                h[i, j] += amp
    return SingleParticleHamiltonian(h), GammaInvolution.staggered(site_layout(L, True, 2))


def flat_band_bloch(lam: int, t: float = 1.0):
    """Bloch Hamiltonian of chain ``lam`` at full dimerization.

    The unit cell holds the sites (2m, 2m+1) bonded on chain 1, and
    ``h(k)_ab = sum_R h[(R, a), (0, b)] exp(i k R)`` is read off from a
    periodic real-space ring of four cells.
    """
    cells = 4
    h, _ = ssh_single_particle(ChainSpec(2 * cells, abs(t), 1.0, "periodic", strong_first=bool(lam)))
    hr = h.matrix

    def bloch(k: float) -> np.ndarray:
        out = np.zeros((2, 2), dtype=complex)
        for R in range(-1, 2):
            for a in range(2):
                for b in range(2):
                    out[a, b] += hr[(2 * R + a) % (2 * cells), b] * np.exp(1j * k * R)
        return out

    return bloch


# ---------------------------------------------------------------------------
# BdG chain


def kitaev_chain(L: int, t: float = 1.0, boundary: Boundary = "periodic") -> BdgHamiltonian:
    """Blocks of ``(t/2) sum_x (a_{x+1} - a†_{x+1})(a_x + a†_x)``.

    Expanding gives hopping ``-(t/2)(a†_x a_{x+1} + h.c.)`` and pairing
    ``-(t/2) a†_{x+1} a†_x + (t/2) a_{x+1} a_x``.
    """
    if L < 2:
        raise ValueError("chains need L >= 2")
    h = np.zeros((L, L), dtype=complex)
    d = np.zeros((L, L), dtype=complex)
    for x, y in _bonds(L, boundary):
        h[x, y] += -t / 2
        h[y, x] += -t / 2
        d[x, y] += t / 2
        d[y, x] -= t / 2
    return BdgHamiltonian(h, d)


def kitaev_expression(L: int, t: float = 1.0, boundary: Boundary = "periodic") -> OperatorExpression:
    expr = OperatorExpression()
    for x, y in _bonds(L, boundary):
        expr = expr + (t / 2) * (c(y) - cdag(y)) * (c(x) + cdag(x))
    return expr


def kitaev_mode(L: int, k: float) -> OperatorExpression:
    """``alpha_k = sum_x e^{ikx} (i sin(k/2) a_x + cos(k/2) a†_x)``."""
    expr = OperatorExpression()
    for x in range(L):
        phase = np.exp(1j * k * x)
        expr = expr + (phase * 1j * np.sin(k / 2)) * c(x) + (phase * np.cos(k / 2)) * cdag(x)
    return expr


def line_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between the complex lines through ``a`` and ``b``.

    Both are normalized; the phase of ``b`` is aligned to ``a`` before
    taking the Frobenius norm of the difference.
    """
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def kitaev_quasiparticle_check(L: int, t: float = 1.0, ks=None) -> dict[float, tuple[float, float]]:
    """Residuals of ``[H, alpha_k] = -t alpha_k`` and ``K alpha_k K^-1 ∝ alpha_{pi-k}``."""
    if L % 2:
        raise ValueError("the quasi-particle check needs an even ring")
    grid = 2 * np.pi * np.arange(L) / L
    ks = grid if ks is None else np.asarray(ks, dtype=float)
    space = FockSpace(L)
    H = second_quantize_bdg(kitaev_chain(L, t, "periodic"), space).matrix
    K = staggered_K(space, np.arange(L))
    U = K.unitary_part
    out = {}
    for k in ks:
        if np.min(np.abs(np.exp(1j * grid) - np.exp(1j * k))) > 1e-9:
            raise ValueError(f"momentum {k} is not on the ring grid")
        alpha = realize_expression(kitaev_mode(L, k), space).matrix
        r1 = np.abs((H @ alpha - alpha @ H + t * alpha).toarray()).max()
        conj = (U @ alpha.conj() @ U.conj().T).toarray()
        partner = realize_expression(kitaev_mode(L, np.pi - k), space).toarray()
        out[float(k)] = (float(r1), line_distance(conj, partner))
    return out


# ---------------------------------------------------------------------------
# Hubbard family


@dataclass(frozen=True)
class HubbardSpec:
    L: int
    t: complex = 1.0
    U: float = 0.0
    V: float = 0.0
    chains: int = 1
    spinful: bool = True
    delta: float = 0.0
    boundary: Boundary = "open"

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("chains need L >= 2")
        if self.chains not in (1, 2):
            raise ValueError("chains must be 1 or 2")
        if self.chains == 2 and not self.spinful:
            raise ValueError("two chains require spinful fermions")
        if self.U < 0 or self.V < 0:
            raise ValueError("U and V must be non-negative")
        if self.delta and self.boundary == "periodic" and self.L % 2:
            raise ValueError("periodic staggered chains need an even number of sites")

    @property
    def num_orbitals(self) -> int:
        return self.L * (2 if self.spinful else 1) * self.chains

    def layout(self) -> np.ndarray:
        return site_layout(self.L, self.spinful, self.chains)


def _spins(spec: HubbardSpec):
    return (0, 1) if spec.spinful else (0,)


def charge_expression(spec: HubbardSpec, x: int, lam: int = 0) -> OperatorExpression:
    """Weyl-ordered site charge ``(1/2) sum_s [a†, a]``."""
    expr = OperatorExpression()
    for s in _spins(spec):
        j = orbital_index(x, s, lam, spec.L)
        expr = expr + 0.5 * (cdag(j) * c(j) - c(j) * cdag(j))
    return expr


def spin_expression(spec: HubbardSpec, x: int, component: int, lam: int = 0) -> OperatorExpression:
    """``S^i = (1/2) sum_{ss'} a†_s sigma^i_{ss'} a_s'`` at site ``x`` of chain ``lam``."""
    if not spec.spinful:
        raise ValueError("spin operators need spinful fermions")
    sigma = PAULI[component]
    expr = OperatorExpression()
    for s in (0, 1):
        for sp_ in (0, 1):
            if sigma[s, sp_] != 0:
                i = orbital_index(x, s, lam, spec.L)
                j = orbital_index(x, sp_, lam, spec.L)
                expr = expr + (0.5 * sigma[s, sp_]) * cdag(i) * c(j)
    return expr


def kinetic_expression(spec: HubbardSpec, lam: int, parity: int | None = None) -> OperatorExpression:
    """Hopping on chain ``lam``; ``parity`` keeps only bonds with sign (-1)**(x+lam+1) = parity."""
    t = complex(spec.t)
    expr = OperatorExpression()
    for x, y in _bonds(spec.L, spec.boundary):
        sign = (-1) ** (x + lam + 1)
        if parity is not None and sign != parity:
            continue
        w = 1.0 if parity is not None else bond_weight(x, spec.delta, lam)
        for s in _spins(spec):
            i, j = orbital_index(x, s, lam, spec.L), orbital_index(y, s, lam, spec.L)
            expr = expr - w * (t * cdag(j) * c(i) + np.conj(t) * cdag(i) * c(j))
    return expr


def hubbard_terms(spec: HubbardSpec) -> dict[str, OperatorExpression]:
    """Parameter-free pieces of the Hamiltonian.

    ``kinetic_plus`` / ``kinetic_minus`` are the hoppings on bonds with
    weight ``1 + delta`` / ``1 - delta`` (unit amplitude ``t``), ``charge`` is
    ``sum Q^2`` and ``hund`` is ``sum_x S_{x,1} . S_{x,2}``.
    """
    chains = range(spec.chains)
    kin_p = OperatorExpression()
    kin_m = OperatorExpression()
    for lam in chains:
        kin_p = kin_p + kinetic_expression(spec, lam, +1)
        kin_m = kin_m + kinetic_expression(spec, lam, -1)
    charge = OperatorExpression()
    for lam in chains:
        for x in range(spec.L):
            q = charge_expression(spec, x, lam)
            charge = charge + q * q
    hund = OperatorExpression()
    if spec.chains == 2:
        for x in range(spec.L):
            for i in range(3):
                hund = hund + spin_expression(spec, x, i, 0) * spin_expression(spec, x, i, 1)
    return {"kinetic_plus": kin_p, "kinetic_minus": kin_m, "charge": charge, "hund": hund}


def hubbard_hamiltonian(spec: HubbardSpec) -> OperatorExpression:
    """Hopping + ``U sum Q^2`` (- ``V sum S_1.S_2`` for two chains)."""
    parts = hubbard_terms(spec)
    expr = ((1 + spec.delta) * parts["kinetic_plus"] + (1 - spec.delta) * parts["kinetic_minus"]
            + spec.U * parts["charge"])
    if spec.chains == 2:
        expr = expr - spec.V * parts["hund"]
    return expr


def number_expression(num_orbitals: int) -> OperatorExpression:
    expr = OperatorExpression()
    for j in range(num_orbitals):
        expr = expr + cdag(j) * c(j)
    return expr


# ---------------------------------------------------------------------------
# spin chains


@dataclass(frozen=True)
class SpinChainSpec:
    L: int
    J: float = 1.0
    S: float = 0.5
    boundary: Boundary = "open"

    def __post_init__(self):
        if self.S not in (0.5, 1, 1.0):
            raise ValueError("only S = 1/2 and S = 1 are supported")
        if self.L < 2:
            raise ValueError("chains need L >= 2")
        if np.iscomplexobj(self.J) and np.imag(self.J) != 0:
            raise ValueError("J must be real")


def spin_matrices(S: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = int(round(2 * S + 1))
    m = S - np.arange(d)
    sp_ = np.zeros((d, d), dtype=complex)
    for i in range(1, d):
        sp_[i - 1, i] = np.sqrt(S * (S + 1) - m[i] * (m[i] + 1))
    sx = (sp_ + sp_.conj().T) / 2
    sy = (sp_ - sp_.conj().T) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def site_operator(op: np.ndarray, x: int, L: int) -> sp.csr_matrix:
    d = op.shape[0]
    return sp.kron(sp.kron(sp.identity(d ** x), sp.csr_matrix(op)),
                   sp.identity(d ** (L - x - 1)), format="csr")


def total_spin_operators(L: int, S: float) -> tuple[sp.csr_matrix, ...]:
    return tuple(sum(site_operator(s, x, L) for x in range(L)) for s in spin_matrices(S))


def heisenberg_spin_chain(spec: SpinChainSpec) -> ManyBodyOperator:
    """``J sum (S_x . S_{x+1} - c)`` with ``c = 1/4`` (S=1/2) or ``c = 1`` (S=1)."""
    shift = 0.25 if spec.S == 0.5 else 1.0
    space = SpinSpace(spec.L, float(spec.S))
    mats = spin_matrices(spec.S)
    H = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    ident = sp.identity(space.dim, format="csr")
    for x, y in _bonds(spec.L, spec.boundary):
        bond = sum(site_operator(s, x, spec.L) @ site_operator(s, y, spec.L) for s in mats)
        H = H + spec.J * (bond - shift * ident)
    return ManyBodyOperator(space, space, H)


def staggered_K(space: FockSpace, layout) -> AntilinearMap:
    """``K = Xi ∘ lift(diag((-1)**x))`` for the site coordinates in ``layout``."""
    layout = np.asarray(layout)
    if layout.shape != (space.num_orbitals,):
        raise ValueError("layout must give one site coordinate per orbital")
    return make_K(GammaInvolution.staggered(layout), space)


def decoupled_chains(n: int, length: int = 3) -> tuple[SingleParticleHamiltonian, GammaInvolution]:
    """``n`` fully dimerized chains, each with one dangling end site.

    With ``n = 0`` a single strongly bonded dimer stands in for the empty
    system.
    """
    if n == 0:
        return ssh_single_particle(ChainSpec(2, 1.0, 1.0, "open", strong_first=True))
    if length % 2 == 0:
        raise ValueError("odd chain length keeps one dangling end per chain")
    h1, g1 = ssh_single_particle(ChainSpec(length, 1.0, 1.0, "open"))
    h = np.kron(np.eye(n), h1.matrix)
    g = np.kron(np.eye(n), g1.matrix)
    return SingleParticleHamiltonian(h), GammaInvolution(g)

