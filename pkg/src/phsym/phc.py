"""Particle-hole conjugation on a finite Fock space.

``Xi`` sends the sector with ``n`` particles to the sector with ``N - n``
particles.  It is the composition of the antilinear identification of a
sector with its dual (``e_B -> f_B``) and the wedge isomorphism ``omega_n``
fixed by::

    (omega_n f) ∧ psi' = f(psi') * Omega_n,
    Omega_0 = e_0 ∧ ... ∧ e_{N-1},   Omega_n = (-1)**(N - n) * Omega_{n-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import (
    AntilinearMap,
    FockSpace,
    ManyBodyOperator,
    OperatorExpression,
    Symbol,
    exterior_power,
    max_abs,
    popcount,
    realize_expression,
    second_quantize_weyl,
)

ORACLE_MAX_ORBITALS = 12


@dataclass(frozen=True)
class WedgeTop:
    """Top form with +1 on the all-occupied pattern and its signed copies."""

    num_orbitals: int

    @property
    def pattern(self) -> int:
        return (1 << self.num_orbitals) - 1

    def sign(self, n: int) -> int:
        """Sign of ``Omega_n`` relative to ``Omega``."""
        N = self.num_orbitals
        exponent = sum(N - k for k in range(1, n + 1))
        return -1 if exponent % 2 else 1


def _inversions(seq) -> int:
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def wedge(left: tuple[int, ...], right: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """``e_left ∧ e_right`` for ascending index tuples, as (sign, ascending union)."""
    if set(left) & set(right):
        return 0, ()
    merged = tuple(left) + tuple(right)
    return (-1 if _inversions(merged) % 2 else 1), tuple(sorted(merged))


def _orbitals(pattern: int) -> tuple[int, ...]:
    return tuple(j for j in range(pattern.bit_length()) if pattern >> j & 1)


def xi_oracle(N: int) -> AntilinearMap:
    """Build Xi by solving the wedge-pairing system sector by sector."""
    if not 1 <= N <= ORACLE_MAX_ORBITALS:
        raise ValueError(f"oracle supports 1 <= N <= {ORACLE_MAX_ORBITALS}")
    full = FockSpace(N)
    top = WedgeTop(N)
    omega = tuple(range(N))
    rows, cols, vals = [], [], []
    for n in range(N + 1):
        dom = FockSpace(N, n)
        cod = FockSpace(N, N - n)
        dom_sets = [_orbitals(int(b)) for b in dom.basis]
        cod_sets = [_orbitals(int(b)) for b in cod.basis]
        # pairing[p, c] = coefficient of Omega in e_c ∧ e_{B_p}
        pairing = np.zeros((dom.dim, cod.dim))
        for p, bset in enumerate(dom_sets):
            for q, cset in enumerate(cod_sets):
                s, union = wedge(cset, bset)
                if s and union == omega:
                    pairing[p, q] = s
        # columns of X are omega_n(f_B) expanded on the e_C basis
        X = np.linalg.solve(pairing, top.sign(n) * np.eye(dom.dim))
        q_idx, b_idx = np.nonzero(np.abs(X) > 0.5)
        rows.append(full.indices_of(cod.basis[q_idx]))
        cols.append(full.indices_of(dom.basis[b_idx]))
        vals.append(np.round(X[q_idx, b_idx]))
    U = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(full.dim, full.dim)).tocsr()
    return AntilinearMap(full, full, U)


def xi_signs(N: int, patterns: np.ndarray) -> np.ndarray:
    """Closed-form sign of ``Xi e_B`` on its complement pattern.

    ``Xi e_B = s_n * eta(C, B) e_C`` with ``C`` the complement, ``s_n`` the
    sign of ``Omega_n`` and ``eta(C, B)`` the shuffle sign of ``e_C ∧ e_B``,
    i.e. the parity of pairs ``c > b`` with ``c in C`` and ``b in B``.
    """
    patterns = np.asarray(patterns, dtype=np.int64)
    mask = np.int64((1 << N) - 1)
    comp = ~patterns & mask
    n = popcount(patterns)
    s_exp = n * N - n * (n + 1) // 2
    shuffle = np.zeros(patterns.shape, dtype=np.int64)
    for j in range(N):
        has = (patterns >> j) & 1
        shuffle += has * popcount(comp >> (j + 1))
    return 1 - 2 * ((s_exp + shuffle) & 1)


def xi_fast(N: int, sector: int | None = None) -> AntilinearMap:
    """Xi as a signed permutation; restricted to one sector when given."""
    if not 1 <= N <= 24:
        raise ValueError("xi_fast supports 1 <= N <= 24")
    dom = FockSpace(N, sector)
    cod = dom if sector is None else FockSpace(N, N - sector)
    comp = ~dom.basis & np.int64((1 << N) - 1)
    U = sp.csr_matrix((xi_signs(N, dom.basis).astype(complex),
                       (cod.indices_of(comp), np.arange(dom.dim))), shape=(cod.dim, dom.dim))
    return AntilinearMap(dom, cod, U, check=False)


def xi_for(space: FockSpace) -> AntilinearMap:
    if space.is_custom:
        raise ValueError("Xi is defined on full or fixed-sector spaces")
    return xi_fast(space.num_orbitals, space.sector)


def xi_square_sign(N: int) -> int:
    return -1 if (N * (N - 1) // 2) % 2 else 1


# ---------------------------------------------------------------------------
# flat automorphism and the one-body lemma


def flat_expression(expr: OperatorExpression) -> OperatorExpression:
    """Swap a† <-> a symbol by symbol, keep word order, conjugate coefficients."""
    return OperatorExpression(
        (np.conj(coef), tuple(Symbol(s.orbital, not s.create) for s in word))
        for coef, word in expr)


def check_weyl_lemma(A: OperatorExpression, space: FockSpace) -> float:
    """``max |realize(A♭) + realize(A)†|`` for a one-body expression ``A``."""
    if any(len(word) != 2 for _, word in A):
        raise ValueError("expression is not one-body (every word must have two symbols)")
    if space.sector is not None:
        raise ValueError("the lemma is checked on the full Fock space")
    flat = realize_expression(flat_expression(A), space)
    plain = realize_expression(A, space)
    return max_abs(flat.matrix + plain.matrix.conj().T)


# ---------------------------------------------------------------------------
# involutions and K = Xi ∘ lift(Gamma)


@dataclass(frozen=True, eq=False)
class GammaInvolution:
    matrix: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        g = np.array(self.matrix, dtype=complex)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("Gamma must be square")
        g.setflags(write=False)
        object.__setattr__(self, "matrix", g)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_unitary(self) -> bool:
        g = self.matrix
        return np.abs(g.conj().T @ g - np.eye(self.size)).max() < self.tol

    @property
    def is_involution(self) -> bool:
        g = self.matrix
        return np.abs(g @ g - np.eye(self.size)).max() < self.tol

    @classmethod
    def staggered(cls, sites) -> "GammaInvolution":
        sites = np.asarray(sites)
        return cls(np.diag((-1.0) ** sites))


def _require_involution(g: GammaInvolution):
    if not (g.is_unitary and g.is_involution):
        raise ValueError("Gamma must be a unitary involution")


def lift_gamma(g: GammaInvolution, space: FockSpace) -> ManyBodyOperator:
    _require_involution(g)
    if g.size != space.num_orbitals:
        raise ValueError("Gamma does not match the number of orbitals")
    return exterior_power(g.matrix, space, space)


def make_K(g: GammaInvolution, space: FockSpace) -> AntilinearMap:
    _require_involution(g)
    if g.size != space.num_orbitals:
        raise ValueError("Gamma does not match the number of orbitals")
    xi = xi_for(space)
    lift = lift_gamma(g, space)
    return AntilinearMap(space, xi.codomain, xi.unitary_part @ lift.matrix.conj(), check=False)


def conjugation_residual(M: AntilinearMap, H: ManyBodyOperator, sign: int = 1) -> float:
    """``max |U conj(H) U^{-1} - sign * H|``."""
    if not (M.domain == M.codomain == H.domain == H.codomain):
        raise ValueError("antilinear map and operator must act on one space")
    U = M.unitary_part
    return max_abs(U @ H.matrix.conj() @ U.conj().T - sign * H.matrix)


def check_symmetry(M: AntilinearMap, H: ManyBodyOperator) -> float:
    return conjugation_residual(M, H, 1)


def check_chiral(g: GammaInvolution, h) -> float:
    h = np.asarray(getattr(h, "matrix", h), dtype=complex)
    if h.shape != g.matrix.shape:
        raise ValueError("dimension mismatch")
    return float(np.abs(g.matrix @ h + h @ g.matrix).max())


def k_symmetry_of_one_body(g: GammaInvolution, h, space: FockSpace | None = None) -> float:
    """K-symmetry residual of the Weyl-ordered second quantization of ``h``."""
    h = np.asarray(getattr(h, "matrix", h), dtype=complex)
    space = FockSpace(h.shape[0]) if space is None else space
    return check_symmetry(make_K(g, space), second_quantize_weyl(h, space))


def conjugation_law_residual(N: int) -> float:
    """Worst ``|Xi a†_j Xi^-1 - a_j|`` and ``|Xi a_j Xi^-1 - a†_j|`` on the full space."""
    from .fock import c, cdag

    space = FockSpace(N)
    U = xi_fast(N).unitary_part
    worst = 0.0
    for j in range(N):
        create = realize_expression(cdag(j), space).matrix
        destroy = realize_expression(c(j), space).matrix
        worst = max(worst, max_abs(U @ create.conj() @ U.conj().T - destroy),
                    max_abs(U @ destroy.conj() @ U.conj().T - create))
    return worst
