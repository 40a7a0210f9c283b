"""Spectral splitting, chiral invariant, winding numbers and ground-space classes."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import (
    DENSE_LIMIT,
    AntilinearMap,
    FockSpace,
    ManyBodyOperator,
    OperatorExpression,
    c,
    max_abs,
    popcount,
    realize_expression,
)
from .phc import GammaInvolution, conjugation_residual, make_K


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    V_plus: np.ndarray
    V_zero: np.ndarray
    V_minus: np.ndarray
    tol_zero: float
    energies: np.ndarray = field(repr=False)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.V_plus.shape[1], self.V_zero.shape[1], self.V_minus.shape[1]


def _matrix(h) -> np.ndarray:
    return np.asarray(getattr(h, "matrix", h), dtype=complex)


def split_spectrum(h, tol: float | None = None, margin: float = 10.0) -> SpectralSplit:
    """Split C^N into positive, zero and negative energy eigenspaces.

    Levels with ``tol / margin <= |E| < tol * margin`` are ambiguous and
    raise instead of being assigned silently.
    """
    h = _matrix(h)
    if tol is None:
        tol = 1e-8 * max(np.linalg.norm(h, 2), 1.0) if h.size else 1e-8
    if tol <= 0:
        raise ValueError("tol must be positive")
    E, V = np.linalg.eigh(h)
    ambiguous = (np.abs(E) >= tol / margin) & (np.abs(E) < tol * margin)
    if np.any(ambiguous):
        raise ValueError(f"tolerance straddles a level (|E| = {np.abs(E[ambiguous]).min():.3e})")
    zero = np.abs(E) < tol
    plus = (E > 0) & ~zero
    minus = (E < 0) & ~zero
    return SpectralSplit(V[:, plus], V[:, zero], V[:, minus], tol, E)


def chiral_invariant(h, g: GammaInvolution, tol: float | None = None, window=None) -> int:
    """``dim V0^+ - dim V0^-`` for the Gamma eigenspaces inside the zero modes.

    ``window`` (boolean mask over orbitals) restricts the zero modes to
    those localized in that region, which isolates one edge of an open
    chain.
    """
    h = _matrix(h)
    G = g.matrix
    if np.abs(G @ h + h @ G).max() > 1e-10:
        raise ValueError("Gamma does not anticommute with h")
    V0 = split_spectrum(h, tol).V_zero
    if window is not None and V0.shape[1]:
        w = np.asarray(window, dtype=float)
        weight = V0.conj().T @ (w[:, None] * V0)
        ew, ev = np.linalg.eigh(weight)
        V0 = V0 @ ev[:, ew > 0.5]
    if V0.shape[1] == 0:
        return 0
    gamma0 = V0.conj().T @ G @ V0
    ev = np.linalg.eigvalsh((gamma0 + gamma0.conj().T) / 2)
    if np.any(np.minimum(np.abs(ev - 1), np.abs(ev + 1)) > 1e-6):
        raise ValueError("Gamma eigenvalue on the zero modes is not ±1")
    return int(np.sum(ev > 0) - np.sum(ev < 0))


def winding_number(offdiag, samples: int = 256) -> int:
    """Winding of ``k -> offdiag(k)`` around the origin over ``[0, 2 pi)``."""
    if samples < 16:
        raise ValueError("need at least 16 samples")
    ks = 2 * np.pi * np.arange(samples + 1) / samples
    values = np.array([complex(offdiag(k)) for k in ks])
    if np.any(np.abs(values) < 1e-10):
        raise ValueError("offdiag vanishes on the sample grid (gapless)")
    steps = np.angle(values[1:] / values[:-1])
    w = steps.sum() / (2 * np.pi)
    if abs(w - round(w)) > 0.01:
        raise ValueError(f"non-integer winding accumulation {w:.4f}")
    return int(round(w))


# ---------------------------------------------------------------------------
# ground-space classification

CASES = {(1, "commute"): "i", (-1, "commute"): "ii", (1, "anticommute"): "iii", (-1, "anticommute"): "iv"}


@dataclass(frozen=True)
class ClassificationResult:
    ground_dim: int
    k_square_sign: int
    parity_relation: str
    case_label: str
    residuals: dict

    def to_json(self) -> dict:
        d = asdict(self)
        d["case"] = d.pop("case_label")
        return d


def _lowest(H: sp.spmatrix, tol_gap: float) -> tuple[np.ndarray, np.ndarray]:
    """All eigenpairs within ``tol_gap`` of the minimum, plus one level above."""
    n = H.shape[0]
    if n <= DENSE_LIMIT:
        return np.linalg.eigh(H.toarray())
    k = 8
    while True:
        k = min(k, n - 2)
        E, V = spla.eigsh(H, k=k, which="SA", tol=1e-13)
        order = np.argsort(E)
        E, V = E[order], V[:, order]
        if E[-1] > E[0] + tol_gap or k >= n - 2:
            return E, V
        k *= 2


def ground_space(H: ManyBodyOperator, tol_gap: float | None = None,
                 blocks: list[np.ndarray] | None = None) -> tuple[float, np.ndarray, float]:
    """Ground energy, orthonormal ground-space basis and ``tol_gap`` used.

    ``blocks`` lists index sets of invariant subspaces (for example particle
    number sectors); they are diagonalized separately.
    """
    M = H.matrix
    n = M.shape[0]
    if tol_gap is None:
        scale = spla.norm(M, 1) if n else 1.0
        tol_gap = 1e-6 * max(scale, 1e-300)
    if blocks is None:
        blocks = [np.arange(n)]
    found = []
    for idx in blocks:
        E, V = _lowest(M[idx][:, idx], tol_gap)
        found.append((idx, E, V))
    E0 = min(E[0] for _, E, _ in found)
    columns = []
    for idx, E, V in found:
        for j in np.nonzero(E < E0 + tol_gap)[0]:
            col = np.zeros(n, dtype=complex)
            col[idx] = V[:, j]
            columns.append(col)
    return float(E0), np.array(columns).T, tol_gap


def classify_ground_space(H: ManyBodyOperator, K: AntilinearMap, tol_gap: float | None = None,
                          blocks: list[np.ndarray] | None = None) -> ClassificationResult:
    space = H.domain
    if not (K.domain == K.codomain == space == H.codomain):
        raise ValueError("K and H must act on the same space")
    k_res = conjugation_residual(K, H)
    if k_res > 1e-10:
        raise ValueError(f"K does not commute with H (residual {k_res:.3e})")
    if blocks is None and isinstance(space, FockSpace) and space.sector is None:
        numbers = space.particle_numbers()
        blocks = [np.nonzero(numbers == m)[0] for m in range(space.num_orbitals + 1)]
    _, V0, tol_gap = ground_space(H, tol_gap, blocks)
    U = K.unitary_part
    KV = U @ V0.conj()
    # K-invariance of the ground space
    leak = KV - V0 @ (V0.conj().T @ KV)
    inv_res = float(np.abs(leak).max()) if leak.size else 0.0
    if inv_res > 1e-8:
        raise ValueError(f"ground space is not K-invariant (residual {inv_res:.3e})")
    # K^2 = U conj(U) restricted to the ground space
    K2 = U @ U.conj()
    G = V0.conj().T @ (K2 @ V0)
    sign = 1 if np.real(np.trace(G)) >= 0 else -1
    sq_res = float(np.abs(G - sign * np.eye(G.shape[0])).max())
    if sq_res > 1e-8:
        raise ValueError(f"K^2 on the ground space is not ±1 (residual {sq_res:.3e})")
    P = space.parity()
    KPK = U @ P @ U.conj().T
    comm = max_abs(KPK - P)
    anti = max_abs(KPK + P)
    relation = "commute" if comm <= anti else "anticommute"
    residuals = {
        "k_symmetry": k_res,
        "ground_space_invariance": inv_res,
        "k_square": sq_res,
        "parity_relation": float(min(comm, anti)),
    }
    return ClassificationResult(V0.shape[1], sign, relation, CASES[(sign, relation)], residuals)


def decoupled_chain_classification(n: int, length: int = 3) -> ClassificationResult:
    """Classify ``n`` decoupled fully dimerized chains with one dangling end each."""
    from .fock import second_quantize_weyl
    from .models import decoupled_chains

    h, g = decoupled_chains(n, length)
    space = FockSpace(h.size)
    H = second_quantize_weyl(h, space)
    # each chain conserves its own particle number; label blocks by the tuple
    chain_len = h.size // max(n, 1)
    labels = np.zeros(space.dim, dtype=np.int64)
    for ch in range(max(n, 1)):
        mask = ((1 << chain_len) - 1) << (ch * chain_len)
        labels = labels * (chain_len + 1) + popcount(space.basis & mask)
    blocks = [np.nonzero(labels == v)[0] for v in np.unique(labels)]
    return classify_ground_space(H, make_K(g, space), blocks=blocks)


# ---------------------------------------------------------------------------
# pairwise gapping of zero modes


@dataclass(frozen=True)
class GappingReport:
    spectrum: list
    half_filling_spectrum: list
    k_residual: float
    energy_plus: float
    energy_hole: float
    line_distance: float
    identity_residual: float


def zero_mode_pair_gapping(space: FockSpace, alpha_plus: OperatorExpression,
                           alpha_minus: OperatorExpression, g: GammaInvolution) -> GappingReport:
    """Gap a K-even and a K-odd zero mode with ``a+† a- + a-† a+``."""
    from .models import line_distance

    K = make_K(g, space)
    U = K.unitary_part

    def conj_by_K(m):
        return U @ m.conj() @ U.conj().T

    def mat(e):
        return realize_expression(e, space).matrix

    ap, am = mat(alpha_plus), mat(alpha_minus)
    if max_abs(conj_by_K(ap) - ap.conj().T) > 1e-12:
        raise ValueError("alpha_plus is not particle-hole even")
    if max_abs(conj_by_K(am) + am.conj().T) > 1e-12:
        raise ValueError("alpha_minus is not particle-hole odd")
    pert_expr = alpha_plus.dagger() * alpha_minus + alpha_minus.dagger() * alpha_plus
    P = mat(pert_expr)
    k_res = max_abs(conj_by_K(P) - P)

    beta_p = alpha_plus + alpha_minus
    beta_h = alpha_plus.dagger() - alpha_minus.dagger()
    bp, bh = mat(beta_p), mat(beta_h)
    dist = line_distance(conj_by_K(bp).toarray(), bh.toarray())

    def lowering(b):
        # [P, b] = -E b identifies the excitation energy carried by b
        comm = (P @ b - b @ P).toarray().ravel()
        bv = b.toarray().ravel()
        return float(-np.real(np.vdot(bv, comm) / np.vdot(bv, bv)))

    quarter = 0.25 * ((bp.conj().T @ bp - bp @ bp.conj().T) + (bh.conj().T @ bh - bh @ bh.conj().T))
    ident = max_abs(quarter - P)

    E = np.linalg.eigvalsh(P.toarray())
    half = space.num_orbitals // 2
    idx = np.nonzero(space.particle_numbers() == half)[0]
    E_half = np.linalg.eigvalsh(P.toarray()[np.ix_(idx, idx)])
    return GappingReport(E.tolist(), E_half.tolist(), k_res, lowering(bp), lowering(bh), dist, ident)


def two_mode_toy() -> tuple[FockSpace, OperatorExpression, OperatorExpression, GammaInvolution]:
    """Orbital 0 is a K-even zero mode, orbital 1 a K-odd one."""
    return FockSpace(2), c(0), c(1), GammaInvolution(np.diag([1.0, -1.0]))


__all__ = [
    "SpectralSplit", "split_spectrum", "chiral_invariant", "winding_number",
    "ClassificationResult", "classify_ground_space", "decoupled_chain_classification",
    "ground_space", "GappingReport", "zero_mode_pair_gapping", "two_mode_toy", "CASES",
]
