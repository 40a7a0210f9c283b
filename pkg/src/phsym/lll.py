"""Lowest Landau level: Girvin's integral form of Xi, vortices and composites.

Single-particle states are the orthonormal monomials
``phi_l = z^l / sqrt(2^l l!)`` under ``dmu(z) = exp(-|z|^2/2) d^2z / (2 pi)``.
In that basis Xi is the plain occupation flip with the signs of
:func:`phsym.phc.xi_signs`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, sqrt

import numpy as np
import scipy.sparse as sp

from .fock import AntilinearMap, FockSpace, exterior_power, max_abs
from .phc import xi_fast

MAX_FLUX = 8


def lll_norms(N: int) -> list[int]:
    """``<z^j|z^j> = 2^j j!`` for ``j < N``."""
    if N < 1:
        raise ValueError("N must be positive")
    return [2 ** j * factorial(j) for j in range(N)]


@dataclass(frozen=True)
class LllSpace:
    flux: int

    def __post_init__(self):
        if not 1 <= self.flux <= MAX_FLUX:
            raise ValueError(f"flux must lie in 1..{MAX_FLUX}")

    @property
    def norms(self) -> list[int]:
        return lll_norms(self.flux)

    def fock(self, n: int | None = None) -> FockSpace:
        return FockSpace(self.flux, n)


@dataclass(frozen=True, eq=False)
class InterSpaceMap:
    """Linear map between sector bases ``(N, n) -> (N', n')``."""

    source: tuple[int, int]
    target: tuple[int, int]
    matrix: sp.csr_matrix

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        expected = (comb(*self.target), comb(*self.source))
        if m.shape != expected:
            raise ValueError(f"matrix shape {m.shape} does not match sectors {expected}")
        m.eliminate_zeros()
        object.__setattr__(self, "matrix", m)

    @property
    def domain(self) -> FockSpace:
        return FockSpace(*self.source)

    @property
    def codomain(self) -> FockSpace:
        return FockSpace(*self.target)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def image(self, occupation) -> dict[tuple[int, ...], complex]:
        """Image of one occupation pattern as ``{pattern: amplitude}``."""
        occupation = tuple(int(v) for v in occupation)
        if len(occupation) != self.source[0] or sum(occupation) != self.source[1]:
            raise ValueError("occupation does not belong to the source sector")
        pattern = sum(1 << j for j, v in enumerate(occupation) if v)
        col = self.matrix[:, self.domain.index_of(pattern)].toarray().ravel()
        cod = self.codomain
        return {cod.occupations(i): complex(col[i]) for i in np.nonzero(np.abs(col) > 1e-12)[0]}


def _check_sector(N: int, n: int, cap: int = MAX_FLUX):
    if not 0 <= n <= N or not 1 <= N <= cap:
        raise ValueError(f"need 0 <= n <= N and 1 <= N <= {cap}")


def _clean(m: sp.spmatrix, tol: float = 1e-13) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.data[np.abs(m.data) < tol] = 0
    m.eliminate_zeros()
    return m


# ---------------------------------------------------------------------------
# Girvin form


@lru_cache(maxsize=None)
def vandermonde_terms(N: int) -> dict[tuple[int, ...], int]:
    """Expand ``prod_{i<j} (z_i - z_j)`` into ``{exponents: coefficient}``."""
    poly: dict[tuple[int, ...], int] = {(0,) * N: 1}
    for j in range(N):
        for i in range(j):
            nxt: dict[tuple[int, ...], int] = {}
            for exps, coef in poly.items():
                for var, sign in ((i, 1), (j, -1)):
                    e = list(exps)
                    e[var] += 1
                    key = tuple(e)
                    nxt[key] = nxt.get(key, 0) + sign * coef
            poly = {k: v for k, v in nxt.items() if v}
    return poly


def _permutation_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        while seq[i] != sorted(seq)[i]:
            j = sorted(seq).index(seq[i])
            seq[i], seq[j] = seq[j], seq[i]
            sign = -sign
    return sign


def girvin_raw(N: int, n: int) -> sp.csr_matrix:
    """Unitary part of the integral ``Psi -> int conj(Psi) Omega`` on sector ``n``.

    ``Psi`` ranges over orthonormal Slater determinants, ``Omega`` is the
    normalized Vandermonde state.  Every integral reduces to the norm
    table; the output is expanded back on orthonormal determinants.
    """
    _check_sector(N, n)
    norms = np.array(lll_norms(N), dtype=float)
    omega_norm = factorial(N) * np.prod(norms)
    dom, cod = FockSpace(N, n), FockSpace(N, N - n)
    m = N - n
    out = np.zeros((cod.dim, dom.dim))
    for exps, v in vandermonde_terms(N).items():
        inner, outer = exps[:n], exps[n:]
        # the antisymmetric output is fixed by its ascending monomials
        if any(outer[a] >= outer[a + 1] for a in range(m - 1)):
            continue
        b_pat = sum(1 << k for k in inner)
        c_pat = sum(1 << k for k in outer)
        # <phi_b | z^k> = sqrt(norm_k) delta_bk; the determinant of Psi_B
        # contributes the sign of the permutation that sorts ``inner``
        amp = v * _permutation_sign(inner) / sqrt(factorial(n))
        amp *= np.prod(np.sqrt(norms[list(inner)]))
        # coefficient on e_C from the ascending monomial
        amp *= sqrt(factorial(m)) * np.prod(np.sqrt(norms[list(outer)]))
        out[cod.index_of(c_pat), dom.index_of(b_pat)] += amp / sqrt(omega_norm)
    return sp.csr_matrix(out)


def girvin_phase(N: int, n: int) -> int:
    """Sector sign relating the normalized integral form to Xi.

    It collects the orientation of the Vandermonde product, the order in
    which integrated and free variables enter ``Omega`` and the sign of
    ``Omega_n``.
    """
    s_n = (-1) ** (n * N - n * (n + 1) // 2)
    return (-1) ** (N * (N - 1) // 2) * (-1) ** (n * (N - n)) * s_n


def xi_lll(N: int, n: int) -> AntilinearMap:
    """Girvin's Xi on sector ``n``, rescaled by ``sqrt(C(N, n))`` and the sector phase."""
    raw = girvin_raw(N, n) * sqrt(comb(N, n)) * girvin_phase(N, n)
    return AntilinearMap(FockSpace(N, n), FockSpace(N, N - n), _clean(raw))


def girvin_residual(N: int, n: int) -> float:
    return max_abs(xi_lll(N, n).unitary_part - xi_fast(N, n).unitary_part)


# ---------------------------------------------------------------------------
# vortex, anti-vortex and composites


def vortex_single_particle(N: int, z0: complex) -> np.ndarray:
    """``m_{z0}: phi_l -> sqrt(2(l+1)) phi_{l+1} - z0 phi_l`` as an (N+1) x N matrix."""
    A = np.zeros((N + 1, N), dtype=complex)
    for l in range(N):
        A[l + 1, l] = sqrt(2 * (l + 1))
        A[l, l] = -z0
    return A


def vortex_map(N: int, n: int, z0: complex = 0.0) -> InterSpaceMap:
    _check_sector(N, n, MAX_FLUX + 2)
    op = exterior_power(vortex_single_particle(N, z0), FockSpace(N, n), FockSpace(N + 1, n))
    return InterSpaceMap((N, n), (N + 1, n), _clean(op.matrix))


def xi_conjugate(L: InterSpaceMap) -> InterSpaceMap:
    """``Xi L Xi^{-1}`` for ``L: (N, k) -> (N', k')``; maps ``(N, N-k) -> (N', N'-k')``.

    With ``Xi`` stored by its unitary parts ``V`` (target) and ``W``
    (source) the result is the linear matrix ``V conj(L) W^dagger``.
    """
    (N, k), (Np, kp) = L.source, L.target
    W = xi_fast(N, k).unitary_part
    V = xi_fast(Np, kp).unitary_part
    return InterSpaceMap((N, N - k), (Np, Np - kp), _clean(V @ L.matrix.conj() @ W.conj().T))


def antivortex_map(N: int, n: int, z0: complex = 0.0) -> InterSpaceMap:
    """``Xi U_{z0} Xi^{-1}: (N, n) -> (N+1, n+1)``."""
    _check_sector(N, n, MAX_FLUX + 2)
    return xi_conjugate(vortex_map(N, N - n, z0))


def _compose(second: InterSpaceMap, first: InterSpaceMap) -> InterSpaceMap:
    if second.source != first.target:
        raise ValueError("maps do not compose")
    return InterSpaceMap(first.source, second.target, _clean(second.matrix @ first.matrix))


def composite_map(N: int, n: int, z0: complex = 0.0) -> InterSpaceMap:
    """``C = U_flat U: (N, n) -> (N+2, n+1)``."""
    _check_sector(N, n)
    return _compose(antivortex_map(N + 1, n, z0), vortex_map(N, n, z0))


def composite_maps(N: int, n: int, z0: complex = 0.0) -> tuple[InterSpaceMap, InterSpaceMap]:
    """``(C, C_flat)`` with ``C_flat = Xi C Xi^{-1}``, both ``(N, n) -> (N+2, n+1)``."""
    _check_sector(N, n)
    return composite_map(N, n, z0), xi_conjugate(composite_map(N, N - n, z0))


def kramers_check(N: int, n: int, z0: complex = 0.0) -> float:
    """``max |C_flat_flat + C|`` on sector ``(N, n)``."""
    _check_sector(N, n)
    flat = xi_conjugate(composite_map(N, n, z0))  # (N, N-n) -> (N+2, N-n+1)
    flat_flat = xi_conjugate(flat)
    return max_abs(flat_flat.matrix + composite_map(N, n, z0).matrix)


def kramers_sign(N: int) -> int:
    """``Xi^2`` sign on N+2 orbitals times that on N orbitals."""
    return (-1) ** ((N + 2) * (N + 1) // 2 + N * (N - 1) // 2)


def occupation_table(m: InterSpaceMap) -> list[dict]:
    """Every source pattern with its image, for JSON reports."""
    dom = m.domain
    rows = []
    for i in range(dom.dim):
        occ = dom.occupations(i)
        rows.append({"source": list(occ),
                     "image": [{"pattern": list(p), "amplitude": [a.real, a.imag]}
                               for p, a in m.image(occ).items()]})
    return rows
