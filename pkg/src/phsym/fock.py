"""Fermionic Fock spaces, creation/annihilation matrices and many-body maps.

Conventions
-----------
Basis states are bit patterns; bit ``j`` is the occupation of orbital ``j``
and orbital 0 is the least significant bit.  The basis vector of a pattern
with occupied orbitals ``j1 < j2 < ... < jn`` is
``a†_{j1} a†_{j2} ... a†_{jn} |vac>``, so that ``a†_j`` acquires the sign
``(-1)**(number of occupied orbitals with index < j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
import scipy.sparse as sp

MAX_ORBITALS = 24
DENSE_LIMIT = 4096


def popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.int64)).astype(np.int64)


class FockSpace:
    """Occupation-number basis over ``num_orbitals`` orbitals.

    ``sector`` fixes the particle number when given.  Arbitrary subsets of
    patterns (for example fixed-S_z blocks) can be built with
    :meth:`from_patterns`.
    """

    __slots__ = ("num_orbitals", "sector", "basis", "_custom")

    def __init__(self, num_orbitals: int, sector: int | None = None, *, _patterns=None):
        if not 1 <= num_orbitals <= MAX_ORBITALS:
            raise ValueError(f"num_orbitals must be in 1..{MAX_ORBITALS}, got {num_orbitals}")
        if sector is not None and not 0 <= sector <= num_orbitals:
            raise ValueError(f"sector must be in 0..{num_orbitals}, got {sector}")
        self.num_orbitals = int(num_orbitals)
        self.sector = None if sector is None else int(sector)
        if _patterns is not None:
            basis = np.unique(np.asarray(_patterns, dtype=np.int64))
            self._custom = True
        else:
            basis = np.arange(1 << num_orbitals, dtype=np.int64)
            if sector is not None:
                basis = basis[popcount(basis) == sector]
            self._custom = False
        basis.setflags(write=False)
        self.basis = basis

    @classmethod
    def from_patterns(cls, num_orbitals: int, patterns: Iterable[int]) -> "FockSpace":
        patterns = np.asarray(list(patterns) if not isinstance(patterns, np.ndarray) else patterns,
                              dtype=np.int64)
        if patterns.size and (patterns.min() < 0 or patterns.max() >= (1 << num_orbitals)):
            raise ValueError("pattern out of range")
        counts = np.unique(popcount(patterns))
        sector = int(counts[0]) if counts.size == 1 else None
        return cls(num_orbitals, sector, _patterns=patterns)

    @property
    def dim(self) -> int:
        return int(self.basis.size)

    @property
    def is_custom(self) -> bool:
        return self._custom

    def index_of(self, pattern: int) -> int:
        i = int(np.searchsorted(self.basis, pattern))
        if i >= self.dim or self.basis[i] != pattern:
            raise KeyError(f"pattern {pattern:#b} not in basis")
        return i

    def indices_of(self, patterns: np.ndarray) -> np.ndarray:
        """Vectorized lookup; returns -1 for patterns outside the basis."""
        patterns = np.asarray(patterns, dtype=np.int64)
        idx = np.searchsorted(self.basis, patterns)
        idx = np.minimum(idx, max(self.dim - 1, 0))
        found = self.basis[idx] == patterns if self.dim else np.zeros(patterns.shape, bool)
        return np.where(found, idx, -1)

    def occupations(self, i: int) -> tuple[int, ...]:
        b = int(self.basis[i])
        return tuple((b >> j) & 1 for j in range(self.num_orbitals))

    def particle_numbers(self) -> np.ndarray:
        return popcount(self.basis)

    def parity(self) -> sp.csr_matrix:
        """Fermion parity (-1)^F as a diagonal matrix."""
        return sp.diags((-1.0) ** self.particle_numbers(), format="csr").astype(complex)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FockSpace):
            return NotImplemented
        return (self.num_orbitals == other.num_orbitals and self.sector == other.sector
                and self.dim == other.dim and np.array_equal(self.basis, other.basis))

    def __hash__(self) -> int:
        return hash((self.num_orbitals, self.sector, self.dim))

    def __repr__(self) -> str:
        tag = ", custom" if self._custom else ""
        return f"FockSpace(N={self.num_orbitals}, sector={self.sector}, dim={self.dim}{tag})"


def enumerate_basis(N: int, sector: int | None = None) -> FockSpace:
    return FockSpace(N, sector)


@dataclass(frozen=True)
class SpinSpace:
    """Tensor-product space of ``L`` spins of size ``S`` (dimension (2S+1)^L)."""

    L: int
    S: float

    @property
    def dim(self) -> int:
        return int(round(2 * self.S + 1)) ** self.L


def max_abs(m) -> float:
    """Entrywise max norm of a dense or sparse matrix."""
    if sp.issparse(m):
        m = m.tocoo()
        return float(np.abs(m.data).max()) if m.nnz else 0.0
    m = np.asarray(m)
    return float(np.abs(m).max()) if m.size else 0.0


@dataclass(frozen=True, eq=False)
class ManyBodyOperator:
    """Linear map between two spaces, stored as a sparse complex matrix."""

    domain: Union[FockSpace, SpinSpace]
    codomain: Union[FockSpace, SpinSpace]
    matrix: sp.csr_matrix

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(f"matrix shape {m.shape} does not match "
                             f"({self.codomain.dim}, {self.domain.dim})")
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def dagger(self) -> "ManyBodyOperator":
        return ManyBodyOperator(self.codomain, self.domain, self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, ManyBodyOperator):
            if other.codomain != self.domain:
                raise ValueError("composition requires domain(A) = codomain(B)")
            return ManyBodyOperator(other.domain, self.codomain, self.matrix @ other.matrix)
        if isinstance(other, AntilinearMap):
            if other.codomain != self.domain:
                raise ValueError("composition requires domain(A) = codomain(B)")
            return AntilinearMap(other.domain, self.codomain, self.matrix @ other.unitary_part,
                                 check=False)
        return self.matrix @ other

    def _check_same(self, other: "ManyBodyOperator"):
        if other.domain != self.domain or other.codomain != self.codomain:
            raise ValueError("operators act between different spaces")

    def __add__(self, other):
        if isinstance(other, ManyBodyOperator):
            self._check_same(other)
            return ManyBodyOperator(self.domain, self.codomain, self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, ManyBodyOperator):
            self._check_same(other)
            return ManyBodyOperator(self.domain, self.codomain, self.matrix - other.matrix)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return ManyBodyOperator(self.domain, self.codomain, self.matrix * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return ManyBodyOperator(self.domain, self.codomain, -self.matrix)

    def __repr__(self) -> str:
        return f"ManyBodyOperator({self.domain!r} -> {self.codomain!r}, nnz={self.matrix.nnz})"


def identity(space) -> ManyBodyOperator:
    return ManyBodyOperator(space, space, sp.identity(space.dim, dtype=complex, format="csr"))


@dataclass(frozen=True, eq=False)
class AntilinearMap:
    """Antilinear map ``psi -> U @ conj(psi)`` stored through its unitary part ``U``."""

    domain: FockSpace
    codomain: FockSpace
    unitary_part: sp.csr_matrix
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        u = sp.csr_matrix(self.unitary_part, dtype=complex)
        if u.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError("unitary part does not match domain/codomain")
        if self.check:
            defect = max_abs(u.conj().T @ u - sp.identity(u.shape[1], format="csr"))
            if defect > 1e-12:
                raise ValueError(f"unitary part is not unitary (defect {defect:.3e})")
        object.__setattr__(self, "unitary_part", u)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.unitary_part @ np.conj(psi)

    def inverse(self) -> "AntilinearMap":
        # A^{-1} psi = conj(U^{-1} psi) = conj(U^dagger) conj(psi) = U^T conj(psi)
        return AntilinearMap(self.codomain, self.domain, self.unitary_part.T, check=False)

    def __matmul__(self, other):
        if isinstance(other, AntilinearMap):
            if other.codomain != self.domain:
                raise ValueError("composition requires domain(A) = codomain(B)")
            return ManyBodyOperator(other.domain, self.codomain,
                                    self.unitary_part @ other.unitary_part.conj())
        if isinstance(other, ManyBodyOperator):
            if other.codomain != self.domain:
                raise ValueError("composition requires domain(A) = codomain(B)")
            return AntilinearMap(other.domain, self.codomain,
                                 self.unitary_part @ other.matrix.conj(), check=False)
        return self.apply(other)

    def toarray(self) -> np.ndarray:
        return self.unitary_part.toarray()


def conjugate_by_antilinear(M: AntilinearMap, L: ManyBodyOperator,
                            M_in: AntilinearMap | None = None) -> ManyBodyOperator:
    """Return ``M L M_in^{-1}``, i.e. the matrix ``U conj(L) U_in^{-1}``.

    ``M_in`` defaults to ``M``; pass a different map when ``L`` changes space.
    """
    M_in = M if M_in is None else M_in
    if M.domain != L.codomain or M_in.domain != L.domain:
        raise ValueError("shape mismatch between antilinear map and operator")
    u_in_inv = M_in.unitary_part.conj().T
    return ManyBodyOperator(M_in.codomain, M.codomain,
                            M.unitary_part @ L.matrix.conj() @ u_in_inv)


# ---------------------------------------------------------------------------
# operator expressions


class Symbol(NamedTuple):
    orbital: int
    create: bool

    def __repr__(self) -> str:
        return f"a{'†' if self.create else ''}_{self.orbital}"


Word = tuple  # tuple[Symbol, ...]


class OperatorExpression:
    """Complex linear combination of ordered words in a† and a.

    Words are never reordered.  Identical words are merged and exact zero
    coefficients dropped.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[complex, Sequence]] = ()):
        acc: dict[tuple, complex] = {}
        for coef, word in terms:
            word = tuple(Symbol(int(j), bool(c)) for j, c in word)
            acc[word] = acc.get(word, 0) + complex(coef)
        self._terms = tuple((c, w) for w, c in acc.items() if c != 0)

    @property
    def terms(self) -> tuple[tuple[complex, tuple], ...]:
        return self._terms

    def __iter__(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other):
        if np.isscalar(other):
            other = constant(other)
        if not isinstance(other, OperatorExpression):
            return NotImplemented
        return OperatorExpression(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpression((-c, w) for c, w in self._terms)

    def __sub__(self, other):
        if np.isscalar(other):
            other = constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return OperatorExpression((c * other, w) for c, w in self._terms)
        if isinstance(other, OperatorExpression):
            return OperatorExpression((c1 * c2, w1 + w2)
                                      for c1, w1 in self._terms for c2, w2 in other._terms)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def dagger(self) -> "OperatorExpression":
        return OperatorExpression(
            (np.conj(c), tuple(Symbol(s.orbital, not s.create) for s in reversed(w)))
            for c, w in self._terms)

    def max_orbital(self) -> int:
        return max((s.orbital for _, w in self._terms for s in w), default=-1)

    def charges(self) -> set[int]:
        return {sum(1 if s.create else -1 for s in w) for _, w in self._terms}

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"({c:g})" + "".join(map(repr, w)) for c, w in self._terms)


def cdag(j: int) -> OperatorExpression:
    return OperatorExpression([(1.0, [(j, True)])])


def c(j: int) -> OperatorExpression:
    return OperatorExpression([(1.0, [(j, False)])])


def constant(z: complex) -> OperatorExpression:
    return OperatorExpression([(z, ())])


def commutator(a: OperatorExpression, b: OperatorExpression) -> OperatorExpression:
    return a * b - b * a


def _apply_word(word: Sequence[Symbol], states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply a word (rightmost symbol first) to an array of patterns."""
    states = states.copy()
    sign = np.ones(states.shape, dtype=np.int64)
    for sym in reversed(word):
        bit = np.int64(1) << sym.orbital
        occupied = (states & bit) != 0
        alive = ~occupied if sym.create else occupied
        sign = np.where(alive, sign, 0)
        below = popcount(states & (bit - 1))
        sign = sign * (1 - 2 * (below & 1))
        states = states ^ bit
    return states, sign


def _codomain_for(space: FockSpace, charge: int) -> FockSpace:
    if space.sector is None and not space.is_custom:
        return space
    if space.is_custom:
        if charge != 0:
            raise ValueError("charge-changing expression on a custom subspace")
        return space
    target = space.sector + charge
    if not 0 <= target <= space.num_orbitals:
        raise ValueError(f"expression maps sector {space.sector} outside 0..{space.num_orbitals}")
    return FockSpace(space.num_orbitals, target)


def realize_expression(expr: OperatorExpression, space: FockSpace,
                       codomain: FockSpace | None = None) -> ManyBodyOperator:
    """Matrix of ``expr`` on ``space``.

    On a fixed-sector space all words must change the particle number by the
    same amount; the codomain is then the shifted sector.
    """
    if expr.max_orbital() >= space.num_orbitals:
        raise IndexError(f"orbital {expr.max_orbital()} out of range for N={space.num_orbitals}")
    charges = expr.charges() or {0}
    fixed = space.sector is not None or space.is_custom
    if fixed and len(charges) > 1:
        raise ValueError("expression mixes particle-number sectors on a fixed-sector space")
    if codomain is None:
        codomain = _codomain_for(space, next(iter(charges)))
    rows, cols, vals = [], [], []
    col_index = np.arange(space.dim)
    for coef, word in expr:
        new, sign = _apply_word(word, space.basis)
        keep = sign != 0
        idx = codomain.indices_of(new[keep])
        if np.any(idx < 0):
            raise ValueError("expression leaves the requested codomain")
        rows.append(idx)
        cols.append(col_index[keep])
        vals.append(coef * sign[keep])
    if rows:
        r, cidx, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = cidx = np.zeros(0, dtype=np.int64)
        v = np.zeros(0, dtype=complex)
    m = sp.coo_matrix((v.astype(complex), (r, cidx)), shape=(codomain.dim, space.dim)).tocsr()
    m.sum_duplicates()
    m.eliminate_zeros()
    return ManyBodyOperator(space, codomain, m)


def creation_matrix(space: FockSpace, j: int) -> ManyBodyOperator:
    if not 0 <= j < space.num_orbitals:
        raise IndexError(f"orbital {j} out of range")
    if space.sector == space.num_orbitals and not space.is_custom:
        raise ValueError("creation out of the full sector has an empty codomain")
    return realize_expression(cdag(j), space)


def annihilation_matrix(space: FockSpace, j: int) -> ManyBodyOperator:
    if not 0 <= j < space.num_orbitals:
        raise IndexError(f"orbital {j} out of range")
    if space.sector == 0 and not space.is_custom:
        raise ValueError("annihilation out of the empty sector has an empty codomain")
    return realize_expression(c(j), space)


# ---------------------------------------------------------------------------
# single-particle data and second quantization


@dataclass(frozen=True, eq=False)
class SingleParticleHamiltonian:
    matrix: np.ndarray

    def __post_init__(self):
        h = np.array(self.matrix, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("single-particle Hamiltonian must be square")
        if h.size and np.abs(h - h.conj().T).max() > 1e-12:
            raise ValueError("single-particle Hamiltonian is not Hermitian")
        h.setflags(write=False)
        object.__setattr__(self, "matrix", h)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class BdgHamiltonian:
    h: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        h = SingleParticleHamiltonian(self.h).matrix
        d = np.array(self.delta, dtype=complex)
        if d.shape != h.shape:
            raise ValueError("pairing block must match the hopping block")
        if d.size and np.abs(d + d.T).max() > 1e-12:
            raise ValueError("pairing block must be skew-symmetric")
        d.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "delta", d)


def _as_array(h) -> np.ndarray:
    return np.asarray(getattr(h, "matrix", h), dtype=complex)


def one_body_expression(h) -> OperatorExpression:
    """Normal-ordered sum ``sum_jk h_jk a†_j a_k``."""
    h = _as_array(h)
    js, ks = np.nonzero(h)
    return OperatorExpression((h[j, k], ((j, True), (k, False))) for j, k in zip(js, ks))


def second_quantize_weyl(h, space: FockSpace) -> ManyBodyOperator:
    """``sum_jk h_jk a†_j a_k - Tr(h)/2``."""
    h = SingleParticleHamiltonian(_as_array(h)).matrix
    if h.shape[0] != space.num_orbitals:
        raise ValueError("h does not match the number of orbitals")
    H = realize_expression(one_body_expression(h), space, codomain=space)
    return H - (np.trace(h) / 2) * identity(space)


def bdg_expression(hb: BdgHamiltonian) -> OperatorExpression:
    d = hb.delta
    terms = []
    for k, kp in zip(*np.nonzero(d)):
        terms.append((0.5 * d[k, kp], ((k, True), (kp, True))))
        terms.append((0.5 * np.conj(d[k, kp]), ((kp, False), (k, False))))
    return one_body_expression(hb.h) + OperatorExpression(terms)


def second_quantize_bdg(hb: BdgHamiltonian, space: FockSpace) -> ManyBodyOperator:
    if space.sector is not None or space.is_custom:
        raise ValueError("pairing terms require the full Fock space")
    if hb.h.shape[0] != space.num_orbitals:
        raise ValueError("BdG blocks do not match the number of orbitals")
    H = realize_expression(bdg_expression(hb), space)
    return H - (np.trace(hb.h) / 2) * identity(space)


def exterior_power(A: np.ndarray, domain: FockSpace, codomain: FockSpace) -> ManyBodyOperator:
    """Matrix of the induced map v1∧...∧vn -> Av1∧...∧Avn between sectors.

    ``A`` has shape (codomain orbitals, domain orbitals).  Entries are the
    minors ``det A[C, B]``.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (codomain.num_orbitals, domain.num_orbitals):
        raise ValueError("single-particle map does not match the spaces")
    if codomain.is_custom or domain.is_custom:
        raise ValueError("exterior powers need standard sector or full spaces")
    if domain.sector is None:
        if codomain.sector is not None:
            raise ValueError("full-space domain needs a full-space codomain")
        blocks = [(FockSpace(domain.num_orbitals, n), FockSpace(codomain.num_orbitals, n))
                  for n in range(min(domain.num_orbitals, codomain.num_orbitals) + 1)]
    else:
        if codomain.sector != domain.sector:
            raise ValueError("exterior power preserves the particle number")
        blocks = [(domain, codomain)]

    cod_pats, dom_pats, vals = [], [], []
    square_diag = A.shape[0] == A.shape[1] and not np.any(A - np.diag(np.diag(A)))
    for dom, cod in blocks:
        n = dom.sector
        if square_diag:
            amp = np.ones(dom.dim, dtype=complex)
            for j in range(dom.num_orbitals):
                amp = np.where((dom.basis >> j) & 1, amp * A[j, j], amp)
            cod_pats.append(dom.basis)
            dom_pats.append(dom.basis)
            vals.append(amp)
            continue
        if n == 0:
            cod_pats.append(np.zeros(1, np.int64))
            dom_pats.append(np.zeros(1, np.int64))
            vals.append(np.ones(1, complex))
            continue
        if cod.dim * dom.dim * n * n > 5e7:
            raise ValueError("exterior power too large for dense minors")
        sub = A[_occupied_lists(cod)[:, None, :, None], _occupied_lists(dom)[None, :, None, :]]
        minors = np.linalg.det(sub)
        r, c_ = np.nonzero(minors)
        cod_pats.append(cod.basis[r])
        dom_pats.append(dom.basis[c_])
        vals.append(minors[r, c_])
    rows = codomain.indices_of(np.concatenate(cod_pats))
    cols = domain.indices_of(np.concatenate(dom_pats))
    m = sp.coo_matrix((np.concatenate(vals), (rows, cols)),
                      shape=(codomain.dim, domain.dim)).tocsr()
    return ManyBodyOperator(domain, codomain, m)


def _occupied_lists(space: FockSpace) -> np.ndarray:
    bits = (space.basis[:, None] >> np.arange(space.num_orbitals)) & 1
    return np.nonzero(bits)[1].reshape(space.dim, space.sector)


# ---------------------------------------------------------------------------
# serialization


def to_triplets(m) -> dict:
    """JSON-ready triplet form ``{rows, cols, entries: [[r, c, re, im], ...]}``."""
    mat = getattr(m, "matrix", None)
    if mat is None:
        mat = getattr(m, "unitary_part", m)
    coo = sp.coo_matrix(mat)
    return {
        "rows": int(coo.shape[0]),
        "cols": int(coo.shape[1]),
        "entries": [[int(r), int(c_), float(v.real), float(v.imag)]
                    for r, c_, v in zip(coo.row, coo.col, coo.data)],
    }


def from_triplets(d: dict) -> sp.csr_matrix:
    e = np.asarray(d["entries"], dtype=float).reshape(-1, 4)
    return sp.coo_matrix((e[:, 2] + 1j * e[:, 3], (e[:, 0].astype(int), e[:, 1].astype(int))),
                         shape=(d["rows"], d["cols"])).tocsr()


def dimension(N: int, sector: int | None) -> int:
    return 1 << N if sector is None else comb(N, sector)
