"""Model parameters, many-body bases and exact lattice Hamiltonians.

Two Hamiltonians are supported on a chain of ``n_sites`` sites:

* the extended Bose-Hubbard model
  ``-kappa sum (a_i^+ a_{i+1} + h.c.) + U/2 sum n_i(n_i-1) + V sum n_i n_{i+1}``
* the spin-1/2 Fermi-Hubbard model
  ``-kappa sum_s (c_{i,s}^+ c_{i+1,s} + h.c.) + U sum n_{i,up} n_{i,down}``

Bases are fixed particle-number (and spin) sectors in the occupation
representation, enumerated in descending lexicographic order of the
occupation vectors, so that for two bosons on two sites the order is
``|20>, |11>, |02>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 5000


class Statistics(enum.Enum):
    BOSE = "bose"
    FERMI_SPIN_HALF = "fermi"


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class PairKind(enum.Enum):
    """The three bound-pair species that can undergo a coherent shift."""

    ONSITE_BOSE = "onsite-bose"
    NN_BOSE = "nn-bose"
    FERMI_SINGLET = "fermi-singlet"

    @property
    def statistics(self) -> Statistics:
        if self is PairKind.FERMI_SINGLET:
            return Statistics.FERMI_SPIN_HALF
        return Statistics.BOSE

    @property
    def shift_distance(self) -> int:
        return 2 if self is PairKind.NN_BOSE else 1


@dataclass(frozen=True)
class ModelParams:
    """Couplings and lattice of one chain; energies in any unit, usually kappa."""

    kappa: float
    u: float
    v: float = 0.0
    n_sites: int = 2
    statistics: Statistics = Statistics.BOSE
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites}")
        if self.statistics is Statistics.FERMI_SPIN_HALF and self.v != 0:
            raise ValueError("the Fermi-Hubbard chain has no nearest-neighbour V")
        for name in ("kappa", "u", "v"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def bonds(self) -> list[tuple[int, int]]:
        n = self.n_sites
        bonds = [(i, i + 1) for i in range(n - 1)]
        if self.boundary is Boundary.PERIODIC and n > 1:
            bonds.append((n - 1, 0))
        return bonds

    def replace(self, **changes) -> "ModelParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return ModelParams(**values)


@dataclass(frozen=True)
class Sector:
    n_particles: int
    n_up: int | None = None
    n_down: int | None = None

    @classmethod
    def bose(cls, n: int) -> "Sector":
        return cls(n)

    @classmethod
    def fermi(cls, n_up: int, n_down: int) -> "Sector":
        return cls(n_up + n_down, n_up, n_down)


@dataclass(eq=False)
class SectorBasis:
    """Ordered configurations of one particle-number sector.

    ``occupations`` has one row per configuration. For bosons a row is the
    site-occupation vector; for fermions it is the up-spin occupation vector
    followed by the down-spin one (length ``2 * n_sites``).
    """

    n_sites: int
    statistics: Statistics
    sector: Sector
    occupations: np.ndarray
    _index: dict = field(repr=False, default_factory=dict)

    def __post_init__(self):
        self.occupations = np.ascontiguousarray(self.occupations, dtype=np.int8)
        self.occupations.setflags(write=False)
        if not self._index:
            self._index = {row.tobytes(): i for i, row in enumerate(self.occupations)}

    @property
    def dim(self) -> int:
        return self.occupations.shape[0]

    def __len__(self) -> int:
        return self.dim

    def index(self, occupation) -> int:
        key = np.ascontiguousarray(occupation, dtype=np.int8).tobytes()
        return self._index[key]

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        """Vectorised ``index`` over the rows of a 2-d array; -1 if absent."""
        rows = np.ascontiguousarray(rows, dtype=np.int8)
        get = self._index.get
        return np.fromiter((get(r.tobytes(), -1) for r in rows), dtype=np.int64, count=len(rows))

    def site_density(self, psi: np.ndarray) -> np.ndarray:
        """Mean particle number per site in the state ``psi``."""
        prob = np.abs(psi) ** 2
        occ = self.occupations.astype(float)
        if self.statistics is Statistics.FERMI_SPIN_HALF:
            occ = occ[:, : self.n_sites] + occ[:, self.n_sites:]
        return prob @ occ


class SparseHermitianOperator:
    """Hermitian operator stored as its upper triangle in COO form.

    Only entries with ``row <= col`` are kept; the lower triangle is the
    conjugate transpose. Duplicate coordinates are summed.
    """

    def __init__(self, dim: int, rows, cols, values):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values)
        if np.any(rows > cols):
            raise ValueError("only upper-triangle entries (row <= col) may be stored")
        if len(rows) and (rows.min() < 0 or cols.max() >= dim):
            raise ValueError("entry outside the operator dimension")
        diag = rows == cols
        if np.iscomplexobj(values) and np.any(values[diag].imag != 0):
            raise ValueError("diagonal entries of a Hermitian operator must be real")
        self.dim = int(dim)
        self.rows, self.cols, self.values = rows, cols, values
        for a in (self.rows, self.cols, self.values):
            a.setflags(write=False)
        self._csr = None

    @property
    def entries(self):
        return zip(self.rows.tolist(), self.cols.tolist(), self.values.tolist())

    def to_csr(self) -> sp.csr_matrix:
        if self._csr is None:
            upper = sp.coo_matrix((self.values, (self.rows, self.cols)), shape=(self.dim, self.dim))
            off = self.rows != self.cols
            strict = sp.coo_matrix(
                (self.values[off], (self.rows[off], self.cols[off])), shape=(self.dim, self.dim)
            )
            csr = (upper + strict.conj().T).tocsr()
            csr.sum_duplicates()
            csr.sort_indices()
            self._csr = csr
        return self._csr

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_csr() @ x

    __matmul__ = matvec

    def to_dense(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT:
            raise ValueError(f"dense extraction limited to dim <= {DENSE_LIMIT}, got {self.dim}")
        return self.to_csr().toarray()

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm (maximum absolute row sum)."""
        return float(abs(self.to_csr()).sum(axis=1).max()) if self.dim else 0.0

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.vdot(psi, self.matvec(psi)).real)

    def __add__(self, other: "SparseHermitianOperator") -> "SparseHermitianOperator":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return SparseHermitianOperator(
            self.dim,
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.cols, other.cols]),
            np.concatenate([self.values, other.values]),
        )

    @classmethod
    def from_pairs(cls, dim: int, rows, cols, values) -> "SparseHermitianOperator":
        """Build from entries given in either triangle (each pair once)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values)
        swap = rows > cols
        r = np.where(swap, cols, rows)
        c = np.where(swap, rows, cols)
        v = np.where(swap, np.conj(values), values) if np.iscomplexobj(values) else values
        return cls(dim, r, c, v)


def _sort_desc_lex(occ: np.ndarray) -> np.ndarray:
    if len(occ) == 0:
        return occ
    keys = tuple(-occ[:, c] for c in reversed(range(occ.shape[1])))
    return occ[np.lexsort(keys)]


def enumerate_basis(params: ModelParams, sector: Sector) -> SectorBasis:
    """All configurations of ``sector`` on the chain of ``params``."""
    n = params.n_sites
    if n < 2:
        raise ValueError("need at least two sites")
    if params.statistics is Statistics.BOSE:
        if sector.n_up is not None or sector.n_down is not None:
            raise ValueError("spin counts given for a bosonic sector")
        if sector.n_particles < 0:
            raise ValueError("particle number must be >= 0")
        occ = np.zeros((math.comb(n + sector.n_particles - 1, sector.n_particles), n), dtype=np.int8)
        for row, sites in enumerate(combinations_with_replacement(range(n), sector.n_particles)):
            for s in sites:
                occ[row, s] += 1
    else:
        n_up, n_down = sector.n_up, sector.n_down
        if n_up is None or n_down is None or n_up < 0 or n_down < 0:
            raise ValueError("fermion sectors need n_up >= 0 and n_down >= 0")
        if n_up > n or n_down > n:
            raise ValueError(f"Pauli capacity exceeded: at most {n} fermions per spin")
        ups = [np.isin(np.arange(n), c) for c in combinations(range(n), n_up)]
        downs = [np.isin(np.arange(n), c) for c in combinations(range(n), n_down)]
        occ = np.array([np.concatenate([u, d]) for u in ups for d in downs], dtype=np.int8)
        occ = occ.reshape(len(ups) * len(downs), 2 * n)
    return SectorBasis(n, params.statistics, sector, _sort_desc_lex(occ))


def _check_basis(params: ModelParams, basis: SectorBasis):
    if basis.statistics is not params.statistics or basis.n_sites != params.n_sites:
        raise ValueError("basis does not belong to these model parameters")


def site_major(occ: np.ndarray, n_sites: int) -> np.ndarray:
    """Reorder fermion rows ``[up..., down...]`` to modes ``(0up, 0dn, 1up, ...)``."""
    out = np.empty_like(occ)
    out[:, 0::2] = occ[:, :n_sites]
    out[:, 1::2] = occ[:, n_sites:]
    return out


def build_real_space_hamiltonian(params: ModelParams, basis: SectorBasis) -> SparseHermitianOperator:
    _check_basis(params, basis)
    if params.statistics is Statistics.BOSE:
        return _bose_hamiltonian(params, basis)
    return _fermi_hamiltonian(params, basis)


def _bose_hamiltonian(params, basis):
    occ = basis.occupations.astype(np.int64)
    diag = 0.5 * params.u * np.sum(occ * (occ - 1), axis=1)
    rows, cols, vals = [np.arange(basis.dim)], [np.arange(basis.dim)], [diag.astype(float)]
    for i, j in params.bonds():
        diag_v = params.v * occ[:, i] * occ[:, j]
        vals[0] = vals[0] + diag_v
        # a_i^+ a_j; its conjugate is implied by the Hermitian storage
        src = np.nonzero(occ[:, j] > 0)[0]
        new = occ[src].copy()
        amp = -params.kappa * np.sqrt(new[:, j] * (new[:, i] + 1.0))
        new[:, j] -= 1
        new[:, i] += 1
        dst = basis.lookup(new)
        rows.append(src)
        cols.append(dst)
        vals.append(amp)
    return SparseHermitianOperator.from_pairs(
        basis.dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def _fermi_hamiltonian(params, basis):
    n = params.n_sites
    occ = basis.occupations.astype(np.int64)
    modes = site_major(occ, n)
    diag = params.u * np.sum(occ[:, :n] * occ[:, n:], axis=1).astype(float)
    rows, cols, vals = [np.arange(basis.dim)], [np.arange(basis.dim)], [diag]
    for i, j in params.bonds():
        for spin in (0, 1):
            a, b = 2 * i + spin, 2 * j + spin
            # c_a^+ c_b: sign from occupied modes strictly between a and b
            src = np.nonzero((modes[:, b] == 1) & (modes[:, a] == 0))[0]
            if len(src) == 0:
                continue
            lo, hi = min(a, b), max(a, b)
            between = modes[src, lo + 1 : hi].sum(axis=1)
            sign = 1.0 - 2.0 * (between % 2)
            new = occ[src].copy()
            new[:, spin * n + j] = 0
            new[:, spin * n + i] = 1
            dst = basis.lookup(new)
            rows.append(src)
            cols.append(dst)
            vals.append(-params.kappa * sign)
    return SparseHermitianOperator.from_pairs(
        basis.dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def translation_operator(basis: SectorBasis) -> sp.csr_matrix:
    """One-site cyclic shift ``j -> j+1`` on the configurations of ``basis``.

    Fermionic rows carry the sign of reordering the shifted creation
    operators back to site-major order.
    """
    n = basis.n_sites
    occ = basis.occupations
    if basis.statistics is Statistics.BOSE:
        shifted = np.roll(occ, 1, axis=1)
        signs = np.ones(basis.dim)
    else:
        shifted = np.concatenate([np.roll(occ[:, :n], 1, axis=1), np.roll(occ[:, n:], 1, axis=1)], axis=1)
        modes = site_major(occ.astype(np.int64), n)
        signs = np.empty(basis.dim)
        for r, row in enumerate(modes):
            old = np.nonzero(row)[0]
            new = (old + 2) % (2 * n)
            inversions = sum(1 for x in range(len(new)) for y in range(x + 1, len(new)) if new[x] > new[y])
            signs[r] = -1.0 if inversions % 2 else 1.0
    dst = basis.lookup(shifted)
    return sp.csr_matrix((signs, (dst, np.arange(basis.dim))), shape=(basis.dim, basis.dim))


class KBlockMode(enum.Enum):
    PERIODIC_EXACT = "periodic-exact"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class KBlockMatrix:
    """Relative-coordinate matrix of two bosons at centre-of-mass momentum k."""

    k: float
    n0: int
    t_k: float
    boundary_t: float
    matrix: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    @property
    def off_diagonal(self) -> np.ndarray:
        return np.diag(self.matrix, 1).copy()


def build_k_block(params: ModelParams, k: float, n0: int, mode: KBlockMode = KBlockMode.TRUNCATED) -> KBlockMatrix:
    """Two-particle Hamiltonian in the sector of centre-of-mass momentum ``k``.

    Row ``r`` is the pair at relative distance ``r``. In PERIODIC_EXACT mode the
    chain must have ``2*n0 + 1`` sites and ``k`` must lie on its momentum grid;
    the last diagonal entry then carries the ring closure ``(-1)^n T^k``.
    TRUNCATED accepts any ``k`` and cuts the relative coordinate at ``n0``.
    """
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    t_k = -2.0 * params.kappa * math.cos(k / 2.0)
    boundary_t = 0.0
    if mode is KBlockMode.PERIODIC_EXACT:
        n_sites = 2 * n0 + 1
        if params.n_sites != n_sites:
            raise ValueError(f"periodic-exact block with n0={n0} needs n_sites={n_sites}")
        n = round(k * n_sites / (2 * math.pi))
        if abs(k - 2 * math.pi * n / n_sites) > 1e-9:
            raise ValueError(f"k={k} is not on the 2*pi*n/{n_sites} grid")
        boundary_t = (-1.0) ** n * t_k
    h = np.zeros((n0 + 1, n0 + 1))
    h[0, 0] = params.u
    h[1, 1] = params.v
    h[n0, n0] += boundary_t
    off = np.full(n0, t_k)
    off[0] = math.sqrt(2.0) * t_k
    h[np.arange(n0), np.arange(1, n0 + 1)] = off
    h[np.arange(1, n0 + 1), np.arange(n0)] = off
    h.setflags(write=False)
    return KBlockMatrix(k, n0, t_k, boundary_t, h)


def periodic_k_grid(n_sites: int) -> np.ndarray:
    """Momenta ``2 pi n / N`` folded into (-pi, pi], for odd ``N``."""
    if n_sites % 2 == 0:
        raise ValueError("the exact k-block is defined for odd chains only")
    n0 = n_sites // 2
    return 2 * np.pi * np.arange(-n0, n0 + 1) / n_sites
