"""Initial states: a Gaussian single-particle packet aimed at a bound pair."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..effective import EffectiveSectorHamiltonian, EffectiveConfig
from ..model import (
    ModelParams,
    PairKind,
    Sector,
    SectorBasis,
    Statistics,
    build_real_space_hamiltonian,
    enumerate_basis,
    site_major,
)

UP, DOWN = 0, 1


class Preparation(enum.Enum):
    BARE = "bare"
    DRESSED = "dressed"


@dataclass(frozen=True)
class WavepacketSpec:
    k0: float
    sigma: float
    center: int

    def __post_init__(self):
        if self.sigma < 2:
            raise ValueError(f"sigma must be >= 2 sites, got {self.sigma}")
        if not 0 < abs(self.k0) < math.pi:
            raise ValueError(f"|k0| must lie in (0, pi), got {self.k0}")

    @property
    def group_velocity(self) -> float:
        """Group velocity in units of kappa (sites per 1/kappa)."""
        return 2.0 * math.sin(self.k0)


@dataclass(frozen=True)
class BoundPairSpec:
    kind: PairKind
    position: int
    preparation: Preparation = Preparation.BARE

    @property
    def gap(self) -> int:
        """Closest allowed particle site is ``position - gap``."""
        return 2 if self.kind is PairKind.NN_BOSE else 1

    @property
    def footprint(self) -> tuple[int, ...]:
        if self.kind is PairKind.NN_BOSE:
            return (self.position, self.position + 1)
        return (self.position,)


MIN_SEPARATION_SIGMAS = 2.0


def default_geometry(sigma: float) -> tuple[int, int]:
    """Launch site and pair site used when a config leaves them out."""
    center = round(1.5 * sigma)
    return center, center + round(2.75 * sigma)


def check_geometry(n_sites: int, wp: WavepacketSpec, bp: BoundPairSpec):
    last = bp.footprint[-1]
    if not 0 <= wp.center < n_sites:
        raise ValueError(f"packet center {wp.center} outside the chain")
    if bp.position - bp.gap < 0 or last >= n_sites - 1:
        raise ValueError(f"bound pair at {bp.position} does not fit in {n_sites} sites")
    if bp.position - wp.center < MIN_SEPARATION_SIGMAS * wp.sigma:
        raise ValueError(
            f"packet center {wp.center} overlaps the pair at {bp.position}: "
            f"need a separation of at least {MIN_SEPARATION_SIGMAS} sigma"
        )


def gaussian_packet(n_sites: int, wp: WavepacketSpec, last_site: int) -> np.ndarray:
    """Unit-norm ``exp(i k0 j - (j - center)^2 / (4 sigma^2))`` on sites ``0..last_site``."""
    j = np.arange(n_sites)
    amp = np.exp(1j * wp.k0 * j - (j - wp.center) ** 2 / (4.0 * wp.sigma**2))
    amp[j > last_site] = 0.0
    return amp / np.linalg.norm(amp)


def pair_state(params: ModelParams, bp: BoundPairSpec):
    """Two-particle pair state (bare, or projected onto the bound branch)."""
    stats = bp.kind.statistics
    sector = Sector.fermi(1, 1) if stats is Statistics.FERMI_SPIN_HALF else Sector.bose(2)
    basis = enumerate_basis(params, sector)
    n = params.n_sites
    bare = np.zeros(n if stats is Statistics.BOSE else 2 * n, dtype=np.int8)
    if bp.kind is PairKind.ONSITE_BOSE:
        bare[bp.position] = 2
    elif bp.kind is PairKind.NN_BOSE:
        bare[[bp.position, bp.position + 1]] = 1
    else:
        bare[[bp.position, n + bp.position]] = 1
    vec = np.zeros(basis.dim)
    vec[basis.index(bare)] = 1.0
    if bp.preparation is Preparation.DRESSED:
        vec = _dress(params, basis, bp.kind, vec)
    return basis, vec


def _pair_mask(basis: SectorBasis, kind: PairKind) -> np.ndarray:
    occ = basis.occupations
    n = basis.n_sites
    if kind is PairKind.ONSITE_BOSE:
        return np.any(occ == 2, axis=1)
    if kind is PairKind.NN_BOSE:
        return np.any((occ[:, :-1] == 1) & (occ[:, 1:] == 1), axis=1)
    return np.any((occ[:, :n] == 1) & (occ[:, n:] == 1), axis=1)


def _dress(params, basis, kind, bare):
    h = build_real_space_hamiltonian(params, basis).to_csr().toarray()
    w, v = np.linalg.eigh(h)
    mask = _pair_mask(basis, kind)
    bound = np.sum(v[mask] ** 2, axis=0) >= 0.5
    if not np.any(bound):
        raise ValueError(f"no bound {kind.value} states at these couplings")
    vb = v[:, bound]
    out = vb @ (vb.T @ bare)
    return out / np.linalg.norm(out)


def add_particle(
    basis3: SectorBasis, basis2: SectorBasis, pair: np.ndarray, packet: np.ndarray, spin: int = UP
) -> np.ndarray:
    """``sum_j packet_j a_j^+ |pair>`` (or ``c_{j,spin}^+``) in ``basis3``, normalised."""
    n = basis3.n_sites
    psi = np.zeros(basis3.dim, dtype=complex)
    keep = np.nonzero(np.abs(pair) > 1e-14)[0]
    occ2 = basis2.occupations[keep].astype(np.int64)
    amp2 = pair[keep]
    fermi = basis3.statistics is Statistics.FERMI_SPIN_HALF
    if fermi:
        modes = site_major(occ2, n)
    for j in np.nonzero(packet)[0]:
        new = occ2.copy()
        if fermi:
            col = spin * n + j
            ok = new[:, col] == 0
            sign = 1.0 - 2.0 * (modes[:, : 2 * j + spin].sum(axis=1) % 2)
            factor = np.where(ok, sign, 0.0)
            new[:, col] = 1
        else:
            factor = np.sqrt(new[:, j] + 1.0)
            new[:, j] += 1
        idx = basis3.lookup(new[factor != 0])
        np.add.at(psi, idx, packet[j] * amp2[factor != 0] * factor[factor != 0])
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("packet and pair leave no allowed configuration")
    return psi / norm


def three_particle_sector(kind: PairKind, spin: int = UP) -> Sector:
    if kind is PairKind.FERMI_SINGLET:
        return Sector.fermi(2, 1) if spin == UP else Sector.fermi(1, 2)
    return Sector.bose(3)


def prepare_scattering_state(
    basis: SectorBasis, params: ModelParams, wp: WavepacketSpec, bp: BoundPairSpec, spin: int = UP
) -> np.ndarray:
    """Packet on the lone particle times the pair, in the full three-particle basis."""
    if basis.statistics is not bp.kind.statistics:
        raise ValueError("basis statistics do not match the pair kind")
    if basis.sector != three_particle_sector(bp.kind, spin):
        raise ValueError(f"basis sector {basis.sector} is not the one-pair + one-particle sector")
    check_geometry(basis.n_sites, wp, bp)
    basis2, pair = pair_state(params, bp)
    packet = gaussian_packet(basis.n_sites, wp, bp.position - bp.gap)
    return add_particle(basis, basis2, pair, packet, spin)


def prepare_effective_state(eff: EffectiveSectorHamiltonian, wp: WavepacketSpec, bp: BoundPairSpec, spin=UP):
    check_geometry(eff.n_sites, wp, bp)
    packet = gaussian_packet(eff.n_sites, wp, bp.position - bp.gap)
    s = spin if eff.kind is PairKind.FERMI_SINGLET else None
    psi = np.zeros(eff.dim, dtype=complex)
    for j in np.nonzero(packet)[0]:
        psi[eff.index_of[EffectiveConfig(bp.position, int(j), s)]] = packet[j]
    return psi
