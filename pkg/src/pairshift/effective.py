"""Strong-coupling effective models for one bound pair plus one particle.

Each model lives on configurations ``(pair_site, particle_site[, spin])`` of an
open chain. The leading-order part (particle hopping, pair/particle swap and,
for the on-site Bose pair, the ``2V`` contact energy) reduces exactly to a
single particle on a chain with an embedded impurity: the :class:`ImpurityChain`.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, PairKind, SparseHermitianOperator, Statistics


@dataclass(frozen=True)
class ImpurityChain:
    """Single-particle chain: uniform leads around a finite device window.

    ``device_hoppings`` has ``len(device_potentials) + 1`` entries: the bond from
    the left lead into the device, the internal bonds, and the bond out to the
    right lead. An empty device is a uniform chain.
    """

    lead_hopping: float
    device_potentials: tuple[float, ...] = ()
    device_hoppings: tuple[float, ...] = ()
    shift_distance: int = 1

    def __post_init__(self):
        n = len(self.device_potentials)
        if n and len(self.device_hoppings) != n + 1:
            raise ValueError("device_hoppings must have len(device_potentials) + 1 entries")
        if not n and self.device_hoppings:
            raise ValueError("an empty device has no hoppings")

    @property
    def device_length(self) -> int:
        return len(self.device_potentials)

    @property
    def is_uniform(self) -> bool:
        return self.device_length == 0

    def finite_hamiltonian(self, n_left: int, n_right: int) -> np.ndarray:
        """Dense Hamiltonian with ``n_left`` / ``n_right`` lead sites kept."""
        n_dev = self.device_length
        size = n_left + n_dev + n_right
        h = np.zeros((size, size))
        bonds = np.full(size - 1, self.lead_hopping, dtype=float)
        if n_dev:
            h[np.arange(n_left, n_left + n_dev), np.arange(n_left, n_left + n_dev)] = self.device_potentials
            lo = n_left - 1
            for b, t in enumerate(self.device_hoppings):
                if 0 <= lo + b < size - 1:
                    bonds[lo + b] = t
        h[np.arange(size - 1), np.arange(1, size)] = bonds
        h[np.arange(1, size), np.arange(size - 1)] = bonds
        return h


class Side(enum.Enum):
    INCIDENT = "incident"
    SHIFTED = "shifted"
    PAIR_BROKEN = "pair-broken"


@dataclass(frozen=True)
class ChannelLabel:
    """Position of a configuration in the |l> chain of one scattering event.

    ``component`` is the pair site while the particle is still on the incident
    side; after the swap the pair sits at ``component - shift_distance``.
    """

    side: Side
    l: int | None = None
    component: int | None = None
    pair_site: int | None = None
    particle_site: int | None = None
    spin: int | None = None


BROKEN = ChannelLabel(Side.PAIR_BROKEN)


def label_pair_and_particle(kind: PairKind, pair_site: int, particle_site: int, spin=None) -> ChannelLabel:
    """Label a configuration already split into a pair and a lone particle."""
    if kind is PairKind.NN_BOSE:
        if particle_site <= pair_site - 2:
            comp = pair_site
            return ChannelLabel(Side.INCIDENT, particle_site - comp + 2, comp, pair_site, particle_site)
        if particle_site >= pair_site + 3:
            comp = pair_site + 2
            return ChannelLabel(Side.SHIFTED, particle_site - comp, comp, pair_site, particle_site)
        return BROKEN
    if particle_site < pair_site:
        comp = pair_site
        return ChannelLabel(Side.INCIDENT, particle_site - comp, comp, pair_site, particle_site, spin)
    if particle_site > pair_site:
        comp = pair_site + 1
        return ChannelLabel(Side.SHIFTED, particle_site - comp, comp, pair_site, particle_site, spin)
    return BROKEN


def map_configuration(kind: PairKind, configuration) -> ChannelLabel:
    """Channel label of one configuration of the full model.

    ``configuration`` lists the occupied sites: a multiset of three site indices
    for bosons (e.g. ``(-3, 0, 0)``), or three ``(site, spin)`` pairs for
    fermions with spin 0 = up, 1 = down. Sites may be negative. Anything that
    is not one intact pair plus one separate particle is PAIR_BROKEN, as are
    NN-pair configurations with the particle adjacent to the pair.
    """
    if kind is PairKind.FERMI_SINGLET:
        items = sorted((int(s), int(sp)) for s, sp in configuration)
        if len(items) != 3 or len(set(items)) != 3:
            return BROKEN
        sites = [s for s, _ in items]
        doubles = [s for s in set(sites) if sites.count(s) == 2]
        if len(doubles) != 1:
            return BROKEN
        (lone,) = [(s, sp) for s, sp in items if s != doubles[0]]
        return label_pair_and_particle(kind, doubles[0], lone[0], lone[1])
    sites = sorted(int(s) for s in configuration)
    if len(sites) != 3:
        return BROKEN
    if kind is PairKind.ONSITE_BOSE:
        counts = {s: sites.count(s) for s in sites}
        doubles = [s for s, c in counts.items() if c == 2]
        if len(doubles) != 1:
            return BROKEN
        lone = [s for s, c in counts.items() if c == 1][0]
        return label_pair_and_particle(kind, doubles[0], lone)
    if len(set(sites)) != 3:
        return BROKEN
    a, b, c = sites
    if b == a + 1 and c >= b + 2:
        return label_pair_and_particle(kind, a, c)
    if c == b + 1 and a <= b - 2:
        return label_pair_and_particle(kind, b, a)
    return BROKEN


def reduce_to_impurity_chain(params: ModelParams, kind: PairKind) -> ImpurityChain:
    """Leading-order single-particle chain of the pair/particle scattering problem."""
    kappa = params.kappa
    if kind is PairKind.ONSITE_BOSE:
        return ImpurityChain(
            lead_hopping=-kappa,
            device_potentials=(2 * params.v, 2 * params.v),
            device_hoppings=(-kappa, -2 * kappa, -kappa),
            shift_distance=1,
        )
    return ImpurityChain(lead_hopping=-kappa, shift_distance=kind.shift_distance)


@dataclass(frozen=True)
class EffectiveConfig:
    pair_site: int
    particle_site: int
    spin: int | None = None


@dataclass(eq=False)
class EffectiveSectorHamiltonian:
    kind: PairKind
    n_sites: int
    basis: list[EffectiveConfig]
    operator: SparseHermitianOperator
    constant_offset: float

    def __post_init__(self):
        self.index_of = {c: i for i, c in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def labels(self) -> list[ChannelLabel]:
        return [label_pair_and_particle(self.kind, c.pair_site, c.particle_site, c.spin) for c in self.basis]


def _excluded(kind: PairKind, pair_site: int) -> set[int]:
    if kind is PairKind.NN_BOSE:
        # pair footprint (i, i+1) plus the two neighbours that would form a trimer
        return {pair_site - 1, pair_site, pair_site + 1, pair_site + 2}
    return {pair_site}


def _effective_basis(kind: PairKind, n_sites: int) -> list[EffectiveConfig]:
    last_pair = n_sites - 2 if kind is PairKind.NN_BOSE else n_sites - 1
    spins = (0, 1) if kind is PairKind.FERMI_SINGLET else (None,)
    out = []
    for spin in spins:
        for b in range(last_pair + 1):
            excl = _excluded(kind, b)
            out.extend(EffectiveConfig(b, j, spin) for j in range(n_sites) if j not in excl)
    return out


def _regime_warning(params: ModelParams, kind: PairKind):
    k = abs(params.kappa)
    if kind is PairKind.NN_BOSE:
        ok = abs(params.v) >= 10 * k and abs(params.v - params.u) >= 10 * k
    else:
        ok = abs(params.u) >= 10 * k
    if not ok:
        warnings.warn(f"{kind.value} effective model used outside its strong-coupling regime", stacklevel=3)


def build_effective_sector_hamiltonian(
    params: ModelParams, kind: PairKind, n_sites: int | None = None, leading_order: bool = False
) -> EffectiveSectorHamiltonian:
    """Effective one-pair + one-particle Hamiltonian on an open chain.

    With ``leading_order=True`` only the particle hopping, the swap and the
    on-site pair's ``2V`` contact term are kept; the constant pair energy is
    always returned separately as ``constant_offset`` and is not part of
    ``operator``.
    """
    n_sites = params.n_sites if n_sites is None else n_sites
    if kind.statistics is not params.statistics:
        raise ValueError(f"{kind.value} needs {kind.statistics.value} statistics")
    min_sites = 5 if kind is PairKind.NN_BOSE else 2
    if n_sites < min_sites:
        raise ValueError(f"{kind.value} needs at least {min_sites} sites")
    _regime_warning(params, kind)

    kap, u, v = params.kappa, params.u, params.v
    basis = _effective_basis(kind, n_sites)
    index = {c: i for i, c in enumerate(basis)}
    rows, cols, vals = [], [], []

    def add(a, b, x):
        if x != 0.0:
            rows.append(a)
            cols.append(b)
            vals.append(x)

    if kind is PairKind.NN_BOSE:
        pair_hop = kap**2 / v + 2 * kap**2 / (v - u)
        contact = -2 * kap**2 / v
        offset = v + 2 * kap**2 / v + 4 * kap**2 / (v - u)
        swap = -kap
    else:
        pair_hop = 2 * kap**2 / u
        offset = u + 4 * kap**2 / u
        if kind is PairKind.ONSITE_BOSE:
            contact = 2 * v - 7 * kap**2 / (2 * u)
            swap = -2 * kap
        else:
            contact = -2 * kap**2 / u
            swap = -kap
    if leading_order:
        pair_hop = 0.0
        contact = 2 * v if kind is PairKind.ONSITE_BOSE else 0.0

    for i, c in enumerate(basis):
        b, j, s = c.pair_site, c.particle_site, c.spin
        # particle hopping to the right; the reverse is the Hermitian partner
        t = index.get(EffectiveConfig(b, j + 1, s))
        if t is not None:
            add(i, t, -kap)
        # pair hopping to the right
        t = index.get(EffectiveConfig(b + 1, j, s))
        if t is not None:
            add(i, t, pair_hop)
        # swap: particle passes the pair from the left, pair moves back
        if kind is PairKind.NN_BOSE:
            if j == b - 2:
                add(i, index[EffectiveConfig(b - 2, b + 1, s)], swap)
            contact_sites = (b - 2, b + 3)
        else:
            if j == b - 1:
                add(i, index[EffectiveConfig(b - 1, b, s)], swap)
            contact_sites = (b - 1, b + 1)
        if j in contact_sites:
            add(i, i, contact)

    op = SparseHermitianOperator.from_pairs(len(basis), rows, cols, np.asarray(vals, dtype=float))
    return EffectiveSectorHamiltonian(kind, n_sites, basis, op, offset)


def component_chain(eff: EffectiveSectorHamiltonian, component: int, spin=None) -> tuple[list[int], list[int]]:
    """Basis indices of one scattering component ordered by ``l``, and the l values."""
    pairs = []
    for i, lab in enumerate(eff.labels()):
        if lab.component == component and lab.spin == spin and lab.side is not Side.PAIR_BROKEN:
            pairs.append((lab.l, i))
    pairs.sort()
    return [i for _, i in pairs], [l for l, _ in pairs]
