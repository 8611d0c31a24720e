"""End-to-end scattering experiment: prepare, propagate, read out channels."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..effective import build_effective_sector_hamiltonian, reduce_to_impurity_chain
from ..model import (
    ModelParams,
    PairKind,
    Statistics,
    build_real_space_hamiltonian,
    enumerate_basis,
)
from ..transport import analytic_T12
from .channels import CHANNEL_DEFINITION, ChannelClassifier, ScatteringObservables
from .propagate import propagate
from .states import (
    UP,
    BoundPairSpec,
    WavepacketSpec,
    check_geometry,
    gaussian_packet,
    prepare_effective_state,
    prepare_scattering_state,
    three_particle_sector,
)


class Engine(enum.Enum):
    FULL = "full"
    EFFECTIVE = "effective"
    IMPURITY = "impurity"


SERIES_COLUMNS = (
    "time", "p_incident", "p_reflected", "p_shifted", "p_pair_broken", "norm", "energy", "shift_estimate",
)


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    wavepacket: WavepacketSpec
    bound_pair: BoundPairSpec
    engine: Engine = Engine.FULL
    incident_spin: int = UP
    dt: float = 0.05
    tol: float = 1e-9
    stop_sigmas: float = 2.5
    record_every: int = 10
    edge_tolerance: float = 1e-6
    t_total: float | None = None

    def __post_init__(self):
        if self.bound_pair.kind.statistics is not self.params.statistics:
            raise ValueError(f"{self.bound_pair.kind.value} needs {self.bound_pair.kind.statistics.value} statistics")
        if self.params.boundary.value != "open":
            raise ValueError("scattering runs use open chains")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.incident_spin not in (0, 1):
            raise ValueError("incident_spin must be 0 (up) or 1 (down)")
        check_geometry(self.params.n_sites, self.wavepacket, self.bound_pair)

    @property
    def group_velocity(self) -> float:
        return 2.0 * abs(self.params.kappa) * abs(math.sin(self.wavepacket.k0))

    @property
    def arrival_time(self) -> float:
        return (self.bound_pair.position - self.wavepacket.center) / self.group_velocity

    @property
    def stop_time(self) -> float:
        """Free-flight time for the packet centre to pass the pair by ``stop_sigmas`` widths.

        Returned in absolute time; ``dt`` and ``t_total`` are given in units of 1/|kappa|.
        """
        if self.t_total is not None:
            return self.t_total / abs(self.params.kappa)
        wp, v = self.wavepacket, self.group_velocity
        t = (self.bound_pair.position - wp.center + self.stop_sigmas * wp.sigma) / v
        return min(t, 4.0 * self.params.n_sites / v)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    series: list[ScatteringObservables]
    summary: dict
    final_state: np.ndarray = field(repr=False, default=None)

    @property
    def final(self) -> ScatteringObservables:
        return self.series[-1]

    @property
    def valid(self) -> bool:
        return bool(self.summary["valid"])

    def write_series_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SERIES_COLUMNS)
            for obs in self.series:
                writer.writerow([format_float(getattr(obs, c)) for c in SERIES_COLUMNS])

    def write_summary_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(summary_json(self.summary))


def format_float(x: float) -> str:
    return f"{x:.15g}"


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True, allow_nan=True) + "\n"


def impurity_chain_size(kind: PairKind, n_sites: int) -> int:
    return n_sites - 2 if kind is PairKind.NN_BOSE else n_sites


def impurity_chain_hamiltonian(params: ModelParams, kind: PairKind, position: int) -> np.ndarray:
    """Single-particle chain equivalent to one pair at ``position`` on ``params.n_sites`` sites.

    Chain index equals the particle site while the particle is on the source
    side; for the on-site pair the impurity sits on indices ``position - 1`` and
    ``position``.
    """
    chain = reduce_to_impurity_chain(params, kind)
    size = impurity_chain_size(kind, params.n_sites)
    if chain.is_uniform:
        return chain.finite_hamiltonian(size, 0)
    return chain.finite_hamiltonian(position - 1, size - position - 1)


def packet_momentum_weights(packet: np.ndarray, n_k: int = 4096):
    k = -math.pi + 2 * math.pi * (np.arange(n_k) + 1) / n_k
    j = np.arange(len(packet))
    amp = np.exp(-1j * np.outer(k, j)) @ packet
    w = np.abs(amp) ** 2
    return k, w / w.sum()


def packet_averaged_transmission(kind: PairKind, kappa: float, v: float, packet: np.ndarray) -> float:
    """Transmission of the impurity chain averaged over the packet's momentum distribution."""
    k, w = packet_momentum_weights(packet)
    right = (k > 0) & (k < math.pi)
    if kind is PairKind.ONSITE_BOSE:
        t = np.array([analytic_T12(kappa, v, kk) for kk in k[right]])
    else:
        t = np.ones(right.sum())
    return float(np.sum(w[right] * t))


def _setup(config: ExperimentConfig):
    params, wp, bp = config.params, config.wavepacket, config.bound_pair
    kind, n = bp.kind, params.n_sites
    if config.engine is Engine.FULL:
        basis = enumerate_basis(params, three_particle_sector(kind, config.incident_spin))
        h = build_real_space_hamiltonian(params, basis)
        psi = prepare_scattering_state(basis, params, wp, bp, config.incident_spin)
        classifier = ChannelClassifier.for_basis(basis, bp)
        occ = basis.occupations.astype(float)
        if params.statistics is Statistics.FERMI_SPIN_HALF:
            occ = occ[:, :n] + occ[:, n:]
        edge = occ[:, 0] + occ[:, -1]
        return h, psi, classifier, edge, 0.0
    if config.engine is Engine.EFFECTIVE:
        eff = build_effective_sector_hamiltonian(params, kind)
        psi = prepare_effective_state(eff, wp, bp, config.incident_spin)
        classifier = ChannelClassifier.for_effective(eff, bp)
        last_pair_site = 1 if kind is PairKind.NN_BOSE else 0
        edge = np.array(
            [
                (c.particle_site in (0, n - 1)) + (c.pair_site == 0) + (c.pair_site + last_pair_site == n - 1)
                for c in eff.basis
            ],
            dtype=float,
        )
        return eff.operator, psi, classifier, edge, eff.constant_offset
    h = impurity_chain_hamiltonian(params, kind, bp.position)
    size = h.shape[0]
    psi = gaussian_packet(size, wp, bp.position - bp.gap).astype(complex)
    classifier = ChannelClassifier.for_chain(size, bp)
    edge = np.zeros(size)
    edge[[0, -1]] = 1.0
    return h, psi, classifier, edge, 0.0


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Propagate one scattering event and collect channel probabilities.

    The run stops when the free-flight packet centre has passed the pair by
    ``stop_sigmas`` widths. ``edge_occupancy`` is the largest particle number
    seen on the two end sites during the run; above ``edge_tolerance`` the run
    is flagged invalid (results are still returned).
    """
    params, wp, bp = config.params, config.wavepacket, config.bound_pair
    h, psi0, classifier, edge, offset = _setup(config)
    matvec = h.__matmul__ if isinstance(h, np.ndarray) else h.to_csr().__matmul__

    def energy_of(psi):
        return float(np.vdot(psi, matvec(psi)).real) + offset

    kappa = abs(params.kappa)
    dt = config.dt / kappa
    t_arrive = config.arrival_time
    t_stop = config.stop_time
    n_steps = math.ceil(t_stop / dt - 1e-9)

    series = []
    shifted_trace = []
    edge_max = 0.0
    e0 = energy_of(psi0)
    norm_drift = energy_drift = 0.0
    psi = psi0
    for step, (t, psi) in enumerate(propagate(h, psi0, dt, t_stop, config.tol)):
        prob = np.abs(psi) ** 2
        edge_max = max(edge_max, float(prob @ edge))
        record = step % config.record_every == 0 or step == n_steps
        energy = energy_of(psi) if record else float("nan")
        obs = classifier.analyze(psi, after_arrival=t >= t_arrive, time=t * kappa, energy=energy)
        shifted_trace.append((t, obs.p_shifted))
        norm_drift = max(norm_drift, abs(obs.norm - 1.0))
        if record:
            energy_drift = max(energy_drift, abs(energy - e0))
            series.append(obs)

    final = series[-1]
    # change of p_shifted over the last packet-width of flight: a plateau check
    t_back = t_stop - wp.sigma / config.group_velocity
    earlier = min(shifted_trace, key=lambda x: abs(x[0] - t_back))[1]
    packet = gaussian_packet(impurity_chain_size(bp.kind, params.n_sites), wp, bp.position - bp.gap)
    if bp.kind is PairKind.ONSITE_BOSE:
        plane_wave_t = analytic_T12(params.kappa, params.v, abs(wp.k0))
    else:
        plane_wave_t = 1.0
    summary = {
        "kind": bp.kind.value,
        "engine": config.engine.value,
        "kappa": params.kappa,
        "u": params.u,
        "v": params.v,
        "n_sites": params.n_sites,
        "k0": wp.k0,
        "sigma": wp.sigma,
        "center": wp.center,
        "pair_position": bp.position,
        "preparation": bp.preparation.value,
        "incident_spin": "up" if config.incident_spin == UP else "down",
        "dimension": int(psi0.shape[0]),
        "t_final": final.time,
        "arrival_time": t_arrive * kappa,
        "p_incident": final.p_incident,
        "p_reflected": final.p_reflected,
        "p_shifted": final.p_shifted,
        "p_pair_broken": final.p_pair_broken,
        "shift_estimate": final.shift_estimate,
        "expected_shift_distance": bp.kind.shift_distance,
        "analytic_T12_at_k0": plane_wave_t,
        "packet_averaged_T": packet_averaged_transmission(bp.kind, params.kappa, params.v, packet),
        "norm_drift": norm_drift,
        "energy_drift": energy_drift,
        "edge_occupancy": edge_max,
        "edge_tolerance": config.edge_tolerance,
        "plateau_drift": abs(final.p_shifted - earlier),
        "valid": edge_max <= config.edge_tolerance,
        "channel_definition": CHANNEL_DEFINITION,
    }
    return ExperimentResult(config, series, summary, psi)
