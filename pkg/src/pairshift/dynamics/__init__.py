"""Wavepacket scattering off a bound pair: states, propagation, channel readout."""

from .channels import CHANNEL_DEFINITION, ChannelClassifier, ScatteringObservables, analyze_channels
from .experiment import (
    Engine,
    ExperimentConfig,
    ExperimentResult,
    packet_averaged_transmission,
    run_experiment,
)
from .propagate import PropagationError, krylov_step, propagate
from .states import (
    DOWN,
    UP,
    BoundPairSpec,
    Preparation,
    WavepacketSpec,
    default_geometry,
    gaussian_packet,
    prepare_effective_state,
    prepare_scattering_state,
)

__all__ = [
    "CHANNEL_DEFINITION", "ChannelClassifier", "ScatteringObservables", "analyze_channels",
    "Engine", "ExperimentConfig", "ExperimentResult", "packet_averaged_transmission", "run_experiment",
    "PropagationError", "krylov_step", "propagate",
    "DOWN", "UP", "BoundPairSpec", "Preparation", "WavepacketSpec", "default_geometry",
    "gaussian_packet", "prepare_effective_state", "prepare_scattering_state",
]
