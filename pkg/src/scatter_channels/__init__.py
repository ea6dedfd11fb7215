"""Transmission and reflection channels of one-dimensional scattering.

Units: hbar = 1, m = 1/2, so E = k**2 and a unit plane wave carries
current 2k.
"""

from .potential import (
    PotentialSpec,
    make_rectangular,
    make_symmetric_composite,
    sample_symmetric_function,
)
from .stationary import (
    ChannelDecomposition,
    StationaryState,
    centered_amplitudes,
    clip_channels,
    decompose,
    full_state,
    odd_basis_solution,
    scattering_amplitudes,
    transfer_matrix,
)
from .packets import ChannelPackets, SpectralAmplitude, WavePacketField, chirped_spectrum, gaussian_spectrum
from .times import dwell_time, group_delay, larmor_time

__all__ = [
    "PotentialSpec",
    "make_rectangular",
    "make_symmetric_composite",
    "sample_symmetric_function",
    "ChannelDecomposition",
    "StationaryState",
    "centered_amplitudes",
    "clip_channels",
    "decompose",
    "full_state",
    "odd_basis_solution",
    "scattering_amplitudes",
    "transfer_matrix",
    "ChannelPackets",
    "SpectralAmplitude",
    "WavePacketField",
    "chirped_spectrum",
    "gaussian_spectrum",
    "dwell_time",
    "group_delay",
    "larmor_time",
]
