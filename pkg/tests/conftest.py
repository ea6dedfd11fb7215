import numpy as np
import pytest

from scatter_channels.packets import ChannelPackets, gaussian_spectrum
from scatter_channels.potential import (
    PotentialSpec,
    make_rectangular,
    make_symmetric_composite,
    sample_symmetric_function,
)


def closed_form_T(V0, d, E):
    """Rectangular barrier transmission, below or above the top."""
    if E < V0:
        kappa = np.sqrt(V0 - E)
        return 1.0 / (1.0 + V0**2 * np.sinh(kappa * d) ** 2 / (4 * E * (V0 - E)))
    q = np.sqrt(E - V0)
    return 1.0 / (1.0 + V0**2 * np.sin(q * d) ** 2 / (4 * E * (E - V0)))


def barrier_family():
    """Five symmetric shapes used by the grid-wide checks."""
    return {
        "rectangular": make_rectangular(2.0, 1.0),
        "two_step": make_symmetric_composite([(0.3, 1.0), (0.4, 3.0)], a=-1.0),
        "double": PotentialSpec(0.5, ((0.4, 3.0), (1.2, 0.0), (0.4, 3.0))),
        "gaussian_bump": sample_symmetric_function(lambda x: 2.5 * np.exp(-(x**2) / 0.5), 3.0, 24, a=-1.5),
        "well_in_barrier": make_symmetric_composite([(0.5, 1.5), (0.25, -1.0)], a=2.0),
    }


@pytest.fixture(scope="session")
def rect():
    return make_rectangular(2.0, 1.0)


@pytest.fixture(scope="session")
def reference_packets(rect):
    return ChannelPackets(rect, gaussian_spectrum(1.0, 0.05, 512, x0=-30.0))


@pytest.fixture(scope="session")
def free_packets():
    return ChannelPackets(make_rectangular(0.0, 1.0, a=-0.5), gaussian_spectrum(1.0, 0.05, 512, x0=-30.0))
