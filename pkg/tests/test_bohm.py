import numpy as np
import pytest

from scatter_channels import bohm
from scatter_channels.errors import BracketError, IntegrationError, NodeProximityError
from scatter_channels.packets import ChannelPackets, gaussian_spectrum
from scatter_channels.potential import make_rectangular

FAST = dict(rtol=1e-6, atol=1e-6)


@pytest.fixture(scope="module")
def horizon(reference_packets):
    return bohm.find_horizon(reference_packets)


def test_free_packet_centre_moves_at_group_velocity(free_packets):
    assert bohm.velocity_field(free_packets, [-30.0], 0.0)[0] == pytest.approx(2.0, abs=1e-6)


def test_real_field_has_zero_velocity():
    x = np.linspace(0.1, 3, 20)
    v = bohm.guidance_velocity(np.cos(x) + 0j, -np.sin(x) + 0j)
    assert np.all(v == 0)


def test_node_floor(reference_packets):
    with pytest.raises(NodeProximityError):
        bohm.velocity_field(reference_packets, [400.0], 0.0)
    with pytest.raises(NodeProximityError):
        bohm.guidance_velocity(np.zeros(2, complex), np.ones(2, complex))


@pytest.mark.parametrize("x,t", [(-25.0, 10.0), (-10.0, 20.0), (-35.0, 25.0)])
def test_velocity_matches_probability_transport(reference_packets, x, t):
    v = bohm.velocity_field(reference_packets, [x], t)[0]
    oracle = bohm.transport_velocity(reference_packets, x, t, lo=-200.0)
    assert v == pytest.approx(oracle, rel=1e-3)


def test_free_trajectory_transmits(free_packets):
    rec = bohm.integrate_trajectory(free_packets, -35.0, t_end=40.0, **FAST)
    assert rec.classification == "transmitted"
    assert rec.stats["final_velocity"] == pytest.approx(2.0, rel=0.05)
    assert np.all(np.diff(rec.t) > 0)


def test_front_transmits_and_rear_reflects(reference_packets, horizon):
    s = reference_packets.spectrum
    front, rear = bohm.integrate_ensemble(
        reference_packets, [s.x0 + 2 * s.sigma_x, s.x0 - 2 * s.sigma_x], t_end=horizon, **FAST
    )
    assert front.classification == "transmitted"
    assert rear.classification == "reflected"


def test_small_ensemble_never_crosses(reference_packets, horizon):
    xs = bohm.density_quantiles(reference_packets, 12)
    recs = bohm.integrate_ensemble(reference_packets, xs, t_end=horizon, **FAST)
    assert bohm.no_crossing_gap(recs) > 0
    fates = [r.transmitted for r in recs]
    # monotone: once transmitted, every later starting point transmits
    assert fates == sorted(fates)


def test_density_quantiles_split_probability_evenly(reference_packets):
    xs = bohm.density_quantiles(reference_packets, 8)
    dist = bohm.InitialDistribution(reference_packets)
    tails = np.array([dist.tail(x) for x in xs])
    assert np.allclose(tails, 1 - (np.arange(8) + 0.5) / 8, atol=1e-9)


def test_quantile_prediction_matches_transmission(reference_packets):
    x = bohm.quantile_prediction(reference_packets)
    assert bohm.tail_mass(reference_packets, x) == pytest.approx(reference_packets.T_avg, abs=1e-10)


def test_bracket_errors(reference_packets, horizon):
    with pytest.raises(BracketError):
        bohm.find_critical_point(reference_packets, bracket=(-15.0, -10.0), t_end=horizon, **FAST)


def test_persistent_node_gives_integration_error(reference_packets, monkeypatch):
    real = bohm.velocity_field

    def sticky(packets, x, t, floor=bohm.NODE_FLOOR):
        if t > 1.0:
            raise NodeProximityError("stuck")
        return real(packets, x, t, floor)

    monkeypatch.setattr(bohm, "velocity_field", sticky)
    monkeypatch.setattr(bohm, "MAX_HALVINGS", 5)
    with pytest.raises(IntegrationError) as err:
        bohm.integrate_ensemble(reference_packets, [-30.0], t_end=5.0, **FAST)
    partial = err.value.partial
    assert partial and partial[0].t[-1] <= 1.0 + 1e-12


def test_equal_transmission_partner_matches_average(rect):
    spectrum = gaussian_spectrum(1.0, 0.05, 256, x0=-30.0)
    partner = bohm.equal_transmission_partner(rect, spectrum, 1.0, 0.25, 0.5)
    assert partner.is_symmetric and partner.x_c == rect.x_c
    T1 = ChannelPackets(rect, spectrum).T_avg
    T2 = ChannelPackets(partner, spectrum).T_avg
    assert T1 == pytest.approx(T2, abs=1e-12)


def test_horizon_leaves_little_mass_at_barrier(reference_packets, horizon):
    assert bohm.barrier_mass(reference_packets, horizon, 2.0) < bohm.HORIZON_MASS


@pytest.mark.slow
def test_transparent_case_critical_point_far_behind(rect):
    k0 = np.sqrt(2 + 9 * np.pi**2)  # above-barrier resonance
    p = ChannelPackets(make_rectangular(2.0, 1.0), gaussian_spectrum(k0, 0.05, 512, x0=-30.0))
    cp = bohm.find_critical_point(p, **FAST)
    assert cp.x_star < p.spectrum.x0 - 4 * p.spectrum.sigma_x
