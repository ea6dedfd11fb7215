import numpy as np
import pytest

from scatter_channels.errors import DomainTooSmallError, SpectrumDomainError, StaleCacheError
from scatter_channels.gridevolve import free_gaussian
from scatter_channels.packets import ChannelPackets, chirped_spectrum, gaussian_spectrum

DOMAIN = (-300.0, 300.0)


def test_spectrum_normalized():
    s = gaussian_spectrum(1.0, 0.05, 256, cutoff=5.0)
    assert abs(s.norm() - 1) < 1e-10
    assert np.all(s.k > 0) and np.all(np.diff(s.k) > 0)
    assert s.sigma_x == pytest.approx(10.0)


def test_spectrum_domain_errors():
    with pytest.raises(SpectrumDomainError):
        gaussian_spectrum(0.2, 0.05, cutoff=5.0)
    with pytest.raises(SpectrumDomainError):
        gaussian_spectrum(1.0, 0.05, n_k=32)


def test_free_packet_matches_closed_form(free_packets):
    x = np.linspace(-120, 120, 801)
    for t in (0.0, 20.0, 45.0):
        psi = free_packets.field("full", x, t)[0]
        # the hard spectral cutoff at 8 sigma_k leaves ~1e-9 ringing in the far tails
        assert np.max(np.abs(psi - free_gaussian(x, t, 1.0, 10.0, -30.0))) < 1e-8


def test_initial_mean_position(free_packets):
    x, w = free_packets.quadrature_grid((-200, 200))
    rho = np.abs(free_packets.field("full", x, 0.0)[0]) ** 2
    assert abs(np.sum(w * x * rho) + 30.0) < 10.0
    assert abs(np.sum(w * x * rho) + 30.0) < 1e-8


def test_channels_add_up(reference_packets):
    x = np.linspace(-80, 80, 1601)
    for t in (0.0, 15.0, 40.0):
        full = reference_packets.field("full", x, t)[0]
        tr = reference_packets.field("tr", x, t)[0]
        ref = reference_packets.field("ref", x, t)[0]
        assert np.max(np.abs(full - tr - ref)) < 1e-12


def test_free_channel_norms_and_overlap(free_packets):
    for t in (0.0, 15.0, 30.0):
        assert abs(free_packets.channel_norm("tr", t, DOMAIN) - 1) < 1e-10
        assert abs(free_packets.channel_overlap(t, DOMAIN)) < 1e-15


def test_late_transmitted_norm_is_packet_transmission(reference_packets):
    p = reference_packets
    T = p.T_avg
    right = p.channel_norm("full", 70.0, DOMAIN, region=(p.spec.x_c, DOMAIN[1]))
    assert abs(right - T) < 1e-8
    assert abs(p.channel_norm("tr", 70.0, DOMAIN) - T) < 1e-8
    assert abs(T + p.R_avg - 1) < 1e-12


def test_reflection_norm_constant_and_full_norm_one(reference_packets):
    rows = reference_packets.series(np.linspace(0, 60, 13), DOMAIN)
    ref = np.array([r["norm_ref"] for r in rows])
    full = np.array([r["norm_full"] for r in rows])
    assert np.std(ref) / np.mean(ref) < 1e-10
    assert np.max(np.abs(full - 1)) < 1e-10


def test_norm_bookkeeping_through_overlap(reference_packets):
    # N_full = N_tr + N_ref + 2 Re<tr|ref> holds at every t, whatever the channel norms do
    for r in reference_packets.series([0.0, 12.0, 17.0, 25.0], DOMAIN):
        lhs = r["norm_full"]
        rhs = r["norm_tr"] + r["norm_ref"] + 2 * r["overlap"].real
        assert abs(lhs - rhs) < 1e-12


def test_tr_norm_rate_equals_midpoint_current_jump(reference_packets):
    p, t, h = reference_packets, 16.0, 1e-3
    up, down = p.series([t + h, t - h], DOMAIN)
    rate = (up["norm_tr"] - down["norm_tr"]) / (2 * h)
    assert rate == pytest.approx(p.kink_flux(t), rel=1e-5, abs=1e-12)


def test_channel_localization_after_separation(reference_packets):
    p = reference_packets
    t = 70.0
    ref_total = p.channel_norm("ref", t, DOMAIN)
    ref_left = p.channel_norm("ref", t, DOMAIN, region=(DOMAIN[0], p.spec.x_c))
    assert ref_left >= (1 - 1e-4) * ref_total
    tr_total = p.channel_norm("tr", t, DOMAIN)
    tr_right = p.channel_norm("tr", t, DOMAIN, region=(p.spec.b, DOMAIN[1]))
    assert tr_right >= (1 - 1e-4) * tr_total


def test_overlap_decays_after_separation(reference_packets):
    p = reference_packets
    at_barrier = abs(p.channel_overlap(15.0, DOMAIN))
    late = abs(p.channel_overlap(70.0, DOMAIN))
    assert late < at_barrier
    assert late < 1e-4 * np.sqrt(p.T_avg * p.R_avg)
    assert p.quadrature_error(70.0, DOMAIN) < 1e-10


def test_fields_continuous_at_midpoint(reference_packets):
    x = np.linspace(-5, 6, 2201)
    for ch in ("full", "tr", "ref"):
        f = reference_packets.synthesize(ch, x, 15.0)
        assert f.is_continuous(k_max=reference_packets.spectrum.k.max() + 2)


def test_stale_cache_and_domain_errors(rect):
    spec = gaussian_spectrum(1.0, 0.05, 128, x0=-30.0)
    p = ChannelPackets(rect, spec, precompute=False)
    with pytest.raises(StaleCacheError):
        p.field("full", np.zeros(3), 0.0)
    p.precompute()
    p.spectrum = gaussian_spectrum(1.1, 0.05, 128, x0=-30.0)
    with pytest.raises(StaleCacheError):
        p.T_avg
    p.precompute()
    with pytest.raises(DomainTooSmallError):
        p.channel_norm("full", 0.0, (-50.0, 50.0))


def test_unknown_channel(reference_packets):
    with pytest.raises(ValueError):
        reference_packets.field("both", np.zeros(2), 0.0)


def test_chirped_spectrum_overlap_is_recorded(rect):
    p = ChannelPackets(rect, chirped_spectrum(1.0, 0.05, 40.0, 256, x0=-30.0))
    ov = p.channel_overlap(20.0, DOMAIN)
    assert np.isfinite(ov.real) and np.isfinite(ov.imag)
    assert abs(p.spectrum.norm() - 1) < 1e-12
