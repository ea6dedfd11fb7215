import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from scatter_channels.errors import EmptyChannelError, ExtrapolationError
from scatter_channels.potential import make_rectangular, make_symmetric_composite
from scatter_channels.stationary import decompose, full_state
from scatter_channels.times import (
    DEFAULT_OMEGAS,
    TIMES_COLUMNS,
    channel_times,
    dwell_time,
    group_delay,
    interference_time,
    larmor_time,
    times_row,
    transmission_kink_time,
)

FREE = make_rectangular(0.0, 1.0, a=-0.5)


def test_free_region_times():
    assert dwell_time(FREE, 1.0) == pytest.approx(0.5, abs=1e-13)
    assert larmor_time(FREE, 1.0, "full").time == pytest.approx(0.5, abs=1e-10)
    assert group_delay(FREE, 1.0) == pytest.approx(0.5, abs=1e-8)


def test_free_region_has_no_reflection_channel():
    with pytest.raises(EmptyChannelError):
        dwell_time(FREE, 1.0, "ref")


def test_full_dwell_against_independent_quadrature(rect):
    psi = full_state(rect, 1.0)
    val, _ = quad(lambda x: abs(psi.evaluate(x)) ** 2, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    assert dwell_time(rect, 1.0) == pytest.approx(val / 2.0, rel=1e-12)


@pytest.mark.parametrize("E", [0.3, 1.0, 1.9, 2.5, 6.0])
def test_full_and_reflection_channel_clocks_read_dwell_times(rect, E):
    assert larmor_time(rect, E, "full").time == pytest.approx(dwell_time(rect, E), rel=1e-8)
    assert larmor_time(rect, E, "ref").time == pytest.approx(dwell_time(rect, E, "ref"), rel=1e-8)


@pytest.mark.parametrize("E", [0.3, 1.0, 2.5, 6.0])
def test_transmission_clock_misses_the_midpoint_kink(rect, E):
    # dwell_tr = larmor_tr + Re(C* dF - F* dC) / (2kT): the kink term is what
    # separates the transmission channel's dwell time from its clock reading
    lhs = dwell_time(rect, E, "tr")
    rhs = larmor_time(rect, E, "tr").time + transmission_kink_time(rect, E)
    assert lhs == pytest.approx(rhs, rel=1e-7)


@pytest.mark.parametrize("E", [0.3, 1.0, 2.5, 6.0])
def test_full_dwell_splits_with_interference_term(rect, E):
    dec = decompose(rect, E)
    parts = dec.T * dwell_time(rect, E, "tr") + dec.R * dwell_time(rect, E, "ref")
    assert dwell_time(rect, E) == pytest.approx(parts + interference_time(rect, E), abs=1e-12)


def test_hartman_saturation():
    taus = [group_delay(make_rectangular(2.0, d), 1.0) for d in (6, 8, 10)]
    assert abs(taus[2] - taus[1]) / taus[1] < 0.05
    assert abs(taus[1] - taus[0]) / taus[0] < 0.05


def test_group_delay_differs_from_dwell(rect):
    assert abs(group_delay(rect, 1.0) - dwell_time(rect, 1.0)) > 1e-3


def test_extrapolation_insensitive_to_omega_scale(rect):
    full = larmor_time(rect, 1.0, "ref", DEFAULT_OMEGAS).time
    half = larmor_time(rect, 1.0, "ref", [w / 2 for w in DEFAULT_OMEGAS]).time
    assert abs(full - half) / full < 1e-4


def test_extrapolation_failure_carries_table(rect):
    with pytest.raises(ExtrapolationError) as err:
        larmor_time(rect, 1.0, "ref", [0.1, 0.5, 1.0], tol=1e-14)
    assert err.value.table.shape == (3, 2)


def test_threshold_omega_rejected(rect):
    with pytest.raises(ValueError):
        larmor_time(rect, 2.0005, "tr", [1e-3, 2e-3, 5e-3])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 1.0), st.floats(-1.0, 5.0)), min_size=1, max_size=3),
       st.floats(0.1, 8.0), st.sampled_from(["full", "tr", "ref"]))
def test_dwell_times_nonnegative(half, E, channel):
    s = make_symmetric_composite(half)
    try:
        assert dwell_time(s, E, channel) >= 0
    except EmptyChannelError:
        pass


def test_times_row_columns_and_channel_times(rect):
    row = times_row(rect, 1.0)
    assert list(row) == list(TIMES_COLUMNS)
    ct = channel_times(rect, 1.0, "ref")
    assert ct.relative_gap < 1e-8
    assert ct.larmor_residual < 1e-6
