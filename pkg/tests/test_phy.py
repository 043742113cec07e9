import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from srsim.phy import (DEFAULT_PHY, MCS_TABLE, FrameKind, NoLinkError, PhyMacConstants, Reception, data_rate_bps,
                       frame_duration_ns, frame_duration_us, reception_check, select_mcs)


def test_constants_defaults():
    p = PhyMacConstants()
    assert (p.sigma_leg_us, p.sigma_32_us, p.n_sc, p.n_ss) == (4, 16, 234, 1)
    assert (p.slot_us, p.sifs_us, p.difs_us, p.pifs_us) == (9, 16, 34, 25)
    assert (p.phy_leg_us, p.he_su_us, p.ack_us, p.back_us) == (20, 100, 28, 32)
    assert (p.legacy_symbol_bits, p.packet_bits, p.n_agg) == (24, 12000, 64)
    assert (p.rts_bits, p.cts_bits, p.service_bits, p.mac_header_bits) == (160, 112, 16, 320)
    assert (p.cw, p.ce_db) == (15, 10)


def test_mcs_ladder_monotone():
    rates = [data_rate_bps(m) for m in MCS_TABLE]
    sens = [m.min_sensitivity_dbm for m in MCS_TABLE]
    assert all(a < b for a, b in zip(rates, rates[1:]))
    assert all(a < b for a, b in zip(sens, sens[1:]))
    assert [m.index for m in MCS_TABLE] == list(range(12))


@pytest.mark.parametrize("rx, idx", [(-50, 11), (-62.43, 7), (-82, 0), (-52, 11), (-52.01, 10), (-64, 7)])
def test_select_mcs(rx, idx):
    assert select_mcs(rx).index == idx


def test_select_mcs_top_mode_is_1024qam_5_6():
    m = select_mcs(-50)
    assert m.bits_per_subcarrier == 10 and m.coding_rate == Fraction(5, 6)


def test_no_link():
    with pytest.raises(NoLinkError):
        select_mcs(-83)


def test_data_rates():
    assert 234 * 10 * Fraction(5, 6) / Fraction(16, 10 ** 6) == 121_875_000
    assert data_rate_bps(MCS_TABLE[11]) == pytest.approx(121.875e6)
    assert 234 * 1 * Fraction(1, 2) / Fraction(16, 10 ** 6) == 7_312_500
    assert data_rate_bps(MCS_TABLE[0]) == pytest.approx(7.3125e6)


def test_durations():
    # symbol counts by hand: 16 + 64*(320+12000) = 788496 bits over 1950 bits/symbol -> 405 symbols
    assert math.ceil(788496 / 1950) == 405
    assert frame_duration_us(FrameKind.DATA_AMPDU, 64, MCS_TABLE[11]) == 20 + 100 + 405 * 16 == 6600
    assert frame_duration_us(FrameKind.RTS) == 20 + math.ceil(176 / 24) * 4 == 52
    assert frame_duration_us(FrameKind.CTS) == 20 + math.ceil(128 / 24) * 4 == 44
    assert frame_duration_us(FrameKind.BACK) == 32
    assert frame_duration_ns(FrameKind.DATA_AMPDU, 64, MCS_TABLE[11]) == 6_600_000


def test_duration_n_agg_range():
    with pytest.raises(ValueError):
        frame_duration_us(FrameKind.DATA_AMPDU, 0, MCS_TABLE[0])
    with pytest.raises(ValueError):
        frame_duration_us(FrameKind.DATA_AMPDU, 65, MCS_TABLE[0])


def test_symbol_duration_configurable():
    fast = PhyMacConstants(sigma_32_us=14.4)
    assert data_rate_bps(MCS_TABLE[11], fast) == pytest.approx(135.4166e6, rel=1e-5)


@pytest.mark.parametrize("rx, sinr, expected", [
    (-62.4, 32.6, Reception.SUCCESS),
    (-60, 9.986, Reception.FAILURE_CAPTURE),
    (-83, 40.0, Reception.FAILURE_CCA),
    (-83, 0.0, Reception.FAILURE_CCA),
])
def test_reception_check(rx, sinr, expected):
    assert reception_check(rx, sinr, -82, 10) is expected


@given(st.integers(1, 63), st.sampled_from(MCS_TABLE))
def test_data_duration_monotone_in_n(n, mcs):
    assert frame_duration_us(FrameKind.DATA_AMPDU, n, mcs) <= frame_duration_us(FrameKind.DATA_AMPDU, n + 1, mcs)


@given(st.integers(1, 64), st.integers(0, 10))
def test_data_duration_non_increasing_in_rate(n, i):
    a, b = MCS_TABLE[i], MCS_TABLE[i + 1]
    assert frame_duration_us(FrameKind.DATA_AMPDU, n, b) <= frame_duration_us(FrameKind.DATA_AMPDU, n, a)


@given(st.floats(-120, 0), st.floats(-30, 60), st.floats(0, 20), st.floats(0, 20))
def test_reception_monotone(rx, sinr, d_rx, d_sinr):
    if reception_check(rx, sinr) is Reception.SUCCESS:
        assert reception_check(rx + d_rx, sinr + d_sinr) is Reception.SUCCESS


def test_ns_conversion():
    assert DEFAULT_PHY.ns("difs_us") == 34_000
    assert DEFAULT_PHY.ns("slot_us") == 9_000
