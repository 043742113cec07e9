import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from srsim.channel import (DEFAULT_CHANNEL, ChannelModelParams, dbm_to_mw, distance_for_path_loss,
                           link_gain_matrix, mw_to_dbm, path_loss_db, received_power_dbm, sinr_db)


def oracle_pl(d):
    # independent high-precision evaluation of the TMB expression
    mpmath.mp.dps = 30
    d = mpmath.mpf(d)
    return float(mpmath.mpf("54.120") + 10 * mpmath.mpf("2.06067") * mpmath.log10(d)
                 + mpmath.mpf("5.25") * mpmath.mpf("0.1467") * d)


@pytest.mark.parametrize("d, expected", [(1, 54.890), (10, 82.428), (100, 172.351)])
def test_path_loss_examples(d, expected):
    assert oracle_pl(d) == pytest.approx(expected, abs=1e-3)
    assert path_loss_db(d) == pytest.approx(expected, abs=1e-3)
    assert path_loss_db(d) == pytest.approx(oracle_pl(d), abs=1e-9)


def test_default_constants():
    p = DEFAULT_CHANNEL
    assert (p.L0, p.gamma, p.k, p.W_bar, p.noise_dbm, p.G_tx, p.G_rx) == (54.120, 2.06067, 5.25, 0.1467, -95, 0, 0)


def test_distance_clamped():
    assert path_loss_db(0.0) == path_loss_db(0.1)
    assert path_loss_db(-3.0) == path_loss_db(0.1)
    assert path_loss_db(0.05, ChannelModelParams(min_distance_m=0.01)) < path_loss_db(0.1)


def test_path_loss_vectorised():
    d = np.array([1.0, 10.0, 100.0])
    np.testing.assert_allclose(path_loss_db(d), [path_loss_db(x) for x in d])


@pytest.mark.parametrize("p, d, expected", [(20, 10, -62.428), (20, 1, -34.890)])
def test_received_power(p, d, expected):
    assert received_power_dbm(p, d) == pytest.approx(expected, abs=1e-3)


def test_received_power_zero_gain_identity():
    for p in (1.0, 7.5, 20.0):
        for d in (0.5, 3.0, 40.0):
            assert received_power_dbm(p, d) == p - path_loss_db(d)


def test_sinr_examples():
    # interference-free case reduces to SNR
    assert sinr_db(-62.428, [], -95) == pytest.approx(-62.428 + 95, abs=1e-9)
    assert sinr_db(-62.428, [], -95) == pytest.approx(32.568, abs=0.01)
    oracle = 10 * math.log10(10 ** -6 / (10 ** -9.5 + 10 ** -7))
    assert oracle == pytest.approx(9.986, abs=0.01)
    assert sinr_db(-60, [-70], -95) == pytest.approx(oracle, abs=1e-9)


def test_sinr_symmetry_case():
    assert sinr_db(-50, [-50], -math.inf) == pytest.approx(0.0, abs=1e-12)
    assert sinr_db(-50, [], -math.inf) == math.inf


def test_link_gain_matrix():
    pos = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 1.0]])
    g = link_gain_matrix(pos)
    assert np.all(np.isneginf(np.diag(g)))
    assert g[0, 1] == pytest.approx(-path_loss_db(10.0))
    assert g[0, 2] == pytest.approx(-path_loss_db(1.0))
    np.testing.assert_array_equal(g, g.T)


dist = st.floats(min_value=0.1, max_value=1e4, allow_nan=False)


@given(dist, dist)
def test_path_loss_strictly_increasing(a, b):
    if a < b:
        assert path_loss_db(a) < path_loss_db(b)


@given(st.floats(-120, 30), st.lists(st.floats(-120, 30), max_size=6), st.floats(-120, 30), st.floats(0.01, 20))
def test_sinr_monotone(signal, interferers, extra, bump):
    base = sinr_db(signal, interferers, -95)
    assert sinr_db(signal, interferers + [extra], -95) <= base
    if interferers:
        louder = [interferers[0] + bump] + interferers[1:]
        assert sinr_db(signal, louder, -95) <= base
    assert sinr_db(signal + bump, interferers, -95) > base


@given(st.floats(-120, 30))
def test_dbm_mw_round_trip(p):
    assert abs(mw_to_dbm(dbm_to_mw(p)) - p) < 1e-9


@given(st.floats(40, 200))
def test_distance_inverse(pl):
    d = distance_for_path_loss(pl)
    if pl > path_loss_db(0.1):
        assert path_loss_db(d) == pytest.approx(pl, abs=1e-9)
