"""Indoor propagation (TMB 5 GHz model) and interference arithmetic.

Powers cross module boundaries in dBm; sums of interference are done in mW.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_DISTANCE_M = 0.1


@dataclass(frozen=True)
class ChannelModelParams:
    L0: float = 54.120          # path-loss intercept (dB)
    gamma: float = 2.06067      # path-loss exponent
    k: float = 5.25             # attenuation per wall (dB)
    W_bar: float = 0.1467       # average walls per metre
    noise_dbm: float = -95.0
    G_tx: float = 0.0
    G_rx: float = 0.0
    min_distance_m: float = MIN_DISTANCE_M


DEFAULT_CHANNEL = ChannelModelParams()


def dbm_to_mw(p_dbm):
    if np.ndim(p_dbm):
        return np.power(10.0, np.asarray(p_dbm, dtype=float) / 10.0)
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw):
    if np.ndim(p_mw):
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(np.asarray(p_mw, dtype=float))
    return 10.0 * math.log10(p_mw) if p_mw > 0 else -math.inf


def path_loss_db(d_m, params: ChannelModelParams = DEFAULT_CHANNEL):
    """L0 + 10*gamma*log10(d) + k*W_bar*d, with d clamped below at ``min_distance_m``.

    Accepts scalars or arrays.
    """
    d = np.maximum(np.asarray(d_m, dtype=float), params.min_distance_m)
    pl = params.L0 + 10.0 * params.gamma * np.log10(d) + params.k * params.W_bar * d
    return float(pl) if pl.ndim == 0 else pl


def received_power_dbm(tx_power_dbm, d_m, params: ChannelModelParams = DEFAULT_CHANNEL):
    return tx_power_dbm + params.G_tx + params.G_rx - path_loss_db(d_m, params)


def sinr_db(signal_dbm: float, interferer_dbm_list, noise_dbm: float) -> float:
    signal = 10.0 ** (signal_dbm / 10.0)
    noise = 10.0 ** (noise_dbm / 10.0) if noise_dbm > -math.inf else 0.0
    interference = math.fsum(10.0 ** (p / 10.0) for p in interferer_dbm_list)
    denom = noise + interference
    if denom == 0.0:
        return math.inf
    return 10.0 * math.log10(signal / denom)


def link_gain_matrix(positions: np.ndarray, params: ChannelModelParams = DEFAULT_CHANNEL) -> np.ndarray:
    """Gain (dB, negative) from node i to node j: G_tx + G_rx - PL(d_ij).

    The diagonal is -inf; a node never receives itself.
    """
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    gain = params.G_tx + params.G_rx - path_loss_db(d, params)
    gain = np.atleast_2d(gain)
    np.fill_diagonal(gain, -np.inf)
    return gain


def distance_for_path_loss(pl_db: float, params: ChannelModelParams = DEFAULT_CHANNEL) -> float:
    """Invert the path-loss curve (strictly increasing in d) by bisection."""
    lo, hi = params.min_distance_m, 1.0
    if pl_db <= path_loss_db(lo, params):
        return lo
    while path_loss_db(hi, params) < pl_db:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if path_loss_db(mid, params) < pl_db:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
