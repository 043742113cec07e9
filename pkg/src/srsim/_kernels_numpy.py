"""Vectorised numpy implementations of the per-frame medium kernels.

Array layout shared with the numba twin (N nodes, node index == frame slot,
since a node has at most one frame on air):

    gain[i, j]        link gain (dB) from i to j
    thresh[j, i]      sensing threshold node j applies to frames sent by i
    sr_opp[j, i]      j may take an SR opportunity on frames from i
    rx_dbm[i, j]      received power at j of the frame i is sending
    rx_mw[i, j]       same, in mW
    trig[i, j]        frame from i marks the medium busy at j
    nav_end[j]        NAV expiry (ns) of node j
    min_sinr[i]       running minimum (linear) SINR of i's frame at its destination
"""
import numpy as np


def frame_start(i, d, p_dbm, gain, thresh, cca, sr_opp, rx_dbm, rx_mw, trig,
                busy_count, active, dest, min_sinr, noise_mw):
    row = p_dbm + gain[i]
    rx_dbm[i] = row
    rx_mw[i] = np.power(10.0, row / 10.0)
    th = thresh[:, i]
    t = row >= th
    trig[i] = t
    busy_count += t
    newly_busy = np.flatnonzero(t & (busy_count == 1))
    opp = np.flatnonzero(sr_opp[:, i] & (row >= cca) & ~t)

    active[i] = True
    dest[i] = d
    min_sinr[i] = np.inf
    act = np.flatnonzero(active)
    dsts = dest[act]
    m = rx_mw[np.ix_(act, dsts)]          # m[b, a]: power of frame b at the receiver of frame a
    sig = np.diagonal(m).copy()
    np.fill_diagonal(m, 0.0)
    interference = m.sum(axis=0)
    sinr = sig / (noise_mw + interference)
    sinr[active[dsts]] = 0.0              # receiver is itself transmitting
    min_sinr[act] = np.minimum(min_sinr[act], sinr)
    return newly_busy, opp


def frame_end(i, d, trig, busy_count, active, ap_mask, nav_end, announced, rx_dbm, min_sinr):
    """Release frame ``i``.

    Returns (nodes now physically idle, APs whose NAV was extended, rx power
    at the destination, minimum linear SINR over the frame).

    ``announced`` is the absolute NAV end carried by the frame, 0 for none.
    """
    t = trig[i]
    busy_count -= t
    active[i] = False
    idle = np.flatnonzero(t & (busy_count == 0))
    if announced <= 0:
        nav = idle[:0]
    else:
        cand = t & ap_mask & (nav_end < announced)
        cand[d] = False
        nav = np.flatnonzero(cand)
        nav_end[nav] = announced
    return idle, nav, float(rx_dbm[i, d]), float(min_sinr[i])


def sensed_busy(rx_dbm_col, thresh_row, active):
    """Pure re-evaluation of carrier sense at one node: any active frame at or above its threshold."""
    return bool(np.any(active & (rx_dbm_col >= thresh_row)))
