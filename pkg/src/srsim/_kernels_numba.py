"""numba-compiled twins of :mod:`srsim._kernels_numpy` (same signatures, same layout)."""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def frame_start(i, d, p_dbm, gain, thresh, cca, sr_opp, rx_dbm, rx_mw, trig,
                busy_count, active, dest, min_sinr, noise_mw):
    n = gain.shape[0]
    newly_busy = np.empty(n, dtype=np.int64)
    opp = np.empty(n, dtype=np.int64)
    nb = 0
    no = 0
    for j in range(n):
        r = p_dbm + gain[i, j]
        rx_dbm[i, j] = r
        rx_mw[i, j] = 10.0 ** (r / 10.0)
        if r >= thresh[j, i]:
            trig[i, j] = True
            busy_count[j] += 1
            if busy_count[j] == 1:
                newly_busy[nb] = j
                nb += 1
        else:
            trig[i, j] = False
            if sr_opp[j, i] and r >= cca[j]:
                opp[no] = j
                no += 1

    active[i] = True
    dest[i] = d
    min_sinr[i] = np.inf
    for a in range(n):
        if not active[a]:
            continue
        r = dest[a]
        if active[r]:
            min_sinr[a] = 0.0
            continue
        acc = 0.0
        for b in range(n):
            if b != a and active[b]:
                acc += rx_mw[b, r]
        s = rx_mw[a, r] / (noise_mw + acc)
        if s < min_sinr[a]:
            min_sinr[a] = s
    return newly_busy[:nb], opp[:no]


@njit(cache=True, nogil=True)
def frame_end(i, d, trig, busy_count, active, ap_mask, nav_end, announced, rx_dbm, min_sinr):
    n = trig.shape[0]
    idle = np.empty(n, dtype=np.int64)
    nav = np.empty(n, dtype=np.int64)
    k = 0
    m = 0
    for j in range(n):
        if trig[i, j]:
            busy_count[j] -= 1
            if announced > 0 and ap_mask[j] and j != d and announced > nav_end[j]:
                nav_end[j] = announced
                nav[m] = j
                m += 1
            if busy_count[j] == 0:
                idle[k] = j
                k += 1
    active[i] = False
    return idle[:k], nav[:m], rx_dbm[i, d], min_sinr[i]


@njit(cache=True)
def sensed_busy(rx_dbm_col, thresh_row, active):
    for b in range(rx_dbm_col.shape[0]):
        if active[b] and rx_dbm_col[b] >= thresh_row[b]:
            return True
    return False
