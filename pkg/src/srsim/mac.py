"""CSMA/CA DCF state machines with OBSS PD-based spatial reuse.

APs contend for the medium (RTS/CTS/DATA/BACK, fixed CW, unlimited retries);
STAs only answer with CTS and Block ACK. A node's view of the medium is a
busy counter maintained by the medium kernels plus its NAV.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .engine import EventKind, SimulationError
from .phy import FrameKind, NoLinkError, select_mcs
from .spatial_reuse import PowerLimitState, SrConfig, applicable_threshold, classify_frame, merge_power_limits
from .traffic import FifoQueue

if TYPE_CHECKING:
    from .simulation import Simulation


class MacState(enum.Enum):
    IDLE = "IDLE"
    SENSING_BACKOFF = "SENSING_BACKOFF"
    WAIT_CTS = "WAIT_CTS"
    TRANSMITTING_DATA = "TRANSMITTING_DATA"
    WAIT_BACK = "WAIT_BACK"
    NAV_BLOCKED = "NAV_BLOCKED"
    RECEIVING = "RECEIVING"


class ChannelState(enum.Enum):
    IDLE = "idle"
    BUSY = "busy"


@dataclass
class BackoffState:
    remaining_slots: int = 0
    frozen: bool = True


class FrameTransmission:
    __slots__ = ("fid", "kind", "src", "dst", "bss_color", "srg_id", "tx_power_dbm",
                 "start", "end", "mcs", "n_agg", "nav_ns", "sr_based")

    def __init__(self, fid, kind, src, dst, bss_color, srg_id, tx_power_dbm, start, end,
                 mcs=None, n_agg=0, nav_ns=0, sr_based=False):
        self.fid = fid
        self.kind = kind
        self.src = src
        self.dst = dst
        self.bss_color = bss_color
        self.srg_id = srg_id
        self.tx_power_dbm = tx_power_dbm
        self.start = start
        self.end = end
        self.mcs = mcs
        self.n_agg = n_agg
        self.nav_ns = nav_ns
        self.sr_based = sr_based

    def __repr__(self):
        return (f"Frame#{self.fid}({self.kind.value} {self.src}->{self.dst} "
                f"{self.tx_power_dbm:g}dBm [{self.start},{self.end}))")


def draw_backoff(rng: np.random.Generator, cw: int = 15) -> int:
    """Uniform slot count in [0, cw]; the window is fixed, it never doubles."""
    return int(rng.integers(0, cw + 1))


def sense_channel(observer: SrConfig, observed: Iterable[tuple[FrameTransmission, float]]) -> ChannelState:
    """Physical carrier sense from scratch: busy iff any frame is at or above its applicable threshold.

    ``observed`` pairs each on-air frame (other than the observer's own) with its received power.
    """
    for frame, rx_dbm in observed:
        cls = classify_frame(observer, frame.bss_color, frame.srg_id)
        if rx_dbm >= applicable_threshold(observer, cls):
            return ChannelState.BUSY
    return ChannelState.IDLE


def set_nav(nav_end: int, now: int, announced_ns: int) -> int:
    """NAV after decoding a frame announcing ``announced_ns`` of remaining exchange."""
    return max(nav_end, now + announced_ns)


class StaMac:
    is_ap = False

    def __init__(self, sim: Simulation, idx: int, node_id: str, tx_power_dbm: float):
        self.sim = sim
        self.idx = idx
        self.node_id = node_id
        self.tx_power_dbm = tx_power_dbm
        self.state = MacState.IDLE

    def _go(self, new: MacState, event: str) -> None:
        sim = self.sim
        if sim.tracing:
            sim.trace(self.node_id, self.state, event, new)
        self.state = new

    def on_frame_received(self, f: FrameTransmission, ok: bool, t: int) -> None:
        sim = self.sim
        if f.kind is FrameKind.RTS:
            if ok:
                self._go(MacState.RECEIVING, "RTS_RX")
                nav = f.nav_ns - sim.sifs_ns - sim.cts_ns
                sim.queue.schedule(t + sim.sifs_ns, EventKind.FRAME_START, self._send_cts, (f.src, nav))
        elif f.kind is FrameKind.DATA_AMPDU:
            if ok:
                sim.queue.schedule(t + sim.sifs_ns, EventKind.FRAME_START, self._send_back, f.src)
                self._go(MacState.RECEIVING, "DATA_RX_OK")
            else:
                self._go(MacState.IDLE, "DATA_RX_FAIL")

    def _send_cts(self, ev) -> None:
        dst, nav = ev.payload
        self.sim.start_frame(self.idx, FrameKind.CTS, dst, self.tx_power_dbm, self.sim.cts_ns, nav_ns=nav)

    def _send_back(self, ev) -> None:
        self.sim.start_frame(self.idx, FrameKind.BACK, ev.payload, self.tx_power_dbm, self.sim.back_ns)

    def on_own_frame_end(self, f: FrameTransmission, t: int, delivered: bool) -> None:
        if f.kind is FrameKind.BACK:
            self._go(MacState.IDLE, "BACK_END")


class ApMac:
    """Downlink AP: FIFO of packet ids fed by a pre-drawn Poisson arrival vector."""

    is_ap = True

    def __init__(self, sim: Simulation, idx: int, node_id: str, tx_power_dbm: float, sta_indices: list[int],
                 arrivals: np.ndarray, dests: np.ndarray | None, rng: np.random.Generator, capacity: int):
        self.sim = sim
        self.idx = idx
        self.node_id = node_id
        self.tx_power_dbm = tx_power_dbm
        self.sta_indices = sta_indices
        self.arrivals = arrivals
        self.dests = dests                 # per-packet STA slot, None when the WLAN has one STA
        self.rng = rng
        self.queue = FifoQueue(capacity)
        self.next_arrival = 0

        self.state = MacState.IDLE
        self.contending = False            # SENSING_BACKOFF or NAV_BLOCKED
        self.backoff = BackoffState()
        self.idle = False                  # cached medium view (physical + NAV), valid while contending
        self.idle_since = 0
        self.expiry_event = None
        self.nav_event = None
        self.timeout_event = None
        self.deadline = 0
        self.power_limit = PowerLimitState()

        self.ampdu: list[int] = []
        self.retry_ampdu: list[int] | None = None
        self.txop_dst = -1
        self.txop_power = tx_power_dbm
        self.txop_mcs = None
        self.txop_sr = False
        self.data_ns = 0

        self.delivered = 0
        self.delay_sum_ns = 0
        self.min_delay_ns = None
        self.dropped_no_link = 0
        self.txops = 0
        self.sr_txops = 0
        self.failed_txops = 0
        self.delays_ns: list[int] | None = [] if sim.record_delays else None

    # --- helpers -------------------------------------------------------------------------
    def _go(self, new: MacState, event: str) -> None:
        sim = self.sim
        if sim.tracing:
            sim.trace(self.node_id, self.state, event, new)
        self.state = new
        self.contending = new is MacState.SENSING_BACKOFF or new is MacState.NAV_BLOCKED

    @property
    def nav_end(self) -> int:
        return int(self.sim.nav_end[self.idx])

    def _fail(self, msg: str):
        raise SimulationError(f"{self.node_id} in {self.state.value}: {msg}", self.sim.trace_tail())

    def medium_idle(self, t: int) -> bool:
        sim = self.sim
        i = self.idx
        return sim.busy_count[i] == 0 and sim.nav_end[i] <= t

    def flush(self, t: int) -> None:
        """Admit every arrival up to ``t``; the queue length has been constant since the last flush."""
        arr = self.arrivals
        k = int(np.searchsorted(arr, t, side="right"))
        n = k - self.next_arrival
        if n > 0:
            self.queue.admit_many(range(self.next_arrival, k), n)
            self.next_arrival = k

    def _wake_on_next_arrival(self) -> None:
        if self.next_arrival < len(self.arrivals):
            t_next = int(self.arrivals[self.next_arrival])
            self.sim.queue.schedule(t_next, EventKind.PACKET_ARRIVAL, self._on_arrival)

    def _dest_key(self):
        if self.dests is None:
            return None
        dests = self.dests
        return lambda pid: dests[pid]

    # --- contention ----------------------------------------------------------------------
    def start(self, t: int) -> None:
        self.flush(t)
        if len(self.queue):
            self._start_contention(t, "ARRIVAL")
        else:
            self._wake_on_next_arrival()

    def _on_arrival(self, ev) -> None:
        t = ev.fire_time
        self.flush(t)
        if self.state is not MacState.IDLE:
            self._fail("arrival wake-up while not idle")
        self._start_contention(t, "ARRIVAL")

    def _start_contention(self, t: int, event: str) -> None:
        sim = self.sim
        self.backoff.remaining_slots = draw_backoff(self.rng, sim.cw)
        self.backoff.frozen = True
        self.idle = self.medium_idle(t)
        self._arm_nav_timer(t)
        if self.idle:
            self._go(MacState.SENSING_BACKOFF, event)
            self._resume(t)
        elif self.nav_end > t:
            self._go(MacState.NAV_BLOCKED, event)
        else:
            self._go(MacState.SENSING_BACKOFF, event)

    def _resume(self, t: int) -> None:
        sim = self.sim
        self.idle_since = t
        self.backoff.frozen = False
        fire = t + sim.difs_ns + self.backoff.remaining_slots * sim.slot_ns
        self.expiry_event = sim.queue.schedule(fire, EventKind.SLOT_TICK, self._on_backoff_expiry)

    def _freeze(self, t: int) -> bool:
        sim = self.sim
        ev = self.expiry_event
        if ev is None:
            return True
        if ev.fire_time <= t:
            # counter hits zero in this very slot: transmit anyway (slot-synchronous collision)
            return False
        counted = t - self.idle_since - sim.difs_ns
        if counted > 0:
            self.backoff.remaining_slots -= counted // sim.slot_ns
        sim.queue.cancel(ev)
        self.expiry_event = None
        self.backoff.frozen = True
        return True

    def _drop_stale_limits(self) -> None:
        # pending limits lapse once none of their triggering frames is on air and the medium is busy again
        pending = self.power_limit.pending_opportunities
        if pending:
            active = self.sim.active_fids
            if not any(fid in active for fid, _ in pending):
                self.power_limit.clear()

    def medium_changed(self, t: int) -> None:
        """Physical or virtual carrier sense may have flipped at ``t``."""
        if not self.contending:
            if self.power_limit.pending_opportunities and not self.medium_idle(t):
                self._drop_stale_limits()
            return
        idle = self.medium_idle(t)
        if idle == self.idle:
            return
        self.idle = idle
        if idle:
            self._go(MacState.SENSING_BACKOFF, "IDLE")
            self._resume(t)
        else:
            self._drop_stale_limits()
            if self._freeze(t):
                self._go(MacState.NAV_BLOCKED if self.sim.nav_end[self.idx] > t else MacState.SENSING_BACKOFF,
                         "BUSY")

    def _arm_nav_timer(self, t: int) -> None:
        nav_end = int(self.sim.nav_end[self.idx])
        if nav_end <= t:
            return
        ev = self.nav_event
        if ev is not None and not ev.cancelled and ev.fire_time == nav_end:
            return
        q = self.sim.queue
        q.cancel(ev)
        self.nav_event = q.schedule(nav_end, EventKind.TIMEOUT, self._on_nav_expired)

    def nav_extended(self, t: int) -> None:
        """The shared NAV array was raised for this AP at ``t``; only a contending AP needs a timer."""
        if self.contending:
            self._arm_nav_timer(t)
        self.medium_changed(t)

    def _on_nav_expired(self, ev) -> None:
        self.nav_event = None
        self.medium_changed(ev.fire_time)

    def register_opportunity(self, f: FrameTransmission, limit_dbm: float) -> None:
        state = self.state
        if state is MacState.IDLE or state is MacState.SENSING_BACKOFF or state is MacState.NAV_BLOCKED:
            merge_power_limits(self.power_limit, limit_dbm, f.fid)

    # --- TXOP ----------------------------------------------------------------------------
    def _on_backoff_expiry(self, ev) -> None:
        t = ev.fire_time
        sim = self.sim
        self.expiry_event = None
        if self.state is not MacState.SENSING_BACKOFF:
            self._fail("backoff expiry outside SENSING_BACKOFF")
        self.backoff.remaining_slots = 0
        self.flush(t)
        ampdu = self.retry_ampdu or self.queue.build_ampdu(sim.n_agg, self._dest_key())
        self.retry_ampdu = None
        sta_slot = 0 if self.dests is None else int(self.dests[ampdu[0]])
        dst = self.sta_indices[sta_slot]
        power = self.tx_power_dbm
        limit = self.power_limit.active_limit_dbm
        sr = False
        if limit is not None and limit < power:
            power = limit
            sr = True
        try:
            mcs = select_mcs(power + sim.gain[self.idx, dst], sim.mcs_table)
        except NoLinkError:
            # unreachable at this power: drop the head-of-line packet
            self.queue.remove(ampdu[:1])
            self.dropped_no_link += 1
            if len(self.queue):
                self._start_contention(t, "NO_LINK")
            else:
                self._go(MacState.IDLE, "NO_LINK")
                self._wake_on_next_arrival()
            return
        self.ampdu = ampdu
        self.txop_dst = dst
        self.txop_power = power
        self.txop_mcs = mcs
        self.txop_sr = sr
        self.data_ns = sim.data_duration_ns(len(ampdu), mcs)
        self.txops += 1
        if sr:
            self.sr_txops += 1
        nav = 3 * sim.sifs_ns + sim.cts_ns + self.data_ns + sim.back_ns
        self._go(MacState.WAIT_CTS, "BACKOFF_END")
        sim.start_frame(self.idx, FrameKind.RTS, dst, power, sim.rts_ns, nav_ns=nav, sr_based=sr)

    def _arm_timeout(self, when: int, reason: str) -> None:
        self.timeout_event = self.sim.queue.schedule(when, EventKind.TIMEOUT, self._on_timeout, reason)

    def on_own_frame_end(self, f: FrameTransmission, t: int, delivered: bool) -> None:
        # The STA answers a decoded frame after SIFS without fail, so the timeout is only armed
        # once it is known that no valid response will arrive; the deadline is unchanged.
        sim = self.sim
        if f.kind is FrameKind.RTS:
            self.deadline = t + sim.sifs_ns + sim.cts_ns + sim.difs_ns
            if not delivered:
                self._arm_timeout(self.deadline, "CTS_TIMEOUT")
        elif f.kind is FrameKind.DATA_AMPDU:
            self._go(MacState.WAIT_BACK, "DATA_END")
            self.deadline = t + sim.sifs_ns + sim.back_ns + sim.difs_ns
            if not delivered:
                self._arm_timeout(self.deadline, "BACK_TIMEOUT")

    def on_frame_received(self, f: FrameTransmission, ok: bool, t: int) -> None:
        if f.src != self.txop_dst:
            return
        sim = self.sim
        if f.kind is FrameKind.CTS and self.state is MacState.WAIT_CTS:
            if not ok:
                self._arm_timeout(self.deadline, "CTS_TIMEOUT")
                return
            sim.queue.schedule(t + sim.sifs_ns, EventKind.FRAME_START, self._send_data)
            if sim.tracing:
                sim.trace(self.node_id, self.state, "CTS_OK", self.state)
        elif f.kind is FrameKind.BACK and self.state is MacState.WAIT_BACK:
            if not ok:
                self._arm_timeout(self.deadline, "BACK_TIMEOUT")
                return
            self._deliver(t)

    def _send_data(self, ev) -> None:
        sim = self.sim
        self._go(MacState.TRANSMITTING_DATA, "DATA_START")
        sim.start_frame(self.idx, FrameKind.DATA_AMPDU, self.txop_dst, self.txop_power, self.data_ns,
                        mcs=self.txop_mcs, n_agg=len(self.ampdu), nav_ns=sim.sifs_ns + sim.back_ns,
                        sr_based=self.txop_sr)

    def _deliver(self, t: int) -> None:
        self.flush(t)
        ampdu = self.ampdu
        self.queue.remove(ampdu)
        arr = self.arrivals
        delays = t - arr[ampdu]
        self.delivered += len(ampdu)
        self.delay_sum_ns += int(delays.sum())
        dmin = int(delays.min())
        if self.min_delay_ns is None or dmin < self.min_delay_ns:
            self.min_delay_ns = dmin
        if self.delays_ns is not None:
            self.delays_ns.extend(int(x) for x in delays)
        self.ampdu = []
        self.power_limit.clear()
        if len(self.queue):
            self._start_contention(t, "BACK_OK")
        else:
            self._go(MacState.IDLE, "BACK_OK")
            self._wake_on_next_arrival()

    def _on_timeout(self, ev) -> None:
        self.timeout_event = None
        self.failed_txops += 1
        self.retry_ampdu = self.ampdu
        self.ampdu = []
        self.power_limit.clear()
        # retry the same head packets after a fresh backoff; nothing was dequeued
        self._start_contention(ev.fire_time, ev.payload)

    @property
    def in_flight(self) -> int:
        return len(self.ampdu) or len(self.retry_ampdu or ())
