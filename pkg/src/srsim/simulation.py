"""One scenario run: the shared medium, event wiring and KPI collection."""
from __future__ import annotations

import collections
import math
import time

import numpy as np

from . import _accel
from .channel import link_gain_matrix
from .engine import NS_PER_S, EventKind, EventQueue, SimulationError
from .mac import ApMac, FrameTransmission, MacState, StaMac
from .metrics import RunResult, WlanMetrics
from .phy import MCS_TABLE, FrameKind, Reception, frame_duration_ns, reception_check
from .scenario import BACKOFF_STREAM, TRAFFIC_STREAM, Role, SimulationConfig, rng_for
from .spatial_reuse import FrameClassification, applicable_threshold, classify_frame, max_tx_power
from .traffic import arrival_times_ns


def _fmt_time(t_ns: int) -> str:
    return f"{t_ns // 1000}.{t_ns % 1000:03d}"


class Simulation:
    """Owns every piece of mutable state of one scenario; nothing is shared across runs."""

    def __init__(self, cfg: SimulationConfig, *, trace=None, use_numba: bool | None = None,
                 record_delays: bool = False, fingerprint: dict | None = None):
        self.cfg = cfg
        self.k = _accel.load_kernels(use_numba)
        self.record_delays = record_delays
        self.fingerprint = fingerprint or {}
        self.trace_out = trace
        self.tracing = trace is not None
        self._tail = collections.deque(maxlen=64)

        phy = cfg.phy
        self.phy = phy
        self.sifs_ns = phy.ns("sifs_us")
        self.difs_ns = phy.ns("difs_us")
        self.slot_ns = phy.ns("slot_us")
        self.rts_ns = frame_duration_ns(FrameKind.RTS, phy=phy)
        self.cts_ns = frame_duration_ns(FrameKind.CTS, phy=phy)
        self.back_ns = frame_duration_ns(FrameKind.BACK, phy=phy)
        self.cw = phy.cw
        self.n_agg = phy.n_agg
        self.ce_db = phy.ce_db
        self.mcs_table = MCS_TABLE
        self._data_ns: dict = {}
        self.t_end = round(cfg.sim_time_s * NS_PER_S)

        dep = cfg.deployment
        nodes = dep.nodes
        n = len(nodes)
        self.nodes = nodes
        self.node_wlan = [k for k, w in enumerate(dep.wlans) for _ in w.nodes]
        self.n_wlans = len(dep.wlans)
        pos = np.array([nd.position for nd in nodes], dtype=float)
        self.gain = link_gain_matrix(pos, cfg.channel)
        self.cca = np.array([nd.cca_cs_dbm for nd in nodes], dtype=float)
        self._cca = self.cca.tolist()
        self._sr = [nd.sr for nd in nodes]
        self.noise_mw = 10.0 ** (cfg.channel.noise_dbm / 10.0)

        # static per-(observer, transmitter) sensing tables
        self.thresh = np.full((n, n), np.inf)
        self.sr_opp = np.zeros((n, n), dtype=np.bool_)
        self.limit = np.full((n, n), np.nan)
        for j, obs in enumerate(nodes):
            for i, tx in enumerate(nodes):
                if i == j:
                    continue
                cls = classify_frame(obs.sr, tx.sr.bss_color, tx.sr.srg_id)
                th = applicable_threshold(obs.sr, cls)
                self.thresh[j, i] = th
                if obs.sr.enabled and cls is not FrameClassification.INTRA_BSS and th > obs.cca_cs_dbm:
                    self.sr_opp[j, i] = True
                    self.limit[j, i] = max_tx_power(th, obs.sr.tx_pwr_ref_dbm, obs.tx_power_dbm)

        self.rx_dbm = np.full((n, n), -np.inf)
        self.rx_mw = np.zeros((n, n))
        self.trig = np.zeros((n, n), dtype=np.bool_)
        self.busy_count = np.zeros(n, dtype=np.int64)
        self.active = np.zeros(n, dtype=np.bool_)
        self.dest = np.zeros(n, dtype=np.int64)
        self.min_sinr = np.full(n, np.inf)
        self.ap_mask = np.array([nd.role is Role.AP for nd in nodes], dtype=np.bool_)
        self.nav_end = np.zeros(n, dtype=np.int64)

        self.queue = EventQueue()
        self.frames: list[FrameTransmission | None] = [None] * n
        self.active_fids: set[int] = set()
        self._fid = 0
        self.airtime_ns = [0] * self.n_wlans
        self.wlan_active = [0] * self.n_wlans
        self.n_active_wlans = 0
        self.overlap_ns = 0
        self._last_t = 0
        self.frame_stats = collections.Counter()

        self.macs: list = []
        self.aps: list[ApMac] = []
        idx = 0
        for k, w in enumerate(dep.wlans):
            ap_idx = idx
            sta_idx = list(range(idx + 1, idx + 1 + len(w.stas)))
            load = w.traffic_load_bps if w.traffic_load_bps is not None else cfg.traffic_load_bps
            trng = rng_for(dep.seed, TRAFFIC_STREAM, ap_idx)
            arrivals = arrival_times_ns(trng, load, self.t_end, phy.packet_bits)
            dests = trng.integers(0, len(w.stas), len(arrivals)) if len(w.stas) > 1 else None
            ap = ApMac(self, ap_idx, w.ap.node_id, w.ap.tx_power_dbm, sta_idx, arrivals, dests,
                       rng_for(dep.seed, BACKOFF_STREAM, ap_idx), cfg.queue_capacity)
            ap.offered_bps = load
            self.macs.append(ap)
            self.aps.append(ap)
            for s, sta in zip(sta_idx, w.stas):
                self.macs.append(StaMac(self, s, sta.node_id, sta.tx_power_dbm))
            idx += 1 + len(w.stas)

    # --- tracing -------------------------------------------------------------------------
    def trace(self, node_id: str, old: MacState, event: str, new: MacState) -> None:
        line = f"{_fmt_time(self.queue.now)} {node_id} {old.value} {event} {new.value}"
        self._tail.append(line)
        self.trace_out.write(line + "\n")

    def trace_tail(self) -> list[str]:
        return list(self._tail)

    # --- medium --------------------------------------------------------------------------
    def data_duration_ns(self, n_agg: int, mcs) -> int:
        key = (n_agg, mcs.index)
        d = self._data_ns.get(key)
        if d is None:
            d = self._data_ns[key] = frame_duration_ns(FrameKind.DATA_AMPDU, n_agg, mcs, self.phy)
        return d

    def _account(self, t: int) -> None:
        if self.n_active_wlans >= 2:
            self.overlap_ns += min(t, self.t_end) - min(self._last_t, self.t_end)
        self._last_t = t

    def start_frame(self, i: int, kind: FrameKind, dst: int, power_dbm: float, dur_ns: int, *,
                    mcs=None, n_agg: int = 0, nav_ns: int = 0, sr_based: bool = False) -> FrameTransmission:
        t = self.queue.now
        if self.active[i]:
            raise SimulationError(f"{self.nodes[i].node_id} starts {kind.value} while already transmitting",
                                  self.trace_tail())
        sr = self._sr[i]
        f = FrameTransmission(self._fid, kind, i, dst, sr.bss_color, sr.srg_id, power_dbm, t, t + dur_ns,
                              mcs, n_agg, nav_ns, sr_based)
        self._fid += 1
        newly_busy, opp = self.k.frame_start(i, dst, float(power_dbm), self.gain, self.thresh, self.cca,
                                             self.sr_opp, self.rx_dbm, self.rx_mw, self.trig, self.busy_count,
                                             self.active, self.dest, self.min_sinr, self.noise_mw)
        self.frames[i] = f
        self.active_fids.add(f.fid)
        w = self.node_wlan[i]
        self._account(t)
        if self.wlan_active[w] == 0:
            self.n_active_wlans += 1
        self.wlan_active[w] += 1
        if t < self.t_end:
            self.airtime_ns[w] += min(t + dur_ns, self.t_end) - t
        self.queue.schedule(t + dur_ns, EventKind.FRAME_END, self._on_frame_end, f)

        macs = self.macs
        if len(opp):
            limit = self.limit
            for j in opp.tolist():
                m = macs[j]
                if m.is_ap:
                    m.register_opportunity(f, float(limit[j, i]))
        for j in newly_busy.tolist():
            m = macs[j]
            if m.is_ap and (m.contending or m.power_limit.pending_opportunities):
                m.medium_changed(t)
        return f

    def _on_frame_end(self, ev) -> None:
        f: FrameTransmission = ev.payload
        t = ev.fire_time
        i = f.src
        w = self.node_wlan[i]
        self._account(t)
        self.wlan_active[w] -= 1
        if self.wlan_active[w] == 0:
            self.n_active_wlans -= 1
        announced = t + f.nav_ns if f.nav_ns else 0
        d = f.dst
        newly_idle, nav_set, rx, s = self.k.frame_end(i, d, self.trig, self.busy_count, self.active,
                                                      self.ap_mask, self.nav_end, announced,
                                                      self.rx_dbm, self.min_sinr)
        self.frames[i] = None
        self.active_fids.discard(f.fid)
        macs = self.macs
        for j in nav_set.tolist():
            macs[j].nav_extended(t)
        for j in newly_idle.tolist():
            m = macs[j]
            if m.is_ap and m.contending:
                m.medium_changed(t)

        sinr_db = 10.0 * math.log10(s) if s > 0 else -math.inf
        outcome = reception_check(rx, sinr_db, self._cca[d], self.ce_db)
        ok = outcome is Reception.SUCCESS
        self.frame_stats[(f.kind, outcome)] += 1
        macs[d].on_frame_received(f, ok, t)
        macs[i].on_own_frame_end(f, t, ok)

    # --- run -----------------------------------------------------------------------------
    def run(self) -> RunResult:
        wall = time.perf_counter()
        for ap in self.aps:
            ap.start(0)
        self.queue.schedule(self.t_end, EventKind.SIM_END)
        self.queue.run_until(self.t_end)
        self._account(self.t_end)
        return self._collect(time.perf_counter() - wall)

    def _collect(self, runtime_s: float) -> RunResult:
        cfg = self.cfg
        T = cfg.sim_time_s
        out = []
        for k, (w, ap) in enumerate(zip(cfg.deployment.wlans, self.aps)):
            ap.flush(self.t_end)
            delivered = ap.delivered
            bits = delivered * cfg.phy.packet_bits
            mean_delay = ap.delay_sum_ns / delivered / NS_PER_S if delivered else math.nan
            min_delay = ap.min_delay_ns / NS_PER_S if ap.min_delay_ns is not None else math.nan
            in_flight = ap.in_flight
            out.append(WlanMetrics(
                wlan_id=w.wlan_id,
                throughput_bps=bits / T,
                occupancy_fraction=self.airtime_ns[k] / self.t_end,
                mean_delay_s=mean_delay,
                delivered_packets=delivered,
                dropped_packets=ap.queue.drop_count + ap.dropped_no_link,
                airtime_us=self.airtime_ns[k] / 1000,
                offered_bps=ap.offered_bps,
                generated_packets=ap.next_arrival,
                dropped_no_link=ap.dropped_no_link,
                residual_in_queue=len(ap.queue) - in_flight,
                in_flight=in_flight,
                txops=ap.txops,
                sr_txops=ap.sr_txops,
                failed_txops=ap.failed_txops,
                min_delay_s=min_delay,
            ))
        extra = {"frame_stats": {(k.value, o.value): n for (k, o), n in self.frame_stats.items()}}
        if self.record_delays:
            extra["delays_s"] = {w.wlan_id: [d / NS_PER_S for d in ap.delays_ns]
                                 for w, ap in zip(cfg.deployment.wlans, self.aps)}
        return RunResult(dict(self.fingerprint), tuple(out), runtime_s, self.queue.dispatched,
                         self.overlap_ns / 1000, "ok", extra)


def run_simulation(cfg: SimulationConfig, *, trace=None, use_numba: bool | None = None,
                   record_delays: bool = False, fingerprint: dict | None = None) -> RunResult:
    return Simulation(cfg, trace=trace, use_numba=use_numba, record_delays=record_delays,
                      fingerprint=fingerprint).run()
