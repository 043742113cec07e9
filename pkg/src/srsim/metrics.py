"""Per-WLAN KPIs and cross-run aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class WlanMetrics:
    wlan_id: str
    throughput_bps: float
    occupancy_fraction: float
    mean_delay_s: float                 # nan when nothing was delivered
    delivered_packets: int
    dropped_packets: int
    airtime_us: float
    offered_bps: float = 0.0
    generated_packets: int = 0
    dropped_no_link: int = 0
    residual_in_queue: int = 0
    in_flight: int = 0
    txops: int = 0
    sr_txops: int = 0
    failed_txops: int = 0
    min_delay_s: float = math.nan


@dataclass(frozen=True)
class RunResult:
    fingerprint: Mapping[str, object]
    wlans: tuple[WlanMetrics, ...]
    runtime_s: float = 0.0
    events: int = 0
    overlap_us: float = 0.0             # time with frames of two or more WLANs on air
    status: str = "ok"
    extra: Mapping[str, object] = field(default_factory=dict)

    @property
    def wlan_a(self) -> WlanMetrics:
        return self.wlans[0]

    def by_id(self, wlan_id: str) -> WlanMetrics:
        for w in self.wlans:
            if w.wlan_id == wlan_id:
                return w
        raise KeyError(wlan_id)


def throughput(delivered_bits: float, sim_time_s: float) -> float:
    if sim_time_s <= 0:
        raise ValueError("simulation time must be positive")
    return delivered_bits / sim_time_s


def occupancy(airtime_us: float, sim_time_us: float) -> float:
    if sim_time_us <= 0:
        raise ValueError("simulation time must be positive")
    return airtime_us / sim_time_us


def mean_delay(delivered) -> float:
    """Mean of delivery minus arrival time over delivered packets; nan for an empty list."""
    delays = [p.delivery_time - p.arrival_time for p in delivered]
    if not delays:
        return math.nan
    return math.fsum(delays) / len(delays)


def ecdf(samples: Iterable[float]) -> list[tuple[float, float]]:
    xs = np.sort(np.asarray(list(samples), dtype=float))
    if xs.size == 0:
        raise ValueError("ecdf of an empty sample")
    values, counts = np.unique(xs, return_counts=True)
    cum = np.cumsum(counts) / xs.size
    return [(float(v), float(c)) for v, c in zip(values, cum)]


def ecdf_eval(samples: Sequence[float], x: float) -> float:
    xs = np.sort(np.asarray(samples, dtype=float))
    return float(np.searchsorted(xs, x, side="right") / xs.size)


def stochastically_dominates(left: Sequence[float], right: Sequence[float]) -> bool:
    """True if the ECDF of ``left`` is everywhere >= the ECDF of ``right`` (lies to its left)."""
    grid = np.union1d(np.asarray(left, dtype=float), np.asarray(right, dtype=float))
    return all(ecdf_eval(left, x) >= ecdf_eval(right, x) for x in grid)


def best_obss_pd(results: Mapping[float, RunResult], grid: Sequence[float] | None = None,
                 wlan_index: int = 0) -> tuple[float, WlanMetrics]:
    """OBSS/PD maximising WLAN_A throughput; ties go to the least aggressive (most negative) value."""
    if grid is not None:
        missing = [pd for pd in grid if pd not in results]
        if missing:
            raise ValueError(f"incomplete OBSS/PD grid, missing {missing}")
    if not results:
        raise ValueError("no results")
    best_pd = None
    best = None
    for pd in sorted(results):
        m = results[pd].wlans[wlan_index]
        if best is None or m.throughput_bps > best.throughput_bps:
            best_pd, best = pd, m
    return best_pd, best


def relative_gain(best: float, legacy: float) -> float:
    if legacy > 0:
        return (best - legacy) / legacy
    return 0.0 if best == 0 else math.inf
