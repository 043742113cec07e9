"""Scenario grids: enumeration, parallel execution, deterministic CSV output.

Only WLAN_A's OBSS/PD varies along the grid (every other WLAN stays legacy
unless ``sr_all``). A cell is fully described by its config text, so any CSV
row can be re-run on its own with ``srsim run``.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .engine import SimulationError
from .metrics import RunResult, best_obss_pd, relative_gain
from .scenario import ConfigError, _as_bool, _as_int, parse_config
from .simulation import run_simulation
from .spatial_reuse import OBSS_PD_MAX, OBSS_PD_MIN

WORKERS_ENV = "SRSIM_WORKERS"

CSV_COLUMNS = ("map_m", "deployment_seed", "obss_pd_dbm", "load_mbps", "wlan_id", "is_wlan_a",
               "throughput_mbps", "occupancy", "mean_delay_ms", "delivered", "dropped", "status")
BEST_COLUMNS = ("map_m", "deployment_seed", "load_mbps", "best_obss_pd_dbm", "throughput_mbps",
                "legacy_throughput_mbps", "relative_gain", "mean_delay_ms", "legacy_mean_delay_ms",
                "others_throughput_mbps", "legacy_others_throughput_mbps", "status")

DEFAULT_MAPS = (25.0, 50.0, 100.0)
DEFAULT_OBSS_PD = tuple(float(x) for x in range(-82, -61))
DEFAULT_LOADS_MBPS = tuple(float(x) for x in np.linspace(1.0, 100.0, 16))


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepSpec:
    maps_m: tuple[float, ...] = DEFAULT_MAPS
    n_deployments: int = 50
    obss_pd_dbm: tuple[float, ...] = DEFAULT_OBSS_PD
    loads_mbps: tuple[float, ...] = DEFAULT_LOADS_MBPS
    base_seed: int = 0
    workers: int | None = None          # None: environment / CPU count
    sim_time_s: float = 10.0
    sr_all: bool = False
    n_wlans: int = 10
    stas_per_wlan: int = 1
    sta_distance_range: tuple[float, float] = (1.0, 10.0)
    extra_config: str = ""              # appended verbatim to every cell config

    def validate(self) -> list[str]:
        v = []
        for name in ("maps_m", "obss_pd_dbm", "loads_mbps"):
            if not getattr(self, name):
                v.append(f"{name} must not be empty")
        if any(not m > 0 for m in self.maps_m):
            v.append("map sizes must be > 0")
        if any(not OBSS_PD_MIN <= pd <= OBSS_PD_MAX for pd in self.obss_pd_dbm):
            v.append(f"OBSS/PD values must lie in [{OBSS_PD_MIN:g}, {OBSS_PD_MAX:g}]")
        if any(not x > 0 for x in self.loads_mbps):
            v.append("loads must be > 0")
        if self.n_deployments < 1:
            v.append("n_deployments must be >= 1")
        if not self.sim_time_s > 0:
            v.append("sim_time_s must be > 0")
        if self.workers is not None and self.workers < 1:
            v.append("workers must be >= 1")
        return v

    def cells(self) -> list[Cell]:
        return [Cell(m, self.base_seed ^ d, pd, load)
                for m in self.maps_m
                for d in range(self.n_deployments)
                for load in self.loads_mbps
                for pd in self.obss_pd_dbm]


@dataclass(frozen=True, order=True)
class Cell:
    map_m: float
    deployment_seed: int
    obss_pd_dbm: float
    load_mbps: float

    @property
    def key(self):
        return (self.map_m, self.deployment_seed, self.obss_pd_dbm, self.load_mbps)


@dataclass
class CellResult:
    cell: Cell
    result: RunResult | None
    status: str = "ok"
    delays_s: dict = field(default_factory=dict)


def _num(v: float) -> str:
    return repr(float(v))


def cell_config_text(spec: SweepSpec, cell: Cell) -> str:
    """Config file body reproducing one grid cell."""
    lines = [
        f"map_width_m = {_num(cell.map_m)}",
        f"map_height_m = {_num(cell.map_m)}",
        f"n_wlans = {spec.n_wlans}",
        f"stas_per_wlan = {spec.stas_per_wlan}",
        f"sta_distance_min_m = {_num(spec.sta_distance_range[0])}",
        f"sta_distance_max_m = {_num(spec.sta_distance_range[1])}",
        f"seed = {cell.deployment_seed}",
        f"traffic_load_mbps = {_num(cell.load_mbps)}",
        f"sim_time_s = {_num(spec.sim_time_s)}",
        "sr_enabled = true",
        f"sr_all = {'true' if spec.sr_all else 'false'}",
        f"obss_pd_nonsrg_dbm = {_num(cell.obss_pd_dbm)}",
        f"obss_pd_srg_dbm = {_num(cell.obss_pd_dbm)}",
    ]
    text = "\n".join(lines) + "\n"
    if spec.extra_config:
        text += spec.extra_config.rstrip("\n") + "\n"
    return text


def run_cell(spec: SweepSpec, cell: Cell, record_delays: bool = False) -> CellResult:
    try:
        cfg = parse_config(cell_config_text(spec, cell))
    except ConfigError as exc:
        return CellResult(cell, None, "config_error: " + "; ".join(exc.errors))
    try:
        res = run_simulation(cfg, fingerprint=dict(zip(("map_m", "deployment_seed", "obss_pd_dbm", "load_mbps"),
                                                       cell.key)),
                             record_delays=record_delays)
    except SimulationError as exc:
        return CellResult(cell, None, "aborted: " + str(exc).splitlines()[0])
    return CellResult(cell, res, res.status)


def _run_chunk(args):
    spec, cells = args
    return [run_cell(spec, c) for c in cells]


def run_sweep(spec: SweepSpec, workers: int | None = None, progress=None) -> list[CellResult]:
    """Run every cell; the returned list is in grid order whatever the completion order."""
    problems = spec.validate()
    if problems:
        raise ValueError("; ".join(problems))
    cells = spec.cells()
    n = workers or spec.workers or default_workers()
    if n <= 1 or len(cells) <= 1:
        out = []
        for c in cells:
            out.append(run_cell(spec, c))
            if progress:
                progress(len(out), len(cells))
        return out
    # contiguous chunks keep scheduling overhead low; merging is by grid position
    size = max(1, min(16, len(cells) // (4 * n) or 1))
    chunks = [cells[i:i + size] for i in range(0, len(cells), size)]
    out: list[CellResult] = []
    with ProcessPoolExecutor(max_workers=n) as pool:
        for part in pool.map(_run_chunk, [(spec, ch) for ch in chunks]):
            out.extend(part)
            if progress:
                progress(len(out), len(cells))
    order = {c.key: i for i, c in enumerate(cells)}
    out.sort(key=lambda r: order[r.cell.key])
    return out


# --- CSV ---------------------------------------------------------------------------------

def _fmt(v: float, digits: int = 6) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return f"{v:.{digits}f}"


def _g(v: float) -> str:
    return f"{v:g}"


def result_rows(cr: CellResult) -> list[dict]:
    c = cr.cell
    base = {"map_m": _g(c.map_m), "deployment_seed": str(c.deployment_seed),
            "obss_pd_dbm": _g(c.obss_pd_dbm), "load_mbps": _g(c.load_mbps)}
    if cr.result is None:
        return [dict(base, wlan_id="", is_wlan_a="", throughput_mbps="nan", occupancy="nan",
                     mean_delay_ms="nan", delivered="", dropped="", status=cr.status)]
    rows = []
    for k, w in enumerate(cr.result.wlans):
        rows.append(dict(base, wlan_id=w.wlan_id, is_wlan_a="1" if k == 0 else "0",
                         throughput_mbps=_fmt(w.throughput_bps / 1e6),
                         occupancy=_fmt(w.occupancy_fraction),
                         mean_delay_ms=_fmt(w.mean_delay_s * 1e3),
                         delivered=str(w.delivered_packets), dropped=str(w.dropped_packets),
                         status=cr.status))
    return rows


def write_csv(fh, rows: Iterable[dict], columns: Sequence[str] = CSV_COLUMNS) -> None:
    writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)


def results_csv(results: Iterable[CellResult]) -> str:
    buf = io.StringIO()
    write_csv(buf, (row for cr in results for row in result_rows(cr)))
    return buf.getvalue()


@dataclass
class BestRow:
    map_m: float
    deployment_seed: int
    load_mbps: float
    best_obss_pd_dbm: float | None
    throughput_bps: float
    legacy_throughput_bps: float
    mean_delay_s: float
    legacy_mean_delay_s: float
    others_throughput_bps: float
    legacy_others_throughput_bps: float
    status: str = "ok"

    @property
    def relative_gain(self) -> float:
        return relative_gain(self.throughput_bps, self.legacy_throughput_bps)


def _others_mean(res: RunResult) -> float:
    others = res.wlans[1:]
    return float(np.mean([w.throughput_bps for w in others])) if others else math.nan


def best_rows(results: Sequence[CellResult], grid: Sequence[float], legacy_pd: float = OBSS_PD_MIN) -> list[BestRow]:
    """Best OBSS/PD for WLAN_A per (map, deployment, load), alongside the legacy cell."""
    groups: dict[tuple, dict[float, CellResult]] = {}
    for cr in results:
        c = cr.cell
        groups.setdefault((c.map_m, c.deployment_seed, c.load_mbps), {})[c.obss_pd_dbm] = cr
    out = []
    nan = math.nan
    for (m, seed, load), by_pd in groups.items():
        ok = {pd: cr.result for pd, cr in by_pd.items() if cr.result is not None}
        if len(ok) != len(grid) or legacy_pd not in ok:
            out.append(BestRow(m, seed, load, None, nan, nan, nan, nan, nan, nan, "incomplete"))
            continue
        pd, best = best_obss_pd(ok, grid)
        legacy = ok[legacy_pd]
        out.append(BestRow(m, seed, load, pd, best.throughput_bps, legacy.wlan_a.throughput_bps,
                           best.mean_delay_s, legacy.wlan_a.mean_delay_s,
                           _others_mean(ok[pd]), _others_mean(legacy)))
    return out


def best_csv(rows: Iterable[BestRow]) -> str:
    buf = io.StringIO()

    def fmt(b: BestRow) -> dict:
        return {"map_m": _g(b.map_m), "deployment_seed": str(b.deployment_seed), "load_mbps": _g(b.load_mbps),
                "best_obss_pd_dbm": "" if b.best_obss_pd_dbm is None else _g(b.best_obss_pd_dbm),
                "throughput_mbps": _fmt(b.throughput_bps / 1e6),
                "legacy_throughput_mbps": _fmt(b.legacy_throughput_bps / 1e6),
                "relative_gain": _fmt(b.relative_gain),
                "mean_delay_ms": _fmt(b.mean_delay_s * 1e3),
                "legacy_mean_delay_ms": _fmt(b.legacy_mean_delay_s * 1e3),
                "others_throughput_mbps": _fmt(b.others_throughput_bps / 1e6),
                "legacy_others_throughput_mbps": _fmt(b.legacy_others_throughput_bps / 1e6),
                "status": b.status}
    write_csv(buf, (fmt(b) for b in rows), BEST_COLUMNS)
    return buf.getvalue()


# --- sweep file --------------------------------------------------------------------------

def _float_list(text: str) -> tuple[float, ...]:
    """Comma list, or ``start:stop:step`` (inclusive) for evenly spaced values."""
    text = text.strip()
    if ":" in text and "," not in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise ValueError(f"expected start:stop:step, got {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ValueError(f"empty range {text!r}")
        return tuple(round(start + i * step, 9) for i in range(n))
    vals = tuple(float(p) for p in text.split(",") if p.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _pair(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise ValueError(f"expected 'min, max', got {text!r}")
    return vals


SWEEP_KEYS = {
    "maps_m": ("maps_m", _float_list),
    "n_deployments": ("n_deployments", _as_int),
    "obss_pd_dbm": ("obss_pd_dbm", _float_list),
    "loads_mbps": ("loads_mbps", _float_list),
    "base_seed": ("base_seed", _as_int),
    "workers": ("workers", _as_int),
    "sim_time_s": ("sim_time_s", float),
    "sr_all": ("sr_all", _as_bool),
    "n_wlans": ("n_wlans", _as_int),
    "stas_per_wlan": ("stas_per_wlan", _as_int),
    "sta_distance_range_m": ("sta_distance_range", _pair),
}


def parse_sweep(text: str) -> SweepSpec:
    """Sweep file: ``key = value`` lines; keys outside the sweep set are passed to every cell config."""
    values = {}
    extra = []
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SWEEP_KEYS:
            extra.append(line)
            continue
        name, parser = SWEEP_KEYS[key]
        if name in values:
            errors.append(f"line {lineno}: duplicate key '{key}'")
            continue
        try:
            values[name] = parser(value)
        except ValueError as exc:
            errors.append(f"line {lineno}: malformed value for '{key}': {exc}")
    if errors:
        raise ConfigError(errors)
    spec = SweepSpec(**values, extra_config="\n".join(extra))
    problems = spec.validate()
    if problems:
        raise ConfigError(problems)
    return spec


def with_overrides(spec: SweepSpec, **changes) -> SweepSpec:
    return replace(spec, **{k: v for k, v in changes.items() if v is not None})
