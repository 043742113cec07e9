"""Scenario description: maps, WLAN placement, config files and validation.

Config files are line oriented ``key = value`` with ``#`` comments. Global
keys set the map, traffic, SR and Table-2 PHY/MAC parameters; ``wlan.<k>.*``
keys pin an explicit deployment (otherwise one is drawn from ``seed``).
"""
from __future__ import annotations

import dataclasses
import enum
import math
import string
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .channel import ChannelModelParams
from .phy import PhyMacConstants
from .spatial_reuse import (CCA_CS_DEFAULT, OBSS_PD_MAX, OBSS_PD_MIN, SrConfig, max_tx_power,
                            obss_pd_upper_bound)
from .traffic import DEFAULT_QUEUE_CAPACITY

TX_POWER_RANGE = (1.0, 20.0)
TX_PWR_REF_CHOICES = (21.0, 25.0)
TOPOLOGY_STREAM = 0
BACKOFF_STREAM = 1
TRAFFIC_STREAM = 2


class Role(enum.Enum):
    AP = "AP"
    STA = "STA"


@dataclass(frozen=True)
class MapSpec:
    width_m: float
    height_m: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.width_m / 2.0, self.height_m / 2.0)


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    role: Role
    position: tuple[float, float]
    tx_power_dbm: float = 20.0
    cca_cs_dbm: float = CCA_CS_DEFAULT
    sr: SrConfig = field(default_factory=SrConfig)


@dataclass(frozen=True)
class WlanSpec:
    wlan_id: str
    ap: NodeSpec
    stas: tuple[NodeSpec, ...]
    bss_color: int
    srg_id: int | None = None
    traffic_load_bps: float | None = None    # None: use the config-wide load

    @property
    def nodes(self) -> tuple[NodeSpec, ...]:
        return (self.ap,) + self.stas


@dataclass(frozen=True)
class DeploymentSpec:
    map: MapSpec
    wlans: tuple[WlanSpec, ...]
    channel: int = 36
    seed: int = 0

    @property
    def nodes(self) -> list[NodeSpec]:
        return [n for w in self.wlans for n in w.nodes]


@dataclass(frozen=True)
class SimulationConfig:
    deployment: DeploymentSpec
    traffic_load_bps: float = 20e6
    sim_time_s: float = 10.0
    phy: PhyMacConstants = field(default_factory=PhyMacConstants)
    channel: ChannelModelParams = field(default_factory=ChannelModelParams)
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for one stream (topology, or a node's backoff/traffic) of a master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *stream]))


def wlan_name(index: int) -> str:
    return string.ascii_uppercase[index] if index < 26 else f"W{index}"


def _sr_for(color: int, srg: int | None, tx_pwr_ref: float = 21.0, cca: float = CCA_CS_DEFAULT) -> SrConfig:
    return SrConfig(enabled=False, bss_color=color, srg_id=srg, tx_pwr_ref_dbm=tx_pwr_ref, cca_cs_dbm=cca)


def build_wlan(index: int, ap_pos, sta_positions, *, bss_color: int | None = None, srg_id: int | None = None,
               tx_power_dbm: float = 20.0, cca_cs_dbm: float = CCA_CS_DEFAULT, tx_pwr_ref_dbm: float = 21.0,
               traffic_load_bps: float | None = None) -> WlanSpec:
    name = wlan_name(index)
    color = index + 1 if bss_color is None else bss_color
    sr = _sr_for(color, srg_id, tx_pwr_ref_dbm, cca_cs_dbm)
    ap = NodeSpec(f"AP_{name}", Role.AP, (float(ap_pos[0]), float(ap_pos[1])), tx_power_dbm, cca_cs_dbm, sr)
    stas = tuple(
        NodeSpec(f"STA_{name}{m + 1}", Role.STA, (float(p[0]), float(p[1])), tx_power_dbm, cca_cs_dbm, sr)
        for m, p in enumerate(sta_positions)
    )
    return WlanSpec(name, ap, stas, color, srg_id, traffic_load_bps)


def generate_deployment(map: MapSpec, n_wlans: int = 10, stas_per_wlan: int = 1,
                        sta_distance_range: tuple[float, float] = (1.0, 10.0), seed: int = 0, *,
                        tx_power_dbm: float = 20.0, cca_cs_dbm: float = CCA_CS_DEFAULT,
                        tx_pwr_ref_dbm: float = 21.0, channel: int = 36) -> DeploymentSpec:
    """Random deployment with WLAN_A's AP at the map centre and the other APs uniform in the map.

    Each STA sits at a uniform angle and uniform radius in ``sta_distance_range`` around
    its AP, clipped to the map. A pure function of its arguments.
    """
    if not (map.width_m > 0 and map.height_m > 0):
        raise ValueError("map must have positive area")
    dmin, dmax = sta_distance_range
    if dmin > dmax or dmin < 0:
        raise ValueError(f"invalid STA distance range {sta_distance_range}")
    if n_wlans < 1 or stas_per_wlan < 1:
        raise ValueError("need at least one WLAN and one STA per WLAN")
    rng = rng_for(seed, TOPOLOGY_STREAM)
    w, h = map.width_m, map.height_m
    aps = np.empty((n_wlans, 2))
    aps[0] = map.center
    if n_wlans > 1:
        aps[1:, 0] = rng.uniform(0.0, w, n_wlans - 1)
        aps[1:, 1] = rng.uniform(0.0, h, n_wlans - 1)
    wlans = []
    for k in range(n_wlans):
        theta = rng.uniform(0.0, 2.0 * math.pi, stas_per_wlan)
        radius = rng.uniform(dmin, dmax, stas_per_wlan)
        sx = np.clip(aps[k, 0] + radius * np.cos(theta), 0.0, w)
        sy = np.clip(aps[k, 1] + radius * np.sin(theta), 0.0, h)
        wlans.append(build_wlan(k, aps[k], list(zip(sx, sy)), tx_power_dbm=tx_power_dbm,
                                cca_cs_dbm=cca_cs_dbm, tx_pwr_ref_dbm=tx_pwr_ref_dbm))
    return DeploymentSpec(map, tuple(wlans), channel, seed)


def _replace_sr(wlan: WlanSpec, **changes) -> WlanSpec:
    def upd(node: NodeSpec) -> NodeSpec:
        return replace(node, sr=replace(node.sr, **changes))
    return replace(wlan, ap=upd(wlan.ap), stas=tuple(upd(s) for s in wlan.stas))


def with_spatial_reuse(dep: DeploymentSpec, obss_pd_nonsrg_dbm: float, obss_pd_srg_dbm: float | None = None,
                       wlans: tuple[int, ...] | None = (0,), enabled: bool = True) -> DeploymentSpec:
    """Copy of ``dep`` with SR switched on (with the given thresholds) for the chosen WLAN indices.

    ``wlans=None`` applies to every WLAN.
    """
    if obss_pd_srg_dbm is None:
        obss_pd_srg_dbm = obss_pd_nonsrg_dbm
    chosen = range(len(dep.wlans)) if wlans is None else wlans
    new = list(dep.wlans)
    for k in chosen:
        new[k] = _replace_sr(new[k], enabled=enabled, obss_pd_nonsrg_dbm=obss_pd_nonsrg_dbm,
                             obss_pd_srg_dbm=obss_pd_srg_dbm)
    return replace(dep, wlans=tuple(new))


# --- config file -------------------------------------------------------------------------

def _as_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_int(text: str) -> int:
    return int(text.strip(), 10)


def _as_point(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(",", " ").split()]
    if len(parts) != 2:
        raise ValueError(f"expected 'x, y', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _as_opt_int(text: str) -> int | None:
    return None if text.strip().lower() in ("none", "") else _as_int(text)


def _rng(lo=None, hi=None, strict_lo=False):
    def check(v):
        if lo is not None and (v <= lo if strict_lo else v < lo):
            return f"must be {'>' if strict_lo else '>='} {lo}"
        if hi is not None and v > hi:
            return f"must be <= {hi}"
        return None
    return check


def _choices(*opts):
    def check(v):
        return None if v in opts else f"must be one of {opts}"
    return check


_POS = _rng(0, strict_lo=True)
_NONNEG = _rng(0)
_OBSS = _rng(OBSS_PD_MIN, OBSS_PD_MAX)

# key -> (parser, range check, default)
GLOBAL_KEYS: dict[str, tuple[Callable[[str], Any], Callable | None, Any]] = {
    "map_width_m": (float, _POS, 50.0),
    "map_height_m": (float, _POS, 50.0),
    "n_wlans": (_as_int, _rng(1), 10),
    "stas_per_wlan": (_as_int, _rng(1), 1),
    "sta_distance_min_m": (float, _NONNEG, 1.0),
    "sta_distance_max_m": (float, _NONNEG, 10.0),
    "seed": (_as_int, _NONNEG, 0),
    "channel": (_as_int, _NONNEG, 36),
    "traffic_load_mbps": (float, _POS, 20.0),
    "sim_time_s": (float, _POS, 10.0),
    "queue_capacity": (_as_int, _rng(1), DEFAULT_QUEUE_CAPACITY),
    "sr_enabled": (_as_bool, None, True),
    "sr_all": (_as_bool, None, False),
    "obss_pd_nonsrg_dbm": (float, _OBSS, OBSS_PD_MIN),
    "obss_pd_srg_dbm": (float, _OBSS, OBSS_PD_MIN),
    "tx_pwr_ref_dbm": (float, _choices(*TX_PWR_REF_CHOICES), 21.0),
    "tx_power_dbm": (float, _rng(*TX_POWER_RANGE), 20.0),
    "cca_cs_dbm": (float, _rng(OBSS_PD_MIN - 18, OBSS_PD_MAX), CCA_CS_DEFAULT),
    "central_frequency_ghz": (float, _POS, 5.0),
    # channel model
    "path_loss_intercept_db": (float, None, 54.120),
    "path_loss_exponent": (float, _POS, 2.06067),
    "wall_attenuation_db": (float, _NONNEG, 5.25),
    "walls_per_m": (float, _NONNEG, 0.1467),
    "noise_dbm": (float, None, -95.0),
    "gain_tx_db": (float, None, 0.0),
    "gain_rx_db": (float, None, 0.0),
    "min_distance_m": (float, _POS, 0.1),
    "ce_db": (float, None, 10.0),
    # PHY / MAC
    "sigma_leg_us": (float, _POS, 4.0),
    "sigma_32_us": (float, _POS, 16.0),
    "n_sc": (_as_int, _rng(1), 234),
    "n_ss": (_as_int, _rng(1), 1),
    "slot_us": (float, _POS, 9.0),
    "sifs_us": (float, _POS, 16.0),
    "difs_us": (float, _POS, 34.0),
    "pifs_us": (float, _POS, 25.0),
    "phy_leg_us": (float, _POS, 20.0),
    "he_su_us": (float, _POS, 100.0),
    "ack_us": (float, _POS, 28.0),
    "back_us": (float, _POS, 32.0),
    "legacy_symbol_bits": (_as_int, _rng(1), 24),
    "packet_bits": (_as_int, _rng(1), 12000),
    "n_agg": (_as_int, _rng(1), 64),
    "rts_bits": (_as_int, _rng(1), 160),
    "cts_bits": (_as_int, _rng(1), 112),
    "service_bits": (_as_int, _rng(1), 16),
    "mac_header_bits": (_as_int, _rng(1), 320),
    "cw": (_as_int, _NONNEG, 15),
}

WLAN_KEYS: dict[str, tuple[Callable[[str], Any], Callable | None]] = {
    "ap": (_as_point, None),
    "bss_color": (_as_int, _NONNEG),
    "srg_id": (_as_opt_int, None),
    "sr_enabled": (_as_bool, None),
    "obss_pd_nonsrg_dbm": (float, _OBSS),
    "obss_pd_srg_dbm": (float, _OBSS),
    "tx_power_dbm": (float, _rng(*TX_POWER_RANGE)),
    "traffic_load_mbps": (float, _POS),
}

_PHY_FIELDS = {f.name for f in dataclasses.fields(PhyMacConstants)}
_CHANNEL_KEYS = {
    "path_loss_intercept_db": "L0", "path_loss_exponent": "gamma", "wall_attenuation_db": "k",
    "walls_per_m": "W_bar", "noise_dbm": "noise_dbm", "gain_tx_db": "G_tx", "gain_rx_db": "G_rx",
    "min_distance_m": "min_distance_m",
}


def _parse_lines(text: str) -> tuple[dict[str, Any], dict[int, dict[str, Any]], list[str]]:
    settings: dict[str, Any] = {}
    wlans: dict[int, dict[str, Any]] = {}
    errors: list[str] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            errors.append(f"line {lineno}: duplicate key '{key}' (first set on line {seen[key]})")
            continue
        seen[key] = lineno
        try:
            if key.startswith("wlan."):
                parts = key.split(".")
                idx = _as_int(parts[1]) if len(parts) >= 3 else None
                if idx is None or idx < 0:
                    raise KeyError(key)
                entry = wlans.setdefault(idx, {"stas": {}})
                if len(parts) == 4 and parts[2] == "sta":
                    entry["stas"][_as_int(parts[3])] = _as_point(value)
                    continue
                if len(parts) != 3 or parts[2] not in WLAN_KEYS:
                    raise KeyError(key)
                parser, check = WLAN_KEYS[parts[2]]
                val = parser(value)
                entry[parts[2]] = val
            else:
                if key not in GLOBAL_KEYS:
                    raise KeyError(key)
                parser, check, _ = GLOBAL_KEYS[key]
                val = parser(value)
                settings[key] = val
        except KeyError:
            errors.append(f"line {lineno}: unknown key '{key}'")
            continue
        except ValueError as exc:
            errors.append(f"line {lineno}: malformed value for '{key}': {exc}")
            continue
        problem = check(val) if check is not None and val is not None else None
        if problem:
            errors.append(f"line {lineno}: value {value!r} out of range for '{key}': {problem}")
    return settings, wlans, errors


def parse_config(text: str) -> SimulationConfig:
    """Parse a config file body; absent keys take Table-2 defaults.

    Raises :class:`ConfigError` listing every problem with its line number.
    """
    settings, wlan_entries, errors = _parse_lines(text)
    if errors:
        raise ConfigError(errors)
    s = {k: v[2] for k, v in GLOBAL_KEYS.items()}
    s.update(settings)

    phy = PhyMacConstants(**{k: s[k] for k in _PHY_FIELDS})
    channel = ChannelModelParams(**{attr: s[key] for key, attr in _CHANNEL_KEYS.items()})
    map_spec = MapSpec(s["map_width_m"], s["map_height_m"])

    if wlan_entries:
        dep = _explicit_deployment(map_spec, wlan_entries, s, errors)
        if errors:
            raise ConfigError(errors)
    else:
        try:
            dep = generate_deployment(map_spec, s["n_wlans"], s["stas_per_wlan"],
                                      (s["sta_distance_min_m"], s["sta_distance_max_m"]), s["seed"],
                                      tx_power_dbm=s["tx_power_dbm"], cca_cs_dbm=s["cca_cs_dbm"],
                                      tx_pwr_ref_dbm=s["tx_pwr_ref_dbm"], channel=s["channel"])
        except ValueError as exc:
            raise ConfigError([str(exc)]) from None

    if s["sr_enabled"]:
        dep = with_spatial_reuse(dep, s["obss_pd_nonsrg_dbm"], s["obss_pd_srg_dbm"],
                                 wlans=None if s["sr_all"] else (0,))
    dep = _apply_wlan_sr_overrides(dep, wlan_entries)

    cfg = SimulationConfig(dep, s["traffic_load_mbps"] * 1e6, s["sim_time_s"], phy, channel, s["queue_capacity"])
    violations = validate_config(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


def _explicit_deployment(map_spec: MapSpec, entries: dict, s: dict, errors: list[str]) -> DeploymentSpec:
    wlans = []
    for k in range(len(entries)):
        if k not in entries:
            errors.append(f"wlan indices must be contiguous from 0; missing wlan.{k}")
            return DeploymentSpec(map_spec, (), s["channel"], s["seed"])
        e = entries[k]
        if "ap" not in e:
            errors.append(f"wlan.{k} has no 'ap' position")
            continue
        if not e["stas"]:
            errors.append(f"wlan.{k} has no STA (need at least one wlan.{k}.sta.<m>)")
            continue
        stas = [e["stas"][m] for m in sorted(e["stas"])]
        load = e.get("traffic_load_mbps")
        wlans.append(build_wlan(k, e["ap"], stas, bss_color=e.get("bss_color"), srg_id=e.get("srg_id"),
                                tx_power_dbm=e.get("tx_power_dbm", s["tx_power_dbm"]),
                                cca_cs_dbm=s["cca_cs_dbm"], tx_pwr_ref_dbm=s["tx_pwr_ref_dbm"],
                                traffic_load_bps=None if load is None else load * 1e6))
    return DeploymentSpec(map_spec, tuple(wlans), s["channel"], s["seed"])


def _apply_wlan_sr_overrides(dep: DeploymentSpec, entries: dict) -> DeploymentSpec:
    new = list(dep.wlans)
    for k, e in entries.items():
        changes = {}
        if "sr_enabled" in e:
            changes["enabled"] = e["sr_enabled"]
        for key in ("obss_pd_nonsrg_dbm", "obss_pd_srg_dbm"):
            if key in e:
                changes[key] = e[key]
        if changes and k < len(new):
            new[k] = _replace_sr(new[k], **changes)
    return replace(dep, wlans=tuple(new))


def load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_config(cfg: SimulationConfig, *, include_defaults: bool = False) -> str:
    """Render ``cfg`` as a config file with an explicit deployment; ``parse_config`` round-trips it."""
    dep = cfg.deployment
    lines = [
        "# spatial-reuse simulator scenario",
        f"map_width_m = {_fmt(float(dep.map.width_m))}",
        f"map_height_m = {_fmt(float(dep.map.height_m))}",
        f"seed = {dep.seed}",
        f"channel = {dep.channel}",
        f"traffic_load_mbps = {_fmt(cfg.traffic_load_bps / 1e6)}",
        f"sim_time_s = {_fmt(float(cfg.sim_time_s))}",
        f"queue_capacity = {cfg.queue_capacity}",
        "sr_enabled = false",      # SR is pinned per WLAN below
    ]
    if dep.wlans:
        ref = dep.wlans[0].ap
        lines += [f"tx_pwr_ref_dbm = {_fmt(float(ref.sr.tx_pwr_ref_dbm))}",
                  f"cca_cs_dbm = {_fmt(float(ref.cca_cs_dbm))}"]
    phy0, ch0 = PhyMacConstants(), ChannelModelParams()
    for name in sorted(_PHY_FIELDS):
        if include_defaults or getattr(cfg.phy, name) != getattr(phy0, name):
            lines.append(f"{name} = {_fmt(getattr(cfg.phy, name))}")
    for key, attr in _CHANNEL_KEYS.items():
        if include_defaults or getattr(cfg.channel, attr) != getattr(ch0, attr):
            lines.append(f"{key} = {_fmt(getattr(cfg.channel, attr))}")
    for k, w in enumerate(dep.wlans):
        lines.append("")
        lines.append(f"# WLAN_{w.wlan_id}")
        lines.append(f"wlan.{k}.ap = {_fmt(w.ap.position[0])}, {_fmt(w.ap.position[1])}")
        for m, sta in enumerate(w.stas):
            lines.append(f"wlan.{k}.sta.{m} = {_fmt(sta.position[0])}, {_fmt(sta.position[1])}")
        lines.append(f"wlan.{k}.bss_color = {w.bss_color}")
        if w.srg_id is not None:
            lines.append(f"wlan.{k}.srg_id = {w.srg_id}")
        lines.append(f"wlan.{k}.tx_power_dbm = {_fmt(float(w.ap.tx_power_dbm))}")
        if w.traffic_load_bps is not None:
            lines.append(f"wlan.{k}.traffic_load_mbps = {_fmt(w.traffic_load_bps / 1e6)}")
        sr = w.ap.sr
        lines.append(f"wlan.{k}.sr_enabled = {_fmt(sr.enabled)}")
        if sr.enabled:
            lines.append(f"wlan.{k}.obss_pd_nonsrg_dbm = {_fmt(float(sr.obss_pd_nonsrg_dbm))}")
            lines.append(f"wlan.{k}.obss_pd_srg_dbm = {_fmt(float(sr.obss_pd_srg_dbm))}")
    return "\n".join(lines) + "\n"


# --- validation --------------------------------------------------------------------------

def validate_config(cfg: SimulationConfig) -> list[str]:
    """Every violated invariant, as a human-readable message. Empty list means valid."""
    v: list[str] = []
    dep = cfg.deployment
    m = dep.map
    if not m.width_m > 0 or not m.height_m > 0:
        v.append(f"map must have positive size, got {m.width_m} x {m.height_m}")
    if not cfg.sim_time_s > 0:
        v.append(f"sim_time_s must be > 0, got {cfg.sim_time_s}")
    if not cfg.traffic_load_bps > 0:
        v.append(f"traffic load must be > 0, got {cfg.traffic_load_bps}")
    if cfg.queue_capacity < 1:
        v.append("queue_capacity must be >= 1")
    for f in dataclasses.fields(cfg.phy):
        val = getattr(cfg.phy, f.name)
        if f.name == "cw":
            if val < 0:
                v.append(f"cw must be >= 0, got {val}")
        elif not val > 0:
            v.append(f"PHY/MAC constant {f.name} must be > 0, got {val}")
    if not dep.wlans:
        v.append("deployment has no WLANs")

    colors: dict[int, str] = {}
    for w in dep.wlans:
        if w.bss_color in colors:
            v.append(f"duplicate bss_color {w.bss_color} in WLAN_{colors[w.bss_color]} and WLAN_{w.wlan_id}")
        else:
            colors[w.bss_color] = w.wlan_id
        if w.ap.role is not Role.AP:
            v.append(f"WLAN_{w.wlan_id}: {w.ap.node_id} is not an AP")
        if not w.stas:
            v.append(f"WLAN_{w.wlan_id} has no STA")
        if w.traffic_load_bps is not None and not w.traffic_load_bps > 0:
            v.append(f"WLAN_{w.wlan_id}: traffic load must be > 0")
        for n in w.nodes:
            if n is not w.ap and n.role is not Role.STA:
                v.append(f"WLAN_{w.wlan_id}: {n.node_id} must be a STA")
            if n.sr.bss_color != w.bss_color or n.sr.srg_id != w.srg_id:
                v.append(f"{n.node_id} does not share WLAN_{w.wlan_id}'s bss_color/srg_id")
            if n.sr != w.ap.sr:
                v.append(f"{n.node_id} SR configuration differs from its AP's")
            x, y = n.position
            if not (0.0 <= x <= m.width_m and 0.0 <= y <= m.height_m):
                v.append(f"{n.node_id} at ({x:g}, {y:g}) is outside the {m.width_m:g} x {m.height_m:g} map")
            lo, hi = TX_POWER_RANGE
            if not lo <= n.tx_power_dbm <= hi:
                v.append(f"{n.node_id}: tx_power_dbm {n.tx_power_dbm} outside [{lo:g}, {hi:g}]")
            sr = n.sr
            if sr.tx_pwr_ref_dbm not in TX_PWR_REF_CHOICES:
                v.append(f"{n.node_id}: tx_pwr_ref_dbm must be 21 or 25, got {sr.tx_pwr_ref_dbm}")
            for name in ("obss_pd_nonsrg_dbm", "obss_pd_srg_dbm"):
                pd = getattr(sr, name)
                if not OBSS_PD_MIN <= pd <= OBSS_PD_MAX:
                    v.append(f"{n.node_id}: {name} {pd} outside [{OBSS_PD_MIN:g}, {OBSS_PD_MAX:g}]")
                elif sr.enabled:
                    # the power used on an opportunity must keep the threshold within its bound
                    sr_power = max_tx_power(pd, sr.tx_pwr_ref_dbm, n.tx_power_dbm)
                    if pd > obss_pd_upper_bound(sr_power, sr.tx_pwr_ref_dbm):
                        v.append(f"{n.node_id}: {name} {pd} exceeds the bound for SR tx power {sr_power}")
                    if pd < n.cca_cs_dbm:
                        v.append(f"{n.node_id}: {name} {pd} below its CCA/CS {n.cca_cs_dbm}")
    return v
