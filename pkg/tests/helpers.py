"""Topology builders and instrumentation shared by the test modules."""
import io

from srsim.scenario import DeploymentSpec, MapSpec, SimulationConfig, build_wlan
from srsim.simulation import Simulation


def deployment(width, height, wlans, seed=0):
    """``wlans``: list of (ap_xy, [sta_xy, ...]) or (ap_xy, [sta_xy...], load_mbps)."""
    specs = []
    for k, w in enumerate(wlans):
        load = w[2] * 1e6 if len(w) > 2 else None
        specs.append(build_wlan(k, w[0], w[1], traffic_load_bps=load))
    return DeploymentSpec(MapSpec(width, height), tuple(specs), 36, seed)


def config(dep, load_mbps=20.0, sim_time_s=1.0, **kw):
    return SimulationConfig(dep, load_mbps * 1e6, sim_time_s, **kw)


class FrameLog:
    """Wraps ``Simulation.start_frame`` to keep every frame and the medium view at its start."""

    def __init__(self, sim):
        self.sim = sim
        self.frames = []
        self.starts = []          # (frame, busy_count copy, nav_end copy, active copy before start)
        orig = sim.start_frame

        def start_frame(i, kind, dst, power, dur, **kw):
            before = (sim.busy_count.copy(), sim.nav_end.copy(), sim.active.copy(),
                      [sim.frames[j] for j in range(len(sim.frames))])
            f = orig(i, kind, dst, power, dur, **kw)
            self.frames.append(f)
            self.starts.append((f, before))
            return f
        sim.start_frame = start_frame


def traced_run(cfg, **kw):
    buf = io.StringIO()
    sim = Simulation(cfg, trace=buf, **kw)
    log = FrameLog(sim)
    res = sim.run()
    return res, buf.getvalue(), log


def pair_deployment(ap_gap_m, sta_offset_m=1.0, loads=None, map_w=60.0, map_h=10.0, seed=0):
    """Two AP-STA pairs on a line, STAs on the outside, APs ``ap_gap_m`` apart."""
    y = map_h / 2
    xa = (map_w - ap_gap_m) / 2
    xb = xa + ap_gap_m
    wl = [((xa, y), [(xa - sta_offset_m, y)]), ((xb, y), [(xb + sta_offset_m, y)])]
    if loads:
        wl = [w + (l,) for w, l in zip(wl, loads)]
    return deployment(map_w, map_h, wl, seed)
