"""Compare the numba and numpy medium kernels, alone and inside a full run.

    python benchmarks/bench_kernels.py [--nodes 20] [--calls 20000] [--sim-time 2]
"""
import argparse
import time

import numpy as np

from srsim import _kernels_numpy
from srsim.scenario import MapSpec, SimulationConfig, generate_deployment
from srsim.simulation import run_simulation

try:
    from srsim import _kernels_numba
except ImportError:
    _kernels_numba = None


def make_state(n, rng):
    pos = rng.uniform(0, 50, (n, 2))
    d = np.maximum(np.hypot(*(pos[:, None, :] - pos[None, :, :]).transpose(2, 0, 1)), 0.1)
    gain = -(54.12 + 20.6067 * np.log10(d) + 5.25 * 0.1467 * d)
    np.fill_diagonal(gain, -np.inf)
    thresh = np.full((n, n), -82.0)
    np.fill_diagonal(thresh, np.inf)
    return dict(
        gain=gain, thresh=thresh, cca=np.full(n, -82.0), sr_opp=np.zeros((n, n), np.bool_),
        rx_dbm=np.full((n, n), -np.inf), rx_mw=np.zeros((n, n)), trig=np.zeros((n, n), np.bool_),
        busy_count=np.zeros(n, np.int64), active=np.zeros(n, np.bool_), dest=np.zeros(n, np.int64),
        min_sinr=np.full(n, np.inf), ap_mask=np.arange(n) % 2 == 0, nav_end=np.zeros(n, np.int64),
    )


def drive(k, n, calls, seed=1):
    """Start/end frames in a rolling window of at most four concurrent transmitters."""
    rng = np.random.default_rng(seed)
    s = make_state(n, rng)
    aps = np.arange(0, n, 2)
    on_air = []
    t0 = time.perf_counter()
    for c in range(calls):
        if len(on_air) >= 4 or (on_air and c % 2):
            i = on_air.pop(0)
            k.frame_end(i, i + 1, s["trig"], s["busy_count"], s["active"], s["ap_mask"], s["nav_end"], c + 100,
                        s["rx_dbm"], s["min_sinr"])
        else:
            i = int(rng.choice([a for a in aps if not s["active"][a]]))
            k.frame_start(i, i + 1, 20.0, s["gain"], s["thresh"], s["cca"], s["sr_opp"], s["rx_dbm"], s["rx_mw"],
                          s["trig"], s["busy_count"], s["active"], s["dest"], s["min_sinr"], 10 ** -9.5)
            on_air.append(i)
    return time.perf_counter() - t0, s


def full_run(use_numba, sim_time):
    cfg = SimulationConfig(generate_deployment(MapSpec(50, 50), seed=0), 20e6, sim_time)
    run_simulation(SimulationConfig(cfg.deployment, 20e6, 0.05), use_numba=use_numba)     # warm-up / JIT
    t0 = time.perf_counter()
    res = run_simulation(cfg, use_numba=use_numba)
    return time.perf_counter() - t0, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=20)
    ap.add_argument("--calls", type=int, default=20000)
    ap.add_argument("--sim-time", type=float, default=2.0)
    args = ap.parse_args()

    backends = [("numpy", _kernels_numpy, False)]
    if _kernels_numba is not None:
        drive(_kernels_numba, args.nodes, 10)      # compile outside the timing
        backends.insert(0, ("numba", _kernels_numba, True))
    else:
        print("numba not installed; numpy only")

    states = {}
    print(f"kernels: {args.calls} calls, {args.nodes} nodes")
    for name, k, _ in backends:
        dt, states[name] = drive(k, args.nodes, args.calls)
        print(f"  {name:6s} {dt:8.3f} s  {dt / args.calls * 1e6:7.2f} us/call")
    if len(states) == 2:
        a, b = states["numba"], states["numpy"]
        same = all(np.array_equal(a[key], b[key]) for key in ("trig", "busy_count", "active", "nav_end"))
        print(f"  states agree: {same and np.allclose(a['min_sinr'], b['min_sinr'])}")

    print(f"full run: 10 WLANs, 50x50 m, 20 Mbps, {args.sim_time:g} s simulated")
    for name, _, use in backends:
        dt, res = full_run(use, args.sim_time)
        print(f"  {name:6s} {dt:8.3f} s  {res.events} events  {dt / res.events * 1e6:6.1f} us/event")


if __name__ == "__main__":
    main()
