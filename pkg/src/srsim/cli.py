"""``srsim`` command line: run | sweep | generate."""
from __future__ import annotations

import argparse
import contextlib
import os
import sys
import time

from . import __version__
from .engine import SimulationError
from .scenario import (ConfigError, MapSpec, SimulationConfig, format_config, generate_deployment, load_config,
                       parse_config)
from .simulation import run_simulation
from .sweep import (CellResult, Cell, SweepSpec, _float_list, best_csv, best_rows, cell_config_text,
                    parse_sweep, result_rows, results_csv, run_sweep, with_overrides, write_csv)

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2


def _err(msg: str) -> None:
    print(f"srsim: {msg}", file=sys.stderr)


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        _err(f"cannot read {args.config}: {exc.strerror}")
        return EXIT_CONFIG
    except ConfigError as exc:
        for e in exc.errors:
            _err(f"{args.config}: {e}")
        return EXIT_CONFIG
    if args.sim_time is not None:
        cfg = SimulationConfig(cfg.deployment, cfg.traffic_load_bps, args.sim_time, cfg.phy, cfg.channel,
                               cfg.queue_capacity)
    dep = cfg.deployment
    sr_a = dep.wlans[0].ap.sr
    pd = sr_a.obss_pd_nonsrg_dbm if sr_a.enabled else -82.0
    fingerprint = {"map_m": dep.map.width_m, "deployment_seed": dep.seed, "obss_pd_dbm": pd,
                   "load_mbps": cfg.traffic_load_bps / 1e6}
    with contextlib.ExitStack() as stack:
        trace = stack.enter_context(open(args.trace, "w", encoding="utf-8")) if args.trace else None
        try:
            res = run_simulation(cfg, trace=trace, fingerprint=fingerprint)
        except SimulationError as exc:
            _err(f"simulation aborted: {exc}")
            return EXIT_ABORT
    cell = Cell(float(dep.map.width_m), dep.seed, float(pd), cfg.traffic_load_bps / 1e6)
    with _open_out(args.csv) as fh:
        write_csv(fh, result_rows(CellResult(cell, res)))
    if not args.quiet:
        print(f"srsim: {len(res.wlans)} WLANs, {res.events} events, {res.runtime_s:.2f} s wall", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec()
    if args.sweep_file:
        try:
            with open(args.sweep_file, encoding="utf-8") as fh:
                spec = parse_sweep(fh.read())
        except OSError as exc:
            _err(f"cannot read {args.sweep_file}: {exc.strerror}")
            return EXIT_CONFIG
        except ConfigError as exc:
            for e in exc.errors:
                _err(f"{args.sweep_file}: {e}")
            return EXIT_CONFIG
    try:
        spec = with_overrides(
            spec,
            maps_m=_float_list(args.maps) if args.maps else None,
            n_deployments=args.n_deployments,
            obss_pd_dbm=_float_list(args.obss_pd) if args.obss_pd else None,
            loads_mbps=_float_list(args.loads) if args.loads else None,
            base_seed=args.base_seed,
            workers=args.workers,
            sim_time_s=args.sim_time,
            sr_all=True if args.sr_all else None,
        )
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    problems = spec.validate()
    if problems:
        for p in problems:
            _err(p)
        return EXIT_CONFIG
    # fail fast on a cell template that does not parse
    try:
        parse_config(cell_config_text(spec, spec.cells()[0]))
    except ConfigError as exc:
        for e in exc.errors:
            _err(f"cell config: {e}")
        return EXIT_CONFIG

    n_cells = len(spec.cells())
    if not args.quiet:
        print(f"srsim: {n_cells} cells", file=sys.stderr)
    t0 = time.perf_counter()

    def progress(done, total):
        if not args.quiet and (done == total or done % max(1, total // 20) == 0):
            print(f"srsim: {done}/{total} cells, {time.perf_counter() - t0:.0f} s", file=sys.stderr)

    results = run_sweep(spec, workers=args.workers, progress=progress)
    out = args.out
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_csv(results))
    best_path = args.best or os.path.join(os.path.dirname(os.path.abspath(out)), "best.csv")
    with open(best_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(best_csv(best_rows(results, spec.obss_pd_dbm)))
    failed = [r for r in results if r.status != "ok"]
    for r in failed:
        _err(f"cell {r.cell.key}: {r.status}")
    return EXIT_ABORT if failed else EXIT_OK


def cmd_generate(args) -> int:
    if not (args.map > 0):
        _err(f"--map must be > 0, got {args.map:g}")
        return EXIT_CONFIG
    height = args.map_height if args.map_height is not None else args.map
    if not height > 0:
        _err(f"--map-height must be > 0, got {height:g}")
        return EXIT_CONFIG
    try:
        dep = generate_deployment(MapSpec(args.map, height), args.n_wlans, args.stas_per_wlan,
                                  (args.sta_min, args.sta_max), args.seed)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    cfg = SimulationConfig(dep, args.load * 1e6, args.sim_time)
    with _open_out(args.output) as fh:
        fh.write(format_config(cfg))
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="srsim", description="802.11ax OBSS/PD spatial reuse simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario config")
    r.add_argument("config")
    r.add_argument("--trace", metavar="FILE", help="write the MAC state-transition trace")
    r.add_argument("--csv", metavar="FILE", default="-", help="per-WLAN CSV rows (default stdout)")
    r.add_argument("--sim-time", type=float, help="override sim_time_s")
    r.add_argument("-q", "--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a scenario grid")
    s.add_argument("sweep_file", nargs="?", help="sweep file (key = value lines); flags override it")
    s.add_argument("--out", default="results.csv")
    s.add_argument("--best", help="best-OBSS/PD table (default: best.csv next to --out)")
    s.add_argument("--maps", help="map side lengths in m, e.g. 25,50,100")
    s.add_argument("--n-deployments", type=_positive_int)
    s.add_argument("--obss-pd", help="OBSS/PD grid in dBm, list or start:stop:step")
    s.add_argument("--loads", help="loads in Mbps, list or start:stop:step")
    s.add_argument("--base-seed", type=int)
    s.add_argument("--workers", type=_positive_int, help="worker processes (default $SRSIM_WORKERS or CPU count)")
    s.add_argument("--sim-time", type=float)
    s.add_argument("--sr-all", action="store_true", help="apply the OBSS/PD to every WLAN, not only WLAN_A")
    s.add_argument("-q", "--quiet", action="store_true")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("generate", help="write a random deployment as a config file")
    g.add_argument("--map", type=float, required=True, help="map side length in m")
    g.add_argument("--map-height", type=float)
    g.add_argument("--n-wlans", type=_positive_int, default=10)
    g.add_argument("--stas-per-wlan", type=_positive_int, default=1)
    g.add_argument("--sta-min", type=float, default=1.0)
    g.add_argument("--sta-max", type=float, default=10.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--load", type=float, default=20.0, help="traffic load per AP in Mbps")
    g.add_argument("--sim-time", type=float, default=10.0)
    g.add_argument("-o", "--output", default="-")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; usage problems are config errors here
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
