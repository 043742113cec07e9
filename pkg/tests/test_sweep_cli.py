import csv
import io
import subprocess
import sys

import pytest

from srsim.cli import main
from srsim.scenario import ConfigError, parse_config
from srsim.simulation import run_simulation
from srsim.sweep import (CSV_COLUMNS, SweepSpec, _float_list, best_csv, best_rows, cell_config_text,
                         parse_sweep, result_rows, results_csv, run_cell, run_sweep)

SMALL = SweepSpec(maps_m=(25.0, 50.0), n_deployments=2, obss_pd_dbm=(-82.0, -72.0, -62.0),
                  loads_mbps=(5.0, 40.0), sim_time_s=0.1, n_wlans=4)


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_default_grid_size():
    assert len(SweepSpec().cells()) == 3 * 50 * 21 * 16 == 50_400


def test_reduced_grid_size():
    spec = SweepSpec(n_deployments=10, loads_mbps=_float_list("1,12.5,50,75,100"))
    assert len(spec.cells()) == 3 * 10 * 21 * 5 == 3150


def test_seed_is_base_xor_index():
    spec = SweepSpec(maps_m=(25.0,), n_deployments=4, obss_pd_dbm=(-82.0,), loads_mbps=(1.0,), base_seed=6)
    assert [c.deployment_seed for c in spec.cells()] == [6 ^ d for d in range(4)]


def test_float_list_forms():
    assert _float_list("-82:-62:1") == tuple(float(x) for x in range(-82, -61))
    assert _float_list("1, 12.5,50") == (1.0, 12.5, 50.0)
    for bad in ("", "1:2", "1:2:0", "a,b"):
        with pytest.raises(ValueError):
            _float_list(bad)


def test_spec_validation():
    assert SweepSpec().validate() == []
    v = SweepSpec(obss_pd_dbm=(-90.0,), loads_mbps=(), n_deployments=0).validate()
    assert len(v) == 3


def test_parse_sweep():
    spec = parse_sweep("maps_m = 25\nn_deployments = 3\nobss_pd_dbm = -82:-80:1\ncw = 7\n")
    assert spec.maps_m == (25.0,) and spec.n_deployments == 3 and spec.obss_pd_dbm == (-82.0, -81.0, -80.0)
    assert "cw = 7" in cell_config_text(spec, spec.cells()[0])
    assert parse_config(cell_config_text(spec, spec.cells()[0])).phy.cw == 7
    with pytest.raises(ConfigError) as exc:
        parse_sweep("n_deployments = x\nloads_mbps = 1\nloads_mbps = 2")
    assert any("line 1" in e for e in exc.value.errors) and any("line 3: duplicate" in e for e in exc.value.errors)
    with pytest.raises(ConfigError):
        parse_sweep("obss_pd_dbm = -90")


def test_cell_config_is_rerunnable():
    cell = SMALL.cells()[5]
    cfg = parse_config(cell_config_text(SMALL, cell))
    a = cfg.deployment.wlans[0].ap.sr
    assert a.enabled and a.obss_pd_nonsrg_dbm == cell.obss_pd_dbm == a.obss_pd_srg_dbm
    assert not cfg.deployment.wlans[1].ap.sr.enabled
    assert cfg.deployment.seed == cell.deployment_seed
    via_cell = result_rows(run_cell(SMALL, cell))
    direct = run_simulation(cfg)
    assert [r["throughput_mbps"] for r in via_cell] == [f"{w.throughput_bps / 1e6:.6f}" for w in direct.wlans]


def test_same_deployment_across_pd_and_load():
    cells = SMALL.cells()
    deps = {}
    for c in cells:
        dep = parse_config(cell_config_text(SMALL, c)).deployment
        pos = tuple(n.position for w in dep.wlans for n in w.nodes)
        deps.setdefault((c.map_m, c.deployment_seed), set()).add(pos)
    assert all(len(v) == 1 for v in deps.values())


@pytest.fixture(scope="module")
def small_results():
    return run_sweep(SMALL, workers=1)


def test_sweep_rows_and_columns(small_results):
    rows = read_csv(results_csv(small_results))
    assert len(rows) == len(SMALL.cells()) * SMALL.n_wlans
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert all(r["status"] == "ok" for r in rows)
    assert sum(r["is_wlan_a"] == "1" for r in rows) == len(SMALL.cells())


def test_sweep_independent_of_workers(small_results):
    ref = results_csv(small_results)
    assert results_csv(run_sweep(SMALL, workers=1)) == ref
    assert results_csv(run_sweep(SMALL, workers=3)) == ref


def test_best_rows(small_results):
    best = best_rows(small_results, SMALL.obss_pd_dbm)
    assert len(best) == 2 * 2 * 2
    for b in best:
        assert b.status == "ok"
        assert b.throughput_bps >= b.legacy_throughput_bps
    rows = read_csv(best_csv(best))
    assert len(rows) == len(best)
    # an incomplete group is flagged, never silently ranked
    partial = best_rows(small_results[:-1], SMALL.obss_pd_dbm)
    assert sum(b.status == "incomplete" for b in partial) == 1


def test_failed_cell_status():
    spec = SweepSpec(maps_m=(25.0,), n_deployments=1, obss_pd_dbm=(-82.0,), loads_mbps=(1.0,),
                     sim_time_s=0.05, extra_config="cw = -1")
    res = run_sweep(spec, workers=1)
    assert res[0].status.startswith("config_error") and res[0].result is None
    row = read_csv(results_csv(res))[0]
    assert row["status"].startswith("config_error") and row["throughput_mbps"] == "nan"


# --- CLI -----------------------------------------------------------------------------------

def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a.cfg", tmp_path / "b.cfg"
    assert main(["generate", "--map", "25", "--n-wlans", "10", "--seed", "7", "-o", str(a)]) == 0
    assert main(["generate", "--map", "25", "--n-wlans", "10", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(parse_config(a.read_text()).deployment.wlans) == 10


def test_generate_bad_map(capsys):
    assert main(["generate", "--map", "0"]) == 1
    assert "--map" in capsys.readouterr().err


def test_run_generated_config(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    main(["generate", "--map", "25", "--n-wlans", "3", "--seed", "2", "--sim-time", "0.2", "-o", str(cfg)])
    trace = tmp_path / "t.log"
    out = tmp_path / "r.csv"
    assert main(["run", str(cfg), "--trace", str(trace), "--csv", str(out), "-q"]) == 0
    rows = read_csv(out.read_text())
    assert [r["wlan_id"] for r in rows] == ["A", "B", "C"]
    lines = trace.read_text().splitlines()
    assert lines and all(len(line.split()) == 5 for line in lines)


def test_run_stdout_csv(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("n_wlans = 2\nmap_width_m = 25\nmap_height_m = 25\nsim_time_s = 0.1\n")
    assert main(["run", str(cfg), "-q"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 2 and rows[0]["is_wlan_a"] == "1"


def test_run_config_error_names_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed = 1\ncw = -1\n")
    assert main(["run", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "cw" in err and "line 2" in err


def test_run_missing_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 1


def test_run_abort_exit_code(tmp_path, monkeypatch, capsys):
    from srsim import cli
    from srsim.engine import SimulationError

    def boom(*a, **k):
        raise SimulationError("inconsistent state", ["0.000 AP_A IDLE X IDLE"])
    monkeypatch.setattr(cli, "run_simulation", boom)
    cfg = tmp_path / "s.cfg"
    cfg.write_text("sim_time_s = 0.1\n")
    assert main(["run", str(cfg)]) == 2
    assert "aborted" in capsys.readouterr().err


def test_sweep_cli(tmp_path):
    sweep = tmp_path / "grid.sweep"
    sweep.write_text("maps_m = 25\nn_deployments = 2\nobss_pd_dbm = -82,-70\nloads_mbps = 10\n"
                     "sim_time_s = 0.1\nn_wlans = 3\n")
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(["sweep", str(sweep), "--out", str(out1), "--workers", "1", "-q"]) == 0
    assert main(["sweep", str(sweep), "--out", str(out2), "--workers", "2", "-q"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(read_csv(out1.read_text())) == 2 * 2 * 3
    best = read_csv((tmp_path / "best.csv").read_text())
    assert len(best) == 2 and all(b["status"] == "ok" for b in best)


def test_sweep_cli_flags_override(tmp_path):
    out = tmp_path / "r.csv"
    args = ["sweep", "--maps", "25", "--n-deployments", "1", "--obss-pd=-82:-81:1", "--loads", "5",
            "--sim-time", "0.05", "--out", str(out), "--best", str(tmp_path / "b.csv"), "-q"]
    assert main(args) == 0
    rows = read_csv(out.read_text())
    assert {r["obss_pd_dbm"] for r in rows} == {"-82", "-81"}
    assert len(rows) == 2 * 10


def test_sweep_cli_errors(tmp_path):
    assert main(["sweep", "--obss-pd=-90", "--out", str(tmp_path / "r.csv")]) == 1
    assert main(["sweep", "--loads", "x", "--obss-pd=-82", "--out", str(tmp_path / "r.csv")]) == 1
    bad = tmp_path / "g.sweep"
    bad.write_text("maps_m = 25\nbogus = 1\n")
    assert main(["sweep", str(bad), "--out", str(tmp_path / "r.csv")]) == 1
    assert main(["sweep", "--n-deployments", "0"]) == 1


def test_module_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "srsim", "generate", "--map", "25", "--seed", "1"],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "map_width_m = 25" in p.stdout
    p = subprocess.run([sys.executable, "-m", "srsim", "generate", "--map", "0"], capture_output=True, text=True)
    assert p.returncode == 1
