import hashlib
from pathlib import Path

import pytest

from uavnet import sim as sim_module
from uavnet.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, cmd_plot, main
from uavnet.model import SimConfig
from uavnet.sim import INIT_PHASES, TICK_PHASES, Simulation, SimulationError, run

SMALL = SimConfig(num_users_N=40, ticks=6, grid_step=40.0)


def digest(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(directory.iterdir())}


def test_phase_order():
    calls = []
    sim = Simulation(SMALL, trace=calls.append)
    assert tuple(calls) == INIT_PHASES
    sim.run(3)
    assert tuple(calls[3:]) == TICK_PHASES * 3


def test_run_writes_artifacts(tmp_path):
    report = run(SMALL, tmp_path, pgm=True)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted(
        ["drops.csv", "tree.csv", "snr_initial.csv", "snr_final.csv", "snr_initial.pgm", "snr_final.pgm"]
    )
    assert sorted(Path(p).name for p, _ in report.manifest) == names
    assert all(size == (tmp_path / Path(p).name).stat().st_size for p, size in report.manifest)
    drops = (tmp_path / "drops.csv").read_text().splitlines()
    assert drops[0] == "tick,offered,served,dropped_access,dropped_relay,avg_dropped_per_uav,active_uavs"
    assert len(drops) == 1 + SMALL.ticks
    tree = (tmp_path / "tree.csv").read_text().splitlines()
    assert tree[0] == "tick,uav,parent,path_cost"
    rows0 = [r.split(",") for r in tree[1:] if r.startswith("0,")]
    assert [int(r[1]) for r in rows0] == sorted(int(r[1]) for r in rows0)
    assert len(report.metrics) == SMALL.ticks
    assert {r["role"] for r in report.roster} <= {"serving", "root", "suspended"}


def test_zero_ticks(tmp_path):
    report = run(SMALL.replace(ticks=0), tmp_path)
    assert (tmp_path / "drops.csv").read_text().count("\n") == 1
    assert (tmp_path / "tree.csv").read_text().count("\n") == 1
    assert (tmp_path / "snr_initial.csv").read_bytes() == (tmp_path / "snr_final.csv").read_bytes()
    assert report.metrics == []


def test_pgm_matches_plot_command(tmp_path):
    run(SMALL.replace(ticks=1), tmp_path, pgm=True)
    out = tmp_path / "again.pgm"
    cmd_plot(tmp_path / "snr_final.csv", out)
    assert out.read_bytes() == (tmp_path / "snr_final.pgm").read_bytes()
    cmd_plot(tmp_path / "snr_final.csv", out)  # idempotent
    assert out.read_bytes() == (tmp_path / "snr_final.pgm").read_bytes()


def test_errors_carry_tick(monkeypatch):
    sim = Simulation(SMALL)
    sim.run(2)
    monkeypatch.setattr(sim_module, "build_graph", lambda *a: (_ for _ in ()).throw(RuntimeError("boom")))
    with pytest.raises(SimulationError, match="tick 2: boom") as info:
        sim.step()
    assert info.value.tick == 2


def test_single_user_run():
    sim = Simulation(SimConfig(num_users_N=1, ticks=3))
    sim.run()
    assert len(sim.state.serving()) == 1
    assert sim.users[0].serving_uav == sim.state.serving()[0].id


def test_cli_simulate_and_determinism(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("num_users_N = 30\nticks = 4\ngrid_step = 60\n")
    args = ["simulate", "--config", str(cfg), "--seed", "11"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == EXIT_OK
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    assert main(["simulate", "--config", str(cfg), "--seed", "12", "--out-dir", str(tmp_path / "c")]) == EXIT_OK
    assert digest(tmp_path / "c") != digest(tmp_path / "a")
    assert "drops.csv" in capsys.readouterr().out


def test_cli_overrides(tmp_path):
    assert main(["simulate", "--ticks", "2", "--grid-step", "120", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "drops.csv").read_text().count("\n") == 3
    assert (tmp_path / "snr_final.csv").read_text().count("\n") == 1 + 5 * 5


def test_cli_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("edge_weight_alpha = 1.5\n")
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "edge_weight_alpha out of [0,1]" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG


def test_cli_runtime_error(tmp_path, capsys):
    assert main(["simulate", "--max-uavs", "2", "--out-dir", str(tmp_path)]) == EXIT_RUNTIME
    assert "max_uavs exceeded" in capsys.readouterr().err


def test_cli_plot(tmp_path):
    grid = tmp_path / "g.csv"
    grid.write_text("x,y,snr_db\n-1,-1,15\n0,-1,15\n1,-1,15\n-1,0,15\n0,0,15\n1,0,15\n-1,1,15\n0,1,15\n1,1,15\n")
    out = tmp_path / "g.pgm"
    assert main(["plot", "--in", str(grid), "--out", str(out)]) == EXIT_OK
    assert out.read_bytes() == b"P5\n3 3\n255\n" + bytes([128] * 9)
    grid.write_text("x,y,snr_db\n0,0\n")
    assert main(["plot", "--in", str(grid), "--out", str(out)]) == EXIT_RUNTIME


def test_cli_kill_root(tmp_path):
    assert main(["simulate", "--ticks", "10", "--kill-root-at", "5", "--grid-step", "120", "--out-dir", str(tmp_path)]) == 0
    roots = {}
    for line in (tmp_path / "tree.csv").read_text().splitlines()[1:]:
        tick, uav, parent, _ = line.split(",")
        if uav == parent:
            roots[int(tick)] = int(uav)
    assert roots[7] == 0 and roots[8] != 0
