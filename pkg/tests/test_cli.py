import json
import subprocess
import sys
from pathlib import Path

import pytest

from swarmgear.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MINIMAL = "name: mini\nsim: {duration: 2.0}\nleader: {path: line}\n"


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "mini.yaml"
    p.write_text(MINIMAL)
    return p


def files(d):
    return sorted(str(p.relative_to(d)) for p in Path(d).rglob("*") if p.is_file())


def test_run_writes_two_files_with_provenance(cfg, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    assert files(out) == ["metrics.json", "trajectory.csv"]
    first = (out / "trajectory.csv").read_text().splitlines()[0]
    assert first.startswith("# config_sha256=")
    assert json.loads((out / "metrics.json").read_text())["_provenance"] == first[2:]


def test_run_is_byte_identical(cfg, tmp_path):
    for d in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / d), "--quiet"]) == 0
    for name in ("trajectory.csv", "metrics.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_flag_changes_hash(cfg, tmp_path):
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet"])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet", "--seed", "5"])
    ha = (tmp_path / "a" / "trajectory.csv").read_text().splitlines()[0]
    hb = (tmp_path / "b" / "trajectory.csv").read_text().splitlines()[0]
    assert ha != hb and "seed=5" in hb


@pytest.mark.parametrize("text", ["sim: {dt: [\n", "sim: {bogus: 1}\n", "sim: {dt: -1}\n"])
def test_malformed_config_exit_2_no_outputs(tmp_path, text, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text(text)
    out = tmp_path / "out"
    assert main(["run", "--config", str(p), "--out", str(out)]) == 2
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


def test_unknown_override_lists_valid_keys(cfg, tmp_path, capsys):
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--set", "impedance.Q=1"]) == 2
    assert "impedance.K_v" in capsys.readouterr().err


def test_output_cannot_escape_out_dir(cfg, tmp_path):
    out = tmp_path / "o"
    rc = main(["run", "--config", str(cfg), "--out", str(out),
               "--set", "output.trajectory=../escape.csv"])
    assert rc == 2 and not (tmp_path / "escape.csv").exists()


def test_divergence_exit_4(cfg, tmp_path, monkeypatch):
    import swarmgear.cli as cli
    from swarmgear.controllers import SimulationDiverged

    def boom(*a, **k):
        raise SimulationDiverged("state blew up", 12, "f1")

    monkeypatch.setattr(cli, "run_simulation", boom)
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 4
    assert not out.exists()


def test_validate_config(cfg, capsys):
    assert main(["validate-config", "--config", str(cfg)]) == 0
    assert "ok config_sha256=" in capsys.readouterr().out
    assert main(["validate-config", "--config", str(cfg), "--set", "impedance.D=1"]) == 2


def test_compare_four_variants(cfg, tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["compare", "--config", str(cfg), "--variants", "star,ring,tree,apf",
                 "--out", str(out)]) == 0
    doc = json.loads((out / "comparison.json").read_text())
    assert list(doc["scenarios"]) == ["star", "ring", "tree", "apf"]
    table = (out / "comparison.txt").read_text().splitlines()
    assert table[0].startswith("# config_sha256=")
    assert sum(l.split(" ")[0] in doc["scenarios"] for l in table) == 8  # two tables


def test_compare_identical_scenarios_identical_rows(cfg, tmp_path):
    out = tmp_path / "c"
    assert main(["compare", "--config", str(cfg), "--config", str(cfg), "--out", str(out),
                 "--quiet"]) == 0
    rows = json.loads((out / "comparison.json").read_text())["scenarios"]
    assert rows["mini"] == rows["mini#2"]


def test_compare_needs_two(cfg, tmp_path):
    assert main(["compare", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 2
    assert main(["compare", "--config", str(cfg), "--variants", "star",
                 "--out", str(tmp_path / "c")]) == 2


def test_compare_rejects_different_paths(cfg, tmp_path):
    other = tmp_path / "sq.yaml"
    other.write_text("sim: {duration: 2.0}\nleader: {path: line, speed: 0.1}\n")
    assert main(["compare", "--config", str(cfg), "--config", str(other),
                 "--out", str(tmp_path / "c")]) == 2
    assert not (tmp_path / "c").exists()


def test_compare_unknown_variant(cfg, tmp_path):
    assert main(["compare", "--config", str(cfg), "--variants", "star,mesh",
                 "--out", str(tmp_path / "c")]) == 2


@pytest.mark.parametrize("jobs", ["1", "2"])
def test_sweep_writes_per_scenario_outputs(cfg, tmp_path, jobs):
    out = tmp_path / "s"
    assert main(["sweep", "--config", str(cfg), "--vary", "impedance.K_v=5,10",
                 "--vary", "controller.topology=star,ring", "--jobs", jobs,
                 "--out", str(out), "--quiet"]) == 0
    names = files(out)
    assert "sweep.json" in names and "scenario_003/trajectory.csv" in names
    assert len(json.loads((out / "sweep.json").read_text())["scenarios"]) == 4


def test_sweep_needs_vary(cfg, tmp_path):
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 2
    assert main(["sweep", "--config", str(cfg), "--vary", "impedance.K_v",
                 "--out", str(tmp_path / "s")]) == 2


def test_gait_trace_type1_closed_curve(tmp_path):
    out = tmp_path / "g"
    assert main(["gait-trace", "--config", str(CONFIGS / "type1_gait.yaml"),
                 "--out", str(out), "--quiet"]) == 0
    assert files(out) == ["feet_world.csv", "foot_path.csv", "gait_schedule.csv"]
    rows = (out / "foot_path.csv").read_text().splitlines()
    assert rows[0].startswith("# config_sha256=")
    first, last = rows[2].split(",")[1:], rows[-1].split(",")[1:]
    assert first == last


def test_gait_trace_type2_tick_spacing(cfg, tmp_path):
    out = tmp_path / "g"
    assert main(["gait-trace", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    lines = (out / "gait_schedule.csv").read_text().splitlines()[2:]
    times = sorted({float(l.split(",")[0]) for l in lines})
    assert all(abs((b - a) - 0.025) < 1e-9 for a, b in zip(times, times[1:]))


def test_gait_trace_infeasible_step_exit_3(cfg, tmp_path, capsys):
    rc = main(["gait-trace", "--config", str(cfg), "--set", "gait.type=type1",
               "--set", "gait.step_length=0.36", "--out", str(tmp_path / "g")])
    assert rc == 3
    assert "violated: step_length <= 2*x0" in capsys.readouterr().err
    assert not (tmp_path / "g").exists()


def test_analyze_round_trip_and_bad_log(cfg, tmp_path):
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "r"), "--quiet"])
    assert main(["analyze", "--log", str(tmp_path / "r" / "trajectory.csv"),
                 "--out", str(tmp_path / "a"), "--quiet"]) == 0
    a = json.loads((tmp_path / "a" / "metrics.json").read_text())
    r = json.loads((tmp_path / "r" / "metrics.json").read_text())
    assert a["overall"]["rmse"] == pytest.approx(r["overall"]["rmse"], abs=1e-9)
    bad = tmp_path / "bad.csv"
    bad.write_text("")
    assert main(["analyze", "--log", str(bad), "--out", str(tmp_path / "b")]) == 2


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == 2


def test_module_entry_point(cfg, tmp_path):
    res = subprocess.run([sys.executable, "-m", "swarmgear", "validate-config", "--config",
                          str(cfg)], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("ok")


@pytest.mark.parametrize("name", ["square_star.yaml", "line_gait.yaml", "type1_gait.yaml",
                                  "disturbed.yaml"])
def test_shipped_configs_validate(name):
    assert main(["validate-config", "--quiet", "--config", str(CONFIGS / name)]) == 0
