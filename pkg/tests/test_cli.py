import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from periodic_homog import cli
from periodic_homog.config import load_config
from periodic_homog.exceptions import ProjectionNotConverged

LAMINATE = {
    "integrand": {
        "constraint": {"shape": "ball", "radius": 1.0},
        "coefficient": {"kind": "laminate", "values": [1.0, 2.0]},
        "kernel": {"variant": "quadratic"},
    },
    "solver": {"restarts": 1},
    "density": {"xi": [0.0, 0.5, 1.5], "truncations": []},
    "cell": {"xi": [0.5], "n_max": 2, "resolution": 8, "oracle": True},
    "sweep": {"F": 0.5, "ladder": [0.5, 0.25], "resolution": 16},
}

BARRIER = {
    "integrand": {
        "constraint": {"shape": "ball"},
        "coefficient": {"kind": "laminate", "values": [1.0, 2.0]},
        "kernel": {"variant": "barrier", "g": {"variant": "quadratic"}},
    },
    "solver": {"restarts": 1},
    "density": {"xi": [0.0, 0.9, 1.0, 2.0], "truncations": [1, 2]},
    "envelope": {"xi": [0.5], "resolution": 8, "radial": {"directions": [1.0, -1.0]}},
}

HYPER = {
    "solver": {"restarts": 1},
    "hyper": {"d": 2, "radii": [0.5], "n_angles": 2, "n_directions": 2, "n_max": 1, "resolution": 2},
}


def write(tmp_path, data, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def run(cfg_path, command, out, *extra):
    return cli.main([command, "--config", str(cfg_path), "--out", str(out), *extra])


@pytest.mark.parametrize("data,command,files", [
    (LAMINATE, "density", ["density.csv"]),
    (LAMINATE, "cell", ["cell.csv"]),
    (LAMINATE, "sweep", ["sweep.csv"]),
    (BARRIER, "density", ["density.csv"]),
    (BARRIER, "envelope", ["envelope.csv", "envelope_radial.csv", "envelope_radial_summary.csv"]),
    (HYPER, "hyper", ["hyper.csv", "hyper_blowup.csv", "hyper_certification.csv"]),
])
def test_reruns_are_byte_identical(tmp_path, data, command, files):
    cfg = write(tmp_path, data)
    assert run(cfg, command, tmp_path / "a", "--threads", "1") == 0
    assert run(cfg, command, tmp_path / "b", "--threads", "3") == 0
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_layout_and_infinity_literal(tmp_path):
    cfg = write(tmp_path, BARRIER)
    assert run(cfg, "density", tmp_path / "o") == 0
    lines = (tmp_path / "o" / "density.csv").read_text().splitlines()
    head = lines[0]
    assert head.startswith("# config_hash=" + load_config(cfg).config_hash())
    assert "seed=0" in head and "command=density" in head
    assert lines[1] == "xi_0,gauge,W,W_1,W_2"
    assert lines[-1].split(",")[2] == "+inf"
    assert lines[-2].split(",")[2] == "+inf"


def test_json_lines_format(tmp_path):
    cfg = write(tmp_path, LAMINATE)
    assert run(cfg, "density", tmp_path / "o", "--format", "json-lines") == 0
    lines = (tmp_path / "o" / "density.jsonl").read_text().splitlines()
    assert "provenance" in json.loads(lines[0])
    assert json.loads(lines[-1])["W"] == "+inf"


def test_seed_override_changes_hash(tmp_path):
    cfg = write(tmp_path, LAMINATE)
    assert load_config(cfg).config_hash() != load_config(cfg, seed=5).config_hash()


@pytest.mark.parametrize("mutate", [
    lambda d: d | {"unknown": 1},
    lambda d: d | {"solver": {"restarts": -1}},
    lambda d: d | {"integrand": {**d["integrand"], "kernel": {"variant": "cubic"}}},
])
def test_invalid_config_exits_1(tmp_path, mutate, capsys):
    cfg = write(tmp_path, mutate(dict(LAMINATE)))
    assert run(cfg, "density", tmp_path / "o") == 1
    assert "config error" in capsys.readouterr().err


def test_malformed_yaml_and_missing_section(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("integrand: [unclosed\n")
    assert run(bad, "density", tmp_path / "o") == 1
    assert run(write(tmp_path, LAMINATE), "hyper", tmp_path / "o") == 1
    assert run(tmp_path / "absent.yaml", "density", tmp_path / "o") == 1


def test_truncation_requests_respect_certified_schedule(tmp_path):
    data = dict(LAMINATE) | {"density": {"xi": [0.1], "truncations": [1]}}
    cfg = write(tmp_path, data)
    assert run(cfg, "density", tmp_path / "o") == 0  # bounded kernel: columns omitted with a note
    head = (tmp_path / "o" / "density.csv").read_text().splitlines()[1]
    assert head == "xi_0,gauge,W"
    # a weak barrier only certifies a thinned, finite schedule
    weak = {**BARRIER["integrand"], "kernel": {"variant": "barrier", "cbar": 0.01}}
    too_many = dict(BARRIER) | {"integrand": weak, "density": {"xi": [0.1], "truncations": [11]}}
    assert run(write(tmp_path, too_many), "density", tmp_path / "p") == 1


def test_infeasible_gradient_exits_2(tmp_path):
    data = dict(LAMINATE) | {"cell": {"xi": [1.0], "n_max": 1, "resolution": 4}}
    assert run(write(tmp_path, data), "cell", tmp_path / "o") == 2
    assert not (tmp_path / "o").exists()


def test_solver_failure_exits_3_without_partial_output(tmp_path, monkeypatch):
    def broken(cfg, out, threads, base_dir):
        out.table("partial", [{"a": 1}])
        raise ProjectionNotConverged("no progress")

    monkeypatch.setitem(cli.COMMANDS, "density", broken)
    assert run(write(tmp_path, LAMINATE), "density", tmp_path / "o") == 3
    assert not (tmp_path / "o" / "partial.csv").exists()


def test_report_checks_hashes(tmp_path):
    a = write(tmp_path, LAMINATE, "a.yaml")
    assert run(a, "density", tmp_path / "one") == 0
    assert run(a, "cell", tmp_path / "one") == 0
    assert cli.main(["report", str(tmp_path / "one"), "--out", str(tmp_path / "rep")]) == 0
    rows = (tmp_path / "rep" / "report.csv").read_text().splitlines()
    assert len(rows) == 4
    assert run(a, "density", tmp_path / "two", "--seed", "9") == 0
    mixed = [str(tmp_path / "one" / "cell.csv"), str(tmp_path / "two" / "density.csv")]
    assert cli.main(["report", *mixed, "--out", str(tmp_path / "rep2")]) == 1
    assert not (tmp_path / "rep2").exists()


def test_fmt_literals():
    assert cli.fmt(float("inf")) == "+inf"
    assert cli.fmt(float("-inf")) == "-inf"
    assert cli.fmt(True) == "true"
    assert cli.fmt(None) == ""
    assert cli.fmt(0.1) == "0.1"


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, LAMINATE)
    proc = subprocess.run([sys.executable, "-m", "periodic_homog", "density", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert Path(proc.stdout.strip()).name == "density.csv"


def test_shipped_configs_validate():
    root = Path(__file__).resolve().parents[1] / "configs"
    paths = sorted(root.glob("*.yaml"))
    assert paths
    for p in paths:
        load_config(p)
