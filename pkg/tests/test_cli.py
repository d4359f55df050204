import json
import subprocess
import sys

import pytest

from crtool.cli import run


def write_cfg(tmp_path, doc, name="job.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


F_R = {"system": {"kind": "map", "name": "f_R"},
       "space": {"kind": "circle", "circumference": 2, "n": 120}, "p": "1"}


@pytest.fixture
def job(tmp_path):
    return write_cfg(tmp_path, F_R)


def test_potential_csv(tmp_path, job):
    out = tmp_path / "prof.csv"
    assert run(["potential", "--config", job, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("node_index,x0,tau_pos")
    assert len(lines) == 121


def test_potential_json_and_rho(tmp_path, job):
    js, rho = tmp_path / "p.json", tmp_path / "c.rho"
    assert run(["potential", "--config", job, "--out", str(js), "--out", str(rho)]) == 0
    assert len(json.loads(js.read_text())["tau_pos"]) == 120
    assert rho.stat().st_size == 120 * 120 * 8
    assert json.loads((tmp_path / "c.rho.json").read_text())["n"] == 120


def test_morse_dot_deterministic(tmp_path, job):
    a, b = tmp_path / "a.dot", tmp_path / "b.dot"
    for path in (a, b):
        assert run(["morse", "--config", job, "--epsilon", "+0.1", "--nu", "0", "--dot", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("digraph")


def test_morse_json_limit_variant(tmp_path):
    cfg = write_cfg(tmp_path, {"system": {"kind": "example_non_increasing", "params": {"N": 5}}, "p": "inf"})
    out = tmp_path / "g.json"
    assert run(["morse", "--config", cfg, "--epsilon=+0", "--variant", "G'", "--json", str(out)]) == 0
    assert len(json.loads(out.read_text())["edges"]) == 1


def test_collapse_report(tmp_path, job, capsys):
    out = tmp_path / "col.json"
    assert run(["collapse", "--config", job, "--levels", "+0,+0.05,+0.1,+0.2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    steps = doc["steps"]
    assert len(steps) == 3
    assert all(s["well_defined"] and s["edge_partial"] for s in steps)


def test_components(tmp_path, job):
    out = tmp_path / "c.json"
    assert run(["components", "--config", job, "--levels=-0,+0,+0.1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [l["level"] for l in doc["levels"]] == ["-0", "+0", "+0.1"]


def test_diagram_outputs(tmp_path, job):
    svg, csv = tmp_path / "d.svg", tmp_path / "d.csv"
    assert run(["diagram", "--config", job, "--svg", str(svg), "--csv", str(csv)]) == 0
    assert svg.read_text().rstrip().endswith("</svg>")
    assert csv.read_text().splitlines()[0].startswith("level_branch")


def test_sweep(tmp_path):
    cfg = write_cfg(tmp_path, {"system": {"kind": "map", "name": "translation"},
                               "space": {"kind": "interval", "bounds": [0, 10], "n": 41}, "p": "inf"})
    out = tmp_path / "s.json"
    assert run(["sweep", "--config", cfg, "--parameter", "R", "--values=-1,-0.5,0", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [m["circulation_cost"] for m in doc["members"]] == [1, 0.5, 0]


def test_examples_lists_registry(capsys):
    assert run(["examples"]) == 0
    text = capsys.readouterr().out
    for name in ("f_R", "g_half", "circle_stagnation", "counterexample_A"):
        assert name in text


def test_verify_small(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"system": {"kind": "map", "name": "f_R"},
                               "space": {"kind": "circle", "circumference": 2, "n": 40}})
    assert run(["verify", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out


def test_exit_codes(tmp_path):
    assert run([]) == 1
    assert run(["potential"]) == 1
    # an unreadable config counts as an invalid config
    assert run(["potential", "--config", str(tmp_path / "missing.json")]) == 2
    bad = write_cfg(tmp_path, dict(F_R, p="0"), "bad.json")
    assert run(["potential", "--config", bad]) == 2
    big = write_cfg(tmp_path, dict(F_R, caps={"max_nodes": 10}), "big.json")
    assert run(["potential", "--config", big]) == 3


def test_same_config_same_bytes(tmp_path, job):
    outs = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        run(["potential", "--config", job, "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_console_script_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "crtool", "examples"], capture_output=True, text=True)
    assert r.returncode == 0
