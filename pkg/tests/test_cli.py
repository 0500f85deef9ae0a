import json
import math
import subprocess
import sys

import pytest

from graphforge.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_measure_middle_of_chain(capsys):
    code, out, _ = run(capsys, "graph", "measure", "--kind", "chain", "--n", 3,
                       "--vertex", 1, "--basis", "Z", "--outcome", 1)
    assert code == 0 and json.loads(out)["graph"]["edges"] == []


def test_lc_orbit_of_chain_contains_triangle(capsys):
    code, out, _ = run(capsys, "graph", "lc-orbit", "--kind", "chain", "--n", 3)
    res = json.loads(out)
    assert code == 0
    assert [[0, 1], [0, 2], [1, 2]] in [m["edges"] for m in res["members"]]
    assert res["class_size"] == len(res["members"])


def test_minimal_after_y_measurements(capsys):
    code, out, _ = run(capsys, "graph", "minimal", "--kind", "chain", "--n", 4, "--measure", "Y@2,Y@3")
    assert code == 0 and json.loads(out)["n"] == 2


def test_bad_inputs_exit_2(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", {"protocol": "cabrillo", "theta": 0.5, "T": 1})
    assert run(capsys, "protocol", cfg, "--trials", 0)[0] == 2
    bad = write(tmp_path, "bad.json", "{not json")
    code, _, err = run(capsys, "protocol", bad)
    assert code == 2 and "line 1" in err
    assert run(capsys, "graph", "measure", "--kind", "chain", "--n", 3)[0] == 2
    assert run(capsys, "graph", "build", "--edges", "0-x")[0] == 2
    assert run(capsys, "protocol", write(tmp_path, "u.json", {"protocol": "warp"}))[0] == 2


def test_protocol_run(capsys, tmp_path):
    cfg = write(tmp_path, "c.json", {"protocol": "cabrillo", "theta": math.pi / 4, "T": 1.0})
    code, out, _ = run(capsys, "protocol", cfg, "--trials", 20000, "--seed", 4)
    res = json.loads(out)
    assert code == 0 and res["manifest"]["seed"] == 4 and res["manifest"]["trials"] == 20000


def test_percolation_sweep_rows_and_bytes(capsys, tmp_path):
    cfg = write(tmp_path, "p.json", {"strategy": "percolation", "L": 16, "p_min": 0.4, "p_max": 0.6, "p_step": 0.02})
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "grow", cfg, "--trials", 200, "--seed", 1, "--format", "csv")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    lines = outs[0].strip().splitlines()
    assert lines[0] == "p,spanning_probability,stderr" and len(lines) == 12


def test_grow_strategies(capsys, tmp_path):
    for cfg in ({"strategy": "chain", "p": 0.5, "target": 8},
                {"strategy": "cross", "p": 0.5, "n": 3},
                {"strategy": "microcluster", "p": 0.5, "star_size": 6, "n": 3},
                {"strategy": "percolation", "L": 8, "p": 0.7, "block": 4, "overlap": 2}):
        code, out, _ = run(capsys, "grow", write(tmp_path, "g.json", cfg), "--trials", 50)
        assert code == 0 and "status_counts" in json.loads(out)


def test_mbqc_reports_unit_fidelity(capsys, tmp_path):
    one = write(tmp_path, "j.json", {"wires": 1, "gates": [{"J": 0.7, "wire": 0}]})
    code, out, _ = run(capsys, "mbqc", one, "--input", "random", "--trials", 20)
    assert code == 0 and json.loads(out)["min_fidelity"] == pytest.approx(1)
    two = write(tmp_path, "e.json", {"pattern": "entangling", "mode": "Z"})
    code, out, _ = run(capsys, "mbqc", two, "--trials", 20)
    assert code == 0 and json.loads(out)["deterministic"]


def test_seed_from_environment(capsys, tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.json", {"protocol": "duan_kimble", "T": 0.5})
    monkeypatch.setenv("GRAPHFORGE_SEED", "99")
    _, out, _ = run(capsys, "protocol", cfg, "--trials", 100, "--seed", 1)
    assert json.loads(out)["manifest"]["seed"] == 99


def test_stab_random(capsys):
    code, out, _ = run(capsys, "stab", "--random", 20, 500, 20, "--seed", 3)
    assert code == 0 and json.loads(out)["invariants_hold"]


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "graphforge", "graph", "build", "--kind", "complete", "--n", "3"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and len(json.loads(r.stdout)["graph"]["edges"]) == 3
