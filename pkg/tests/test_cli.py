import hashlib
import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from hamperm.cli import atomic_write, dispatch
from hamperm.graph import parse_graph
from hamperm.tour import format_tour, parse_tour
from hamperm.verify import verify

WORKED = str(FIXTURES / "worked25.txt")
CHAINS = str(FIXTURES / "chains25.txt")


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_gen_and_verify(tmp_path, capsys):
    g, t = tmp_path / "g.txt", tmp_path / "g.tour"
    assert dispatch(["gen", "--family", "planted", "--n", "30", "--extra", "30", "--seed", "4",
                     "--out", str(g), "--tour-out", str(t)]) == 0
    graph = parse_graph(g.read_text())
    assert graph.n == 30 and graph.m == 60
    assert dispatch(["verify", "--graph", str(g), "--tour", str(t)]) == 0


def test_auto_seed_is_reported(tmp_path, capsys):
    out = tmp_path / "g.txt"
    man = tmp_path / "m.json"
    assert dispatch(["gen", "--family", "gnm", "--n", "10", "--m", "15", "--out", str(out), "--manifest", str(man)]) == 0
    seed = int(capsys.readouterr().err.split("seed:")[1].split()[0])
    manifest = json.loads(man.read_text())
    assert manifest["seed"] == seed and manifest["argv"][-2:] == ["--seed", str(seed)]


def test_exit_codes(tmp_path, capsys):
    assert dispatch(["solve", "--in", WORKED, "--seed", "1"]) == 0
    assert verify(parse_graph((FIXTURES / "worked25.txt").read_text()), parse_tour(capsys.readouterr().out).order)
    star = tmp_path / "star.txt"
    star.write_text("4 3 U\n1 2\n1 3\n1 4\n")
    assert dispatch(["solve", "--in", str(star), "--seed", "1"]) == 1
    assert "vertex 2 has degree 1" in capsys.readouterr().err
    with pytest.raises(SystemExit) as bad_flag:
        dispatch(["solve", "--in", WORKED, "--bogus"])
    assert bad_flag.value.code == 1
    assert dispatch(["solve", "--algorithm", "d", "--in", WORKED, "--seed", "1"]) == 1
    assert dispatch(["verify", "--graph", WORKED, "--tour", str(tmp_path / "missing")]) == 1


def test_budget_exhaustion_exit_two(tmp_path, capsys):
    g = tmp_path / "g.txt"
    dispatch(["gen", "--family", "planted", "--n", "80", "--extra", "80", "--seed", "2", "--out", str(g)])
    capsys.readouterr()
    assert dispatch(["solve", "--in", str(g), "--seed", "0", "--budget-mult", "0.001"]) == 2
    diag = json.loads(capsys.readouterr().err)
    assert diag["schema"] == "hamperm.diagnostics/1" and diag["outcome"] == "budget_exhausted"


def test_trace_schema(tmp_path, capsys):
    trace = tmp_path / "trace.json"
    assert dispatch(["solve", "--in", WORKED, "--seed", "1", "--trace", str(trace)]) == 0
    doc = json.loads(trace.read_text())
    assert doc["schema"] == "hamperm.trace/1" and doc["seed"] == 1
    assert set(doc["events"][1]) == {"iter", "move", "score", "pseudo", "backtracked", "phase"}


def test_verify_known_circuits(capsys):
    assert dispatch(["verify", "--graph", CHAINS, "--tour", str(FIXTURES / "chains25_circuit.txt")]) == 0
    assert dispatch(["verify", "--graph", WORKED, "--tour", str(FIXTURES / "worked25_circuit.txt")]) == 0
    assert dispatch(["verify", "--graph", CHAINS, "--tour", str(FIXTURES / "chains25_misprint.txt")]) == 1


def test_contract_matches_fixture(tmp_path, capsys):
    out, rmap = tmp_path / "c.txt", tmp_path / "c.rmap"
    assert dispatch(["contract", "--in", CHAINS, "--out", str(out), "--map", str(rmap)]) == 0
    assert parse_graph(out.read_text()) == parse_graph((FIXTURES / "chains25_contracted.txt").read_text())
    assert rmap.read_text() == (FIXTURES / "chains25_contracted.rmap").read_text()


def test_prob_output(capsys):
    assert dispatch(["prob", "--formula", "t11", "--n", "5"]) == 0
    assert capsys.readouterr().out.startswith("1/3 ≈ 0.333333")
    assert dispatch(["prob", "--formula", "powersum", "--k", "5", "--n", "4"]) == 0
    assert capsys.readouterr().out.strip() == "1300"
    assert dispatch(["prob", "--formula", "tv", "--r", "10", "--n", "100", "--m", "3"]) == 1
    assert "inapplicable" in capsys.readouterr().err


def test_decompose_and_tsp(tmp_path, capsys):
    start, target = tmp_path / "s.tour", tmp_path / "t.tour"
    start.write_text("1 2 3 4 5 6 7 8\n")
    target.write_text("1 3 5 7 2 8 4 6\n")
    summary = tmp_path / "d.json"
    assert dispatch(["decompose", "--start", str(start), "--target", str(target), "--summary", str(summary)]) == 0
    assert "replay verified: true" in capsys.readouterr().err
    inst = tmp_path / "sq.txt"
    inst.write_text("4 6 UW\n1 2 1\n2 3 1\n3 4 1\n4 1 1\n1 3 1.5\n2 4 1.5\n")
    crossed = tmp_path / "crossed.tour"
    crossed.write_text("1 3 2 4\n")
    tsum = tmp_path / "tsp.json"
    assert dispatch(["tsp", "--in", str(inst), "--start", str(crossed), "--seed", "0", "--summary", str(tsum)]) == 0
    doc = json.loads(tsum.read_text())
    assert doc["schema"] == "hamperm.tsp/1" and doc["weight"] == 4.0


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "deep" / "out.txt"
    atomic_write(str(target), "one\n")
    atomic_write(str(target), "two\n")
    assert target.read_text() == "two\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def replay_is_identical(tmp_path, argv, outputs):
    man = tmp_path / "run.json"
    first = dispatch(argv + ["--manifest", str(man)])
    hashes = {p: sha(p) for p in outputs}
    recorded = json.loads(man.read_text())
    assert {str(p): h for p, h in hashes.items()}.items() <= recorded["outputs"].items()
    for p in outputs:
        p.unlink()
    assert dispatch(["--replay", str(man)]) == first
    return all(sha(p) == h for p, h in hashes.items())


def test_replay_gen(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert replay_is_identical(tmp_path, ["gen", "--family", "boll", "--n", "40", "--out", str(out)], [out])


def test_replay_solve(tmp_path, capsys):
    out, trace = tmp_path / "tour.txt", tmp_path / "trace.json"
    argv = ["solve", "--in", CHAINS, "--contract", "--out", str(out), "--trace", str(trace)]
    assert replay_is_identical(tmp_path, argv, [out, trace])


def test_replay_prob_mc(tmp_path, capsys):
    out = tmp_path / "p.txt"
    argv = ["prob", "--formula", "t15", "--n", "20", "--mc", "20000", "--out", str(out)]
    assert replay_is_identical(tmp_path, argv, [out])


def test_replay_records_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HAMPERM_FANOUT", "4")
    man, out = tmp_path / "m.json", tmp_path / "t.txt"
    dispatch(["solve", "--in", WORKED, "--seed", "3", "--out", str(out), "--manifest", str(man)])
    doc = json.loads(man.read_text())
    assert doc["schema"] == "hamperm.manifest/1" and doc["env"] == {"HAMPERM_FANOUT": "4"}
    assert doc["outcome"]["exit_code"] == 0 and doc["inputs"]


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hamperm", "prob", "--formula", "t15", "--n", "5"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.startswith("2/9")


def test_tour_file_round_trip(tmp_path, capsys):
    tour = tmp_path / "t.tour"
    tour.write_text(format_tour(parse_tour("3 1 2")))
    assert parse_tour(tour.read_text()).order == (3, 1, 2)
