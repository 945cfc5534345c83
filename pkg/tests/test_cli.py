"""CLI behavior: command output, determinism, structured errors on fuzzed
malformed inputs."""

import io
import json
import random

import pytest

from cubekh.cli import main, run_job

TREFOIL = {"pd": [[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]]}


def run_cli(capsys, monkeypatch, args, payload=None):
    if payload is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(payload)))
    code = main(args)
    out = capsys.readouterr().out
    return code, out


def test_khr_trefoil(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "khr"], TREFOIL)
    assert code == 0
    blob = json.loads(out)
    assert blob["total"] == 3
    assert blob["theory"] == "khr"


def test_det_unknot(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "det"],
                        {"pd": [], "free_loops": 1})
    assert code == 0
    assert json.loads(out)["det"] == 1


def test_plumbing_a2(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "plumbing"],
                        {"plumbing": {"mult": [2, 2], "edges": [[0, 1]]}})
    assert code == 0
    blob = json.loads(out)
    assert blob["h1"] == 3 and blob["verdict"] == "certified"


def test_surgery_command(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "surgery"],
                        {"linking": [[0]], "frames": [7], "v": [0]})
    assert code == 0
    assert json.loads(out)["h1"]["order"] == 7


def test_lspace_large_surgery(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "lspace"],
                        {"large_surgery": {"p": 2, "q": 3, "n": 6}})
    assert code == 0
    blob = json.loads(out)
    assert blob["verdict"] == "certified" and blob["h1_order"] == 6


def test_qa_command(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "qa"], TREFOIL)
    assert code == 0
    blob = json.loads(out)
    assert blob["verdict"] == "certified"
    assert blob["certificate"]["det"] == 3


def test_rankcheck_command(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "rankcheck"], TREFOIL)
    assert code == 0
    blob = json.loads(out)
    assert blob["det"] == 3 and blob["equality"]


def test_ss_command(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch, ["--command", "ss"],
                        {"pd": [[1, 3, 2, 4], [3, 1, 4, 2]],
                         "marking": {"arcs": [1, 0, 0, 1]}})
    assert code == 0
    blob = json.loads(out)
    assert blob["stabilization_index"] <= 3


def test_budget_exit_code(capsys, monkeypatch):
    code, out = run_cli(capsys, monkeypatch,
                        ["--command", "kh", "--max-crossings", "1"], TREFOIL)
    assert code == 3
    assert json.loads(out)["error"]["kind"] == "budget"


def test_env_budget(capsys, monkeypatch):
    monkeypatch.setenv("CUBEKH_MAX_CROSSINGS", "2")
    code, out = run_cli(capsys, monkeypatch, ["--command", "kh"], TREFOIL)
    assert code == 3


def test_determinism_across_runs_and_threads(capsys, monkeypatch):
    outputs = set()
    for threads in ("1", "4"):
        for _ in range(2):
            code, out = run_cli(capsys, monkeypatch,
                                ["--command", "khr", "--threads", threads],
                                TREFOIL)
            assert code == 0
            outputs.add(out)
    assert len(outputs) == 1


def test_malformed_inputs_fuzz(capsys, monkeypatch):
    rng = random.Random(13)
    payloads = [
        "not json at all",
        "[1,2,3]",
        "{}",
        '{"pd": "nope"}',
        '{"pd": [[1,2,3]]}',
        '{"pd": [[1,1,1,1]]}',
        '{"pd": [[1,4,2,5]], "free_loops": -2}',
        '{"pd": [[1,4,2,5],[3,6,4,1],[5,2,6,3]], "orientation": [1,1]}',
        '{"pd": [[1,4,2,5],[3,6,4,1],[5,2,6,3]], "marking": {"arcs": [1]}}',
        '{"linking": [[1,2],[3,4]], "v": [0,0]}',
        '{"linking": [[1]], "v": [0, 0]}',
        '{"plumbing": {"mult": [1], "edges": [[0,5]]}}',
    ]
    for _ in range(30):
        junk = "".join(rng.choice('{}[]",:abc123 ') for _ in range(rng.randint(1, 25)))
        payloads.append(junk)
    for i, raw in enumerate(payloads):
        cmd = rng.choice(["kh", "khr", "det", "h1", "qa", "surgery", "plumbing"])
        monkeypatch.setattr("sys.stdin", io.StringIO(raw))
        code = main(["--command", cmd])
        out = capsys.readouterr().out
        blob = json.loads(out)
        if code != 0:
            assert code in (1, 2, 3), (raw, cmd, code)
            assert "error" in blob and "kind" in blob["error"], (raw, cmd)


def test_run_job_twisted_matches_khr_total():
    out = run_job("twisted", TREFOIL)
    assert out["total"] == 3
