import json
import subprocess
import sys

import pytest

from mallckpt.cli import main
from mallckpt.fixtures import table_profile
from mallckpt.profile import save_profile
from mallckpt.trace import parse_trace


def run(capsys, *argv):
    status = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return status, out, err


@pytest.fixture
def files(tmp_path):
    trace = tmp_path / "t.csv"
    trace.write_text("nodes=1,horizon=1000\n0,100,110\n0,200,210\n")
    prof = tmp_path / "p.json"
    prof.write_text(save_profile(table_profile("CG", 4)))
    return tmp_path, trace, prof


def test_rates_example(capsys, files):
    _, trace, _ = files
    status, out, _ = run(capsys, "rates", "--trace", trace, "--at", 1000)
    data = json.loads(out)
    assert status == 0
    assert data["lambda"] == pytest.approx(0.01) and data["theta"] == pytest.approx(0.1)


def test_policy_greedy(capsys):
    status, out, _ = run(capsys, "policy", "--kind", "greedy", "--n", 4)
    assert status == 0 and out.strip() == '{"n":4,"rp":[1,2,3,4]}'


def test_synth_trace_deterministic(capsys, tmp_path):
    args = ["synth-trace", "--n", 4, "--lambda", 1e-5, "--theta", 1e-3, "--horizon", 1e6]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--seed", 42)
    _, c, _ = run(capsys, *args, "--seed", 7)
    assert a == b != c
    assert parse_trace(a).node_count == 4


def test_recommend_and_sweep_csv(capsys, files):
    tmp, _, prof = files
    out = tmp / "rec.json"
    status, _, _ = run(capsys, "recommend", "--profile", prof, "--lambda", 1e-6,
                       "--theta", 1e-4, "--out", out)
    assert status == 0
    data = json.loads(out.read_text())
    assert data["meta"]["seed"] == 42 and data["i_model_s"] > 0
    sweep = (tmp / "rec.sweep.csv").read_text().splitlines()
    assert sweep[0] == "interval_s,uwt" and len(sweep) == len(data["sweep"]) + 1


def test_simulate_with_timeline(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    trace.write_text("nodes=2,horizon=1000\n1,250,900\n")
    prof = tmp_path / "p.json"
    prof.write_text(json.dumps({"n_max": 2, "work": [1, 2], "ckpt": [5, 5],
                                "recov": [[10, 10], [10, 10]]}))
    out = tmp_path / "sim.json"
    status, _, _ = run(capsys, "simulate", "--trace", trace, "--profile", prof,
                       "--interval", 45, "--start", 0, "--dur", 1000, "--out", out)
    assert status == 0
    assert json.loads(out.read_text())["uw"] == pytest.approx(1080.0)
    lines = (tmp_path / "sim.timeline.csv").read_text().splitlines()
    assert lines[0] == "t_s,event,procs" and lines[-1].endswith("end,0")


def test_efficiency_runs(capsys, tmp_path):
    _, tr, _ = run(capsys, "synth-trace", "--n", 4, "--lambda", 2e-6, "--theta", 1e-4,
                   "--horizon", 2e6)
    trace = tmp_path / "t.csv"
    trace.write_text(tr)
    prof = tmp_path / "p.json"
    prof.write_text(save_profile(table_profile("MD", 4)))
    status, out, _ = run(capsys, "efficiency", "--trace", trace, "--profile", prof,
                         "--segments", 3, "--dur-min", 2e5, "--dur-max", 4e5,
                         "--grid", "300,1200,4800")
    assert status == 0
    summary = json.loads(out)["summary"]
    assert summary["count"] == 3 and 0 <= summary["mean_pd"] <= 100


def test_calibrate_thres_monotone(capsys, files):
    _, _, prof = files
    status, out, _ = run(capsys, "calibrate-thres", "--profile", prof, "--lambda", 1e-6,
                         "--theta", 1e-5)
    rows = out.strip().splitlines()
    assert status == 0 and rows[0] == "thres,threserror,elims_fraction,score"
    fracs = [float(r.split(",")[2]) for r in rows[1:]]
    assert fracs == sorted(fracs) and fracs[0] == 0.0


def test_errors_and_exit_codes(capsys, files, tmp_path):
    _, trace, _ = files
    bad = tmp_path / "bad.csv"
    bad.write_text("nodes=1,horizon=1000\n0,100,110\n0,105,120\n")
    status, _, err = run(capsys, "rates", "--trace", bad, "--at", 500)
    assert status == 1
    info = json.loads(err)
    assert info["error"] == "TraceFormatError" and "line 3" in info["message"]
    status, _, err = run(capsys, "rates", "--trace", trace)
    assert status == 2 and json.loads(err)["error"] == "UsageError"
    status, _, err = run(capsys, "rates", "--trace", tmp_path / "missing.csv", "--at", 1)
    assert status == 1
    status, _, err = run(capsys, "rates", "--trace", trace, "--at", 50)
    assert status == 1 and json.loads(err)["error"] == "InsufficientHistoryError"


def test_help_lists_units():
    from mallckpt.cli import build_parser
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    text = sub["recommend"].format_help()
    for flag in ("--i-min", "--thres", "--band-pct", "--delta-policy", "--threads",
                 "--lambda", "--theta", "--at", "--seed", "--out", "--rp"):
        assert flag in text
    assert "seconds" in text and "1/s" in text


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mallckpt", "policy", "--kind", "greedy",
                          "--n", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout) == {"n": 3, "rp": [1, 2, 3]}
