import json

import pytest

from harmonic_lr.cli import dispatch, parse_times

CASE = {
    "graph": {"generator": "ring", "n": 10},
    "couplings": {"kind": "spring_chain", "omega": 1.0, "kappa": 1.0},
    "times": [0.0, 0.4, 1.2],
    "dimension": 1,
    "weyl": [{"support": [0, 1], "xi": [1, 0.5, -0.2, 0.3], "support_prime": [5, 6], "xi_prime": [0.1, 1, 0, 0.4]}],
}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_parse_times():
    assert parse_times({"start": 0, "stop": 0.3, "step": 0.1}) == [0.0, 0.1, 0.2, 0.3]
    assert parse_times([1, 2]) == [1.0, 2.0]


def test_kg_scan_happy_path(tmp_path):
    cfg = write(tmp_path, "kg.json", {"kg": {"N": [8, 16], "t_grid": [0.0, 0.05]}})
    out = tmp_path / "table.csv"
    assert dispatch(["kg-scan", "--config", cfg, "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "N,t,value,cone_flag"


def test_unknown_command(capsys):
    assert dispatch(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


def test_no_command():
    assert dispatch([]) == 1


def test_bad_configs(tmp_path):
    assert dispatch(["bounds", "--config", str(tmp_path / "missing.json")]) == 1
    assert dispatch(["bounds", "--config", write(tmp_path, "m.json", "{oops")]) == 1
    assert dispatch(["bounds", "--config", write(tmp_path, "e.json", {"graph": {"generator": "ring", "n": 4}})]) == 1
    bad_graph = dict(CASE, graph={"generator": "blob"})
    assert dispatch(["bounds", "--config", write(tmp_path, "g.json", bad_graph)]) == 1


def test_verify_passes(tmp_path, capsys):
    assert dispatch(["verify", "--config", write(tmp_path, "c.json", CASE)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS dominance" in out


def test_verify_zero_time(tmp_path, capsys):
    assert dispatch(["verify", "--config", write(tmp_path, "c.json", dict(CASE, times=[0.0]))]) == 0


def test_verify_flags_corrupted_bound(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", dict(CASE, bound_scale=0.25))
    assert dispatch(["verify", "--config", cfg]) == 1
    out = capsys.readouterr().out
    assert "FAIL dominance" in out and "violation" in out


def test_verify_skips_series_check_at_large_tau(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", dict(CASE, times=[40.0], weyl=[]))
    assert dispatch(["verify", "--config", cfg]) == 0
    assert "SKIP dual-method" in capsys.readouterr().out


def test_strict_precondition_exit(tmp_path):
    case = dict(CASE, couplings={"kind": "random_local", "R": 1, "momentum": "random", "seed": 1}, theorems=["T3"])
    cfg = write(tmp_path, "p.json", case)
    assert dispatch(["bounds", "--config", cfg, "--strict"]) == 2
    assert dispatch(["bounds", "--config", cfg]) == 0


def test_strict_tolerates_cone_rows(tmp_path):
    cfg = write(tmp_path, "c.json", dict(CASE, theorems=["T2"]))
    assert dispatch(["bounds", "--config", cfg, "--strict"]) == 0


def test_tightness_reports_violation(tmp_path):
    cfg = write(tmp_path, "c.json", dict(CASE, bound_scale=0.25))
    assert dispatch(["tightness", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 1


@pytest.mark.parametrize("command", ["kernels", "bounds", "weyl", "tightness"])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_outputs_are_deterministic(tmp_path, command, fmt):
    cfg = write(tmp_path, "c.json", CASE)
    outs = []
    for jobs in ("1", "8", "1"):
        out = tmp_path / f"o{jobs}{len(outs)}.{fmt}"
        assert dispatch([command, "--config", cfg, "--out", str(out), "--format", fmt, "--jobs", jobs]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    if fmt == "json":
        json.loads(outs[0])


def test_bad_flag_values(tmp_path):
    cfg = write(tmp_path, "c.json", CASE)
    assert dispatch(["bounds", "--config", cfg, "--jobs", "0"]) == 1
    assert dispatch(["bounds", "--config", cfg, "--format", "xml"]) == 1
