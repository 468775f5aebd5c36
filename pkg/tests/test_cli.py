import json

import pytest
from click.testing import CliRunner

from ellipticyb.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, [str(a) for a in args])


def test_run_suite_passes_with_json(runner, tmp_path):
    out = tmp_path / "r.json"
    res = invoke(runner, "run", "--suite", "lax", "--json", out, "--quiet")
    assert res.exit_code == 0, res.output
    data = json.loads(out.read_text())
    assert data["pass"] and data["suite"] == "lax"
    assert data["params"]["tau"] == {"re": 0.2, "im": 1.0}


def test_reports_are_byte_identical(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert invoke(runner, "run", "--suite", "core", "--json", p, "--no-timings", "--quiet").exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_failed_check_exits_one(runner):
    res = invoke(runner, "run", "--suite", "core", "--tol", "core=1e-30", "--quiet")
    assert res.exit_code == 1


@pytest.mark.parametrize("args", [
    ["--eta", "0.35-0.4i"],
    ["--tau", "garbage"],
    ["--tol", "core"],
    ["--tol", "nosuch=1e-3"],
    ["--quad-points", "2"],
])
def test_invalid_configuration_exits_two(runner, args):
    res = invoke(runner, "run", "--suite", "core", *args)
    assert res.exit_code == 2


def test_config_file(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("tau=0.2+1.0i\neta=0.35+0.4i\nseed=1\n")
    res = invoke(runner, "run", "--suite", "core", "--config", cfg, "--json", "-", "--quiet")
    assert res.exit_code == 0
    assert json.loads(res.output)["params"]["seed"] == 1
    cfg.write_text("eta=0.35-0.4i\n")
    assert invoke(runner, "run", "--suite", "core", "--config", cfg).exit_code == 2


def test_progress_lines(runner):
    res = invoke(runner, "run", "--suite", "lax")
    assert "PASS lax.ybe_plain" in res.output
    assert "checks passed" in res.output


def test_reduce_dump(runner):
    res = invoke(runner, "reduce", 1, 0, 1, 0, "0.3", "--json", "-")
    assert res.exit_code == 0, res.output
    d = json.loads(res.output)
    assert d["dim"] == 4 and len(d["matrix"]) == 4
    assert d["residuals"]["rll_modified"] < 1e-8 and d["residuals"]["rll_tilde"] < 1e-8


def test_reduce_trivial(runner):
    d = json.loads(invoke(runner, "reduce", 0, 0, 0, 0, "0.3", "--json", "-").output)
    assert d["dim"] == 1


def test_fuse_baxter_dump(runner):
    res = invoke(runner, "fuse", 2, 0, "0.3+0.1i", "--json", "-")
    assert res.exit_code == 0, res.output
    d = json.loads(res.output)
    assert len(d["blocks"]) == 2 and len(d["blocks"][0][0]) == 3
    assert all(v < 1e-8 for v in d["residuals"].values())


def test_fuse_double_dump(runner):
    d = json.loads(invoke(runner, "fuse", 1, 1, "0.3", "--json", "-").output)
    assert {tuple(c["shift"]) for c in d["coefficients"]} == {(-1, -1, 0), (-1, 1, 0), (1, -1, 0), (1, 1, 0)}


def test_fuse_nothing_exits_two(runner):
    assert invoke(runner, "fuse", 0, 0, "0.3").exit_code == 2
