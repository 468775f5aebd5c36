import math

import pytest

from ellipticyb.core import MACHINE_EPS
from ellipticyb.suites import (
    EXCLUDED,
    SUITE_NAMES,
    Check,
    RunConfig,
    find_check,
    format_complex,
    parse_complex,
    run_check,
    run_suite,
    suite_checks,
)


@pytest.mark.parametrize("text,value", [("0.2+1.0i", 0.2 + 1j), ("0.35+0.4j", 0.35 + 0.4j),
                                        (" -1e-3 - 2i ", -1e-3 - 2j), ("3", 3 + 0j)])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("z", [0.2 + 1j, -0.1 - 3e-17j, 1 / 3 + 2j / 7, complex(0.0, -0.0)])
def test_format_round_trip(z):
    assert parse_complex(format_complex(z)) == z


def test_defaults():
    cfg = RunConfig()
    assert cfg.tau == 0.2 + 1j and cfg.eta == 0.35 + 0.4j
    assert cfg.eps == MACHINE_EPS and cfg.quad_points == 512 and cfg.seed == 0


def test_text_round_trip():
    cfg = RunConfig(tau=0.1 + 1.3j, eta=1 / 3 + 0.5j, eps=1e-14, quad_points=256, seed=4,
                    tolerances=(("core", 1e-9),))
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_from_text_overrides_and_comments():
    cfg = RunConfig.from_text("# comment\ntau = 0.3+1.1i\nseed=2  # trailing\n", seed=5)
    assert cfg.tau == 0.3 + 1.1j and cfg.seed == 5


@pytest.mark.parametrize("kw,needle", [
    ({"tau": 0.2 - 1j}, "tau"),
    ({"eta": 0.35 - 0.4j}, "eta"),
    ({"eps": 1e-20}, "eps"),
    ({"quad_points": 4}, "quad_points"),
    ({"seed": -1}, "seed"),
    ({"tolerances": (("nope", 1.0),)}, "nope"),
    ({"tolerances": (("core", 0.0),)}, "core"),
])
def test_invalid_config(kw, needle):
    with pytest.raises(ValueError, match=needle):
        RunConfig(**kw)


@pytest.mark.parametrize("text", ["tau", "colour=red", "seed=x"])
def test_bad_config_text(text):
    with pytest.raises(ValueError):
        RunConfig.from_text(text)


def test_tolerance_override_applies():
    check = find_check("core.gamma_reflection")
    strict = RunConfig(tolerances=(("core", 1e-30),))
    res = run_check(check, strict)
    assert res.tol == 1e-30 and not res.passed
    assert run_check(check, RunConfig()).passed


def test_check_errors_are_reported():
    def boom(cfg):
        raise ZeroDivisionError("x")
    res = run_check(Check("core.boom", boom, 1.0), RunConfig())
    assert math.isinf(res.residual) and not res.passed and "ZeroDivisionError" in res.error
    assert res.to_dict()["residual"] is None


def test_suite_registry():
    ids = [c.id for c in suite_checks("all")]
    assert len(ids) == len(set(ids))
    assert all(i.split(".")[0] in SUITE_NAMES for i in ids)
    excluded = [i for v in EXCLUDED.values() for i, _ in v]
    assert not set(excluded) & set(ids)
    assert all(find_check(i).id == i for i in excluded)
    with pytest.raises(KeyError):
        suite_checks("everything")


def test_suite_report_schema():
    rep = run_suite("lax", RunConfig())
    d = rep.to_dict(timings=False)
    assert d["suite"] == "lax" and d["pass"] is True
    assert {"id", "residual", "tol", "pass", "seconds"} <= set(d["checks"][0])
    assert all(c["seconds"] is None for c in d["checks"])
    assert "excluded" not in d
    assert "excluded" in run_suite("intertwiner", RunConfig()).to_dict()
