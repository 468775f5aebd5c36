"""Command-line driver: verification suites and matrix dumps.

Exit codes: 0 success, 1 a check failed, 2 invalid configuration.
"""
from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from .bases import FiniteRep, sample_points
from .suites import SUITE_NAMES, RunConfig, parse_complex, run_suite

SUITE_CHOICES = click.Choice(list(SUITE_NAMES) + ["all"])


def _cjson(z) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def _matrix_json(mat) -> list:
    return [[_cjson(x) for x in row] for row in np.asarray(mat)]


def _residual_json(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _emit(payload: dict, path: str | None):
    text = json.dumps(payload, indent=2) + "\n"
    if path in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_tolerances(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise click.BadParameter(f"expected suite=value, got {item!r}", param_hint="--tol")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--tol") from exc
    return out


def config_options(fn):
    """Options shared by every command; the assembled :class:`RunConfig` is passed as ``cfg``."""

    @click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                  help="key=value file; flags override its entries.")
    @click.option("--tau", help="Modular parameter, e.g. 0.2+1.0i.")
    @click.option("--eta", help="Crossing parameter, e.g. 0.35+0.4i.")
    @click.option("--eps", type=float, help="Series truncation target.")
    @click.option("--quad-points", type=int, help="Node cap of the trapezoidal rule.")
    @click.option("--seed", type=int, help="Base seed of sampled points.")
    @click.option("--tol", "tol_items", multiple=True, metavar="SUITE=VALUE", help="Tolerance override for a suite.")
    @functools.wraps(fn)
    def wrapper(config_file, tau, eta, eps, quad_points, seed, tol_items, **kw):
        text = ""
        if config_file:
            with open(config_file, encoding="utf-8") as fh:
                text = fh.read()
        try:
            tols = _parse_tolerances(tol_items)
            cfg = RunConfig.from_text(
                text,
                tau=None if tau is None else parse_complex(tau),
                eta=None if eta is None else parse_complex(eta),
                eps=eps, quad_points=quad_points, seed=seed, tolerances=tuple(tols.items()),
            )
        except click.BadParameter:
            raise
        except (ValueError, TypeError) as exc:
            raise click.UsageError(f"invalid configuration: {exc}") from exc
        return fn(cfg=cfg, **kw)

    return wrapper


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def main():
    """Elliptic Yang-Baxter solutions: verification suites and matrix dumps."""


@main.command()
@config_options
@click.option("--suite", type=SUITE_CHOICES, default="all", show_default=True)
@click.option("--json", "json_path", metavar="PATH", help="Write the report here ('-' for stdout).")
@click.option("--timings/--no-timings", default=True, show_default=True,
              help="Without timings, reports are byte-identical across runs.")
@click.option("--quiet", is_flag=True, help="No progress lines.")
def run(cfg, suite, json_path, timings, quiet):
    """Run a verification suite and report every residual."""
    to_stdout = json_path in (None, "-")

    def progress(res):
        if quiet:
            return
        mark = "PASS" if res.passed else "FAIL"
        line = f"{mark} {res.id:48s} residual={res.residual:.3e} tol={res.tol:.1e}"
        if res.error:
            line += f"  [{res.error}]"
        click.echo(line, err=to_stdout)

    report = run_suite(suite, cfg, progress)
    _emit(report.to_dict(timings), json_path)
    if not quiet:
        n_ok = sum(c.passed for c in report.checks)
        click.echo(f"{suite}: {n_ok}/{len(report.checks)} checks passed", err=to_stdout)
    sys.exit(0 if report.passed else 1)


def _header(command, cfg, **extra):
    out = {"command": command, "params": cfg.to_dict()}
    out.update(extra)
    return out


@main.command()
@config_options
@click.argument("n", type=click.IntRange(0))
@click.argument("m", type=click.IntRange(0))
@click.argument("u")
@click.option("--g", "g_text", default="0.3+0.17i", show_default=True,
              help="Second-space spin for the modular-double fusion (m > 0 or --double).")
@click.option("--double", is_flag=True, help="Fuse the modular-double symbols even when m = 0.")
@click.option("--points", type=click.IntRange(1), default=3, show_default=True,
              help="Sample points for the operator coefficient tables.")
@click.option("--json", "json_path", metavar="PATH", help="Output file ('-' for stdout).")
def fuse(cfg, n, m, u, g_text, double, points, json_path):
    """Fused Lax operator of rep (N, M) at spectral parameter U.

    With M = 0 this fuses N Baxter R-matrices into the spin N/2 Lax operator on
    C^2 (x) Theta_2N.  Otherwise the modular-double symbols are fused and the
    operator coefficients over the phi basis are tabulated per shift.
    """
    from . import fusion

    p = cfg.params
    try:
        uval = parse_complex(u)
        g = parse_complex(g_text)
    except ValueError as exc:
        raise click.UsageError(f"invalid configuration: {exc}") from exc
    if (n, m) == (0, 0):
        raise click.UsageError("invalid configuration: (n, m) = (0, 0) has nothing to fuse")
    if m == 0 and not double:
        fl = fusion.fuse_baxter(p, uval, n, cfg.seed)
        checks = fusion.fused_lax_checks(p, n, u=uval, seed=cfg.seed)
        d = n + 1
        blocks = fl.matrix.reshape(2, d, 2, d).transpose(0, 2, 1, 3)
        payload = _header("fuse", cfg, seed=cfg.seed, rep=[n, m], u=_cjson(uval),
                          basis=f"thb3^j thb4^({n}-j), j=0..{n}",
                          residuals={k: _residual_json(v) for k, v in checks.items() if k != "scalar"},
                          generator_scalar=_cjson(checks["scalar"]),
                          normalisation=_cjson(fl.normalisation),
                          blocks=[[_matrix_json(blocks[a, b]) for b in range(2)] for a in range(2)],
                          generators=[_matrix_json(s) for s in fl.generators])
        ok = max(v for k, v in checks.items() if k != "scalar") < 1e-8
    else:
        fo = fusion.fuse_double(p, uval, g, n, m, seed=7 + cfg.seed)
        z = sample_points(points, cfg.seed + 60)
        co = fo.operator.coefficients(z)
        payload = _header("fuse", cfg, seed=cfg.seed, rep=[n, m], u=_cjson(uval), g=_cjson(g),
                          basis="phi", points=[_cjson(x) for x in z],
                          residuals={"fit": _residual_json(fo.fit_residual)},
                          coefficients=[{"shift": list(k), "values": [_matrix_json(v) for v in co[k]]}
                                        for k in sorted(co)])
        ok = fo.fit_residual < 1e-8
    _emit(payload, json_path)
    sys.exit(0 if ok else 1)


@main.command()
@config_options
@click.argument("n", type=click.IntRange(0))
@click.argument("m", type=click.IntRange(0))
@click.argument("k", type=click.IntRange(0))
@click.argument("l", type=click.IntRange(0))
@click.argument("u")
@click.option("--half1", is_flag=True, help="First rep on the half-shifted lattice.")
@click.option("--half2", is_flag=True, help="Second rep on the half-shifted lattice.")
@click.option("--json", "json_path", metavar="PATH", help="Output file ('-' for stdout).")
def reduce(cfg, n, m, k, l, u, half1, half2, json_path):
    """Finite R-matrix on reps (N, M) x (K, L) at spectral parameter U."""
    from . import reduction

    p = cfg.params
    try:
        uval = parse_complex(u)
    except ValueError as exc:
        raise click.UsageError(f"invalid configuration: {exc}") from exc
    r1, r2 = FiniteRep(n, m, half1), FiniteRep(k, l, half2)
    seed = 7 + cfg.seed
    out = reduction.reduce_both_spaces(p, uval, r1, r2, seed)
    v = -0.12 + 0.04j
    rll = {}
    for kind in ("modified", "tilde"):
        try:
            rll[kind] = _residual_json(reduction.finite_rll_residual(p, uval, v, r1, r2, kind, seed))
        except Exception as exc:  # reported, not fatal
            rll[kind] = None
            rll[f"{kind}_error"] = f"{type(exc).__name__}: {exc}"
    payload = _header("reduce", cfg, seed=cfg.seed, reps=[[n, m, half1], [k, l, half2]], u=_cjson(uval),
                      dim=out.matrix.shape[0], basis="phi (x) phi",
                      residuals={"fit": _residual_json(out.fit_residual),
                                 "rll_v": _cjson(v),
                                 **{f"rll_{kk}": vv for kk, vv in rll.items()}},
                      matrix=_matrix_json(out.matrix),
                      pair_matrix=_matrix_json(out.pair_matrix))
    _emit(payload, json_path)
    finite = [x for x in (rll.get("modified"), rll.get("tilde")) if x is not None]
    ok = out.fit_residual < 1e-8 and all(x < 1e-8 for x in finite)
    sys.exit(0 if ok else 1)


if __name__ == "__main__":  # pragma: no cover
    main()
