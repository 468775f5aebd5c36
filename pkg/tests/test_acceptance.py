"""Acceptance criteria at default parameters and tolerances.

Each test prints a ``criterion N: PASS|FAIL`` line; pytest repeats them in the
terminal summary.  Run this file directly for the lines alone.
"""
import time

import pytest

from ellipticyb.suites import RunConfig, find_check, run_check, run_suite

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

CRITERIA = {
    1: ("special functions", 5.0, [
        "core.theta_bilinear_identities", "core.gamma_shift_2eta", "core.gamma_shift_tau",
        "core.gamma_reflection", "core.gamma_quasiperiod_symmetry"]),
    2: ("elliptic beta integral", 10.0, ["intertwiner.beta_integral"]),
    3: ("star-triangle operator identity", 30.0, ["intertwiner.star_triangle"]),
    4: ("Sklyanin relations and Casimirs", None, [
        "sklyanin.relations_plain", "sklyanin.relations_modified", "sklyanin.relations_tilde",
        "sklyanin.cross_relations", "sklyanin.casimir_plain", "sklyanin.casimir_modified",
        "sklyanin.casimir_tilde", "sklyanin.casimir_g_symmetry"]),
    5: ("spin-1/2 reduction", None, ["lax.spin_half_generators", "lax.spin_half_baxter"]),
    6: ("Baxter YBE", None, ["lax.ybe_plain", "lax.ybe_tilde"]),
    7: ("factorization and sigma3 shift", None, [
        "lax.factorized_plain", "lax.factorized_modified", "lax.factorized_tilde", "lax.sigma3_shift"]),
    8: ("lattice intertwiner", None, [
        "intertwiner.m0_identity_half_shift", "intertwiner.contiguous", "intertwiner.k_independence",
        "intertwiner.path_independence", "intertwiner.nullspace", "intertwiner.lattice_intertwining"]),
    9: ("inversion", 60.0, [
        "intertwiner.inversion_eta", "intertwiner.inversion_half_tau",
        "intertwiner.inversion_eta_plus_half_tau"]),
    10: ("fusion of Baxter R", None, [
        "fusion.closed_form", "fusion.fused2_sklyanin", "fusion.fused2_matrix_rep",
        "fusion.fused3_sklyanin", "fusion.fused3_matrix_rep"]),
    11: ("reduction reproduces fused operators", None, [
        "reduction.lax_identification", "reduction.fusion_agreement_10", "reduction.fusion_agreement_01",
        "reduction.fusion_agreement_11", "reduction.fusion_agreement_20"]),
    12: ("finite R-matrices and full run", 120.0, [
        "reduction.rll_10x10_modified", "reduction.rll_10x10_tilde",
        "reduction.rll_10x01_modified", "reduction.rll_10x01_tilde",
        "reduction.fused_rll_10_10x01", "reduction.fused_rll_01_10x10"]),
}


def evaluate(number, cfg=None):
    """Run one criterion; returns ``(passed, line)``."""
    cfg = cfg or RunConfig()
    title, limit, ids = CRITERIA[number]
    start = time.perf_counter()
    results = [run_check(find_check(i), cfg) for i in ids]
    notes = []
    if number == 12:
        report = run_suite("all", cfg)
        failed = [c.id for c in report.checks if not c.passed]
        notes.append(f"run all {'pass' if report.passed else 'FAIL ' + ','.join(failed)}")
        run_ok = report.passed
    else:
        run_ok = True
    elapsed = time.perf_counter() - start
    time_ok = limit is None or elapsed < limit
    bad = [r for r in results if not r.passed]
    worst = max(results, key=lambda r: r.residual / r.tol)
    passed = not bad and time_ok and run_ok
    if bad:
        notes.append("failing: " + ", ".join(
            f"{r.id} residual={r.residual:.2e} tol={r.tol:.0e}" + (f" [{r.error}]" if r.error else "")
            for r in bad))
    if not time_ok:
        notes.append(f"over time limit {limit:.0f}s")
    line = (f"criterion {number}: {'PASS' if passed else 'FAIL'} {title}; "
            f"worst {worst.id} residual={worst.residual:.2e} tol={worst.tol:.0e}; {elapsed:.1f}s"
            + ("; " + "; ".join(notes) if notes else ""))
    return passed, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    passed, line = evaluate(number)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert passed, line


if __name__ == "__main__":
    ok = True
    for n in sorted(CRITERIA):
        p, line = evaluate(n)
        ok &= p
        print(line, flush=True)
    raise SystemExit(0 if ok else 1)
