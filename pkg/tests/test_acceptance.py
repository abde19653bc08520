"""Acceptance criteria, each at its stated tolerance.

Every test prints a single ``CRITERION k: PASS|FAIL`` line with the measured
numbers, then asserts. Criteria 2, 5 and 6 are expected to stay red; the
failure messages carry the analysis.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from recweno import reconstruction as rc
from recweno.euler import GasModel, NonPhysicalState, hllc_flux
from recweno.problems import (
    convergence_study,
    error_norms,
    get_problem,
    reference_solution,
    solve,
)
from recweno.riemann import star_state
from recweno.solver import Discretization, rk3_step

AIR = GasModel(1.4)

TABLE2_LINEAR = (1.7360e-07, 2.7245e-09, 4.2946e-11)
TABLE1_LINEAR = (2.0664e-06, 2.5836e-07, 3.2298e-08)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok

    return emit


def _fmt(values):
    return "(" + ", ".join(f"{v:.4e}" for v in values) + ")"


def _orders(errors):
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]


@pytest.fixture(scope="module")
def table2():
    spec = get_problem("advect_sine")
    schemes = {w.kind: Discretization(6, w) for w in (rc.LINEAR, rc.JS, rc.Z)}
    # a mesh label N means dx = 1/N on the length-2 domain, i.e. 2N cells
    return convergence_study(spec, schemes, [20, 40, 80], "dt_equals_dx_squared", mesh="inverse_dx")


def test_criterion_1_table2_linear(table2, report):
    errors = table2["linear"].l1
    orders = _orders(errors)
    within = all(1 / 3 <= e / ref <= 3 for e, ref in zip(errors, TABLE2_LINEAR))
    ok = within and all(o >= 5.7 for o in orders)
    literal = convergence_study(
        get_problem("advect_sine"), {"linear": Discretization(6, rc.LINEAR)}, [20, 40, 80], "dt_equals_dx_squared"
    )["linear"].l1
    report(
        1, ok,
        f"L1 {_fmt(errors)} vs {_fmt(TABLE2_LINEAR)}, orders {[round(o, 3) for o in orders]} "
        f"(dx = 1/N; with N cells instead: {_fmt(literal)})",
    )
    assert ok


def test_criterion_2_table2_z_and_js(table2, report):
    lin, z, js = table2["linear"].l1, table2["z"].l1, table2["js"].l1
    rel = [abs(a - b) / b for a, b in zip(z, lin)]
    js_orders = _orders(js)
    z_ok = all(r <= 0.01 for r in rel)
    js_ok = all(o >= 5.3 for o in js_orders)
    report(
        2, z_ok and js_ok,
        f"Z vs linear max rel diff {max(rel):.2e} ({'ok' if z_ok else 'FAIL'}); "
        f"JS L1 {_fmt(js)} orders {[round(o, 3) for o in js_orders]} need >= 5.3 ({'ok' if js_ok else 'FAIL'})",
    )
    assert z_ok, rel
    assert js_ok, (
        f"WENO6-JS orders {js_orders}: with epsilon = 1e-6 and p = 2 the JS weights deviate from d by "
        "O(dx^2) (largest at the sine's critical points); against O(dx^3) candidate errors the "
        "weight perturbation sum is O(dx^5), which makes the scheme fifth order on this test; "
        "the printed 5.73..6.73 is not reproduced"
    )


def test_criterion_3_table1_temporal_saturation(report):
    spec = get_problem("advect_sine")
    rep = convergence_study(spec, {"linear": Discretization(6, rc.LINEAR)}, [40, 80, 160], "dt_equals_c_dx", 0.2)
    errors = rep["linear"].l1
    orders = _orders(errors)
    within = all(1 / 3 <= e / ref <= 3 for e, ref in zip(errors, TABLE1_LINEAR))
    ok = within and all(abs(o - 3.0) <= 0.1 for o in orders)
    report(3, ok, f"L1 {_fmt(errors)} vs {_fmt(TABLE1_LINEAR)}, orders {[round(o, 4) for o in orders]}")
    assert ok


def _poly_averages(coeffs, offsets):
    out = np.zeros_like(offsets, dtype=float)
    for k, c in enumerate(coeffs):
        out += c * ((offsets + 0.5) ** (k + 1) - (offsets - 0.5) ** (k + 1)) / (k + 1)
    return out


ORACLE_LAYOUT = [(slice(0, 3), 2, 2), (slice(0, 4), 3, 2), (slice(1, 5), 3, 1), (slice(2, 6), 3, 0)]
SUPPRESSION = {1: (0, 1), 2: (0, 1, 2), 3: (1, 2, 3), 4: (2, 3), 5: (3,)}


def test_criterion_4_kernel_property_suite(report):
    rng = np.random.default_rng(4)
    windows = rng.normal(size=(6, 10_000)) * 10.0 ** rng.uniform(-2, 2, size=10_000)
    scale = np.maximum(1.0, np.abs(windows).max(axis=0))
    checks = {}

    opt = rc.optimal6(windows)
    convex = max(np.max(np.abs(np.einsum("k,kn->n", rc.LINEAR_WEIGHTS6, rc.candidates6(windows, s).w) - opt) / scale)
                 for s in ("left", "right"))
    checks["convex identity"] = (convex, 1e-13)

    worst = 0.0
    for _ in range(2000):
        coeffs = rng.uniform(-2, 2, size=6)
        shift = rng.uniform(-0.5, 0.5)
        w = _poly_averages(coeffs, np.arange(-2, 4) + shift)
        exact = sum(c * (0.5 + shift) ** k for k, c in enumerate(coeffs))
        pair = rc.reconstruct6(w, rc.LINEAR)
        worst = max(worst, abs(pair.left - exact) / max(1, np.abs(w).max()), abs(pair.right - exact) / max(1, np.abs(w).max()))
    checks["degree-5 reproduction"] = (worst, 1e-12)

    mirror = 0.0
    for scheme in (rc.LINEAR, rc.JS, rc.Z):
        a = rc.reconstruct6(windows, scheme)
        b = rc.reconstruct6(windows[::-1].copy(), scheme)
        mirror = max(mirror, np.max(np.abs(a.left - b.right) / scale), np.max(np.abs(a.right - b.left) / scale))
    checks["mirror symmetry"] = (mirror, 1e-14)

    norm = 0.0
    for scheme in (rc.JS, rc.Z):
        for side in ("left", "right"):
            beta = rc.smoothness6(windows, side)
            w = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, beta, rc.tau6(beta), scheme)
            norm = max(norm, np.max(np.abs(w.sum(axis=0) - 1.0)))
    checks["weight normalization"] = (norm, 1e-14)

    oracle = 0.0
    for n in range(500):
        v = windows[:, n]
        beta = rc.smoothness6(v)
        for k, (sl, degree, target) in enumerate(ORACLE_LAYOUT):
            ref = rc.smoothness_oracle(v[sl], degree, target)
            oracle = max(oracle, abs(beta[k] - ref) / max(abs(ref), 1e-300))
    checks["beta vs integral oracle"] = (oracle, 1e-12)

    flagged = 0.0
    for first_high, idx in SUPPRESSION.items():
        for up in (True, False):
            v = np.zeros(6)
            v[first_high:] = 1.0
            v = v if up else 1.0 - v
            for side, window in (("left", v), ("right", v[::-1].copy())):
                w = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, rc.smoothness6(window, side), scheme=rc.JS)
                flagged = max(flagged, np.max(w[list(idx)]))
    checks["suppression table"] = (flagged, 1e-3)

    ok = all(value <= tol if name != "suppression table" else value < tol for name, (value, tol) in checks.items())
    report(4, ok, "; ".join(f"{name} {value:.1e} (tol {tol:.0e})" for name, (value, tol) in checks.items()))
    assert ok, checks


def _sine_windows(n):
    # exact cell averages of sin(pi x) on N periodic cells of [0, 2]
    dx = 2.0 / n
    edges = np.arange(n + 1) * dx
    avg = (np.cos(np.pi * edges[:-1]) - np.cos(np.pi * edges[1:])) / (np.pi * dx)
    return np.stack([np.roll(avg, 2 - k) for k in range(6)])


def test_criterion_5_tau_and_z_scaling(report):
    ns = np.array([40, 80, 160, 320])
    tau_max, dev_max = [], []
    for n in ns:
        beta = rc.smoothness6(_sine_windows(n))
        tau = rc.tau6(beta)
        delta = rc.nonlinear_weights(rc.LINEAR_WEIGHTS6, beta, tau, rc.Z)
        tau_max.append(np.abs(tau).max())
        dev_max.append(np.abs(delta - rc.LINEAR_WEIGHTS6[:, None]).max())
    tau_slope = -np.polyfit(np.log(ns), np.log(tau_max), 1)[0]
    dev_slope = -np.polyfit(np.log(ns), np.log(dev_max), 1)[0]
    tau_ok = 5.5 <= tau_slope <= 6.5
    dev_ok = dev_slope >= 3.5
    report(
        5, tau_ok and dev_ok,
        f"|tau| slope {tau_slope:.3f} need [5.5, 6.5] ({'ok' if tau_ok else 'FAIL'}); "
        f"max|delta_Z - d| slope {dev_slope:.3f} need >= 3.5 ({'ok' if dev_ok else 'FAIL'})",
    )
    assert dev_ok, dev_max
    assert tau_ok, (
        f"|tau| slope {tau_slope:.3f}: a Taylor expansion of the exact indicators gives "
        "(-3 beta_1 + 2 beta_2 + beta_3) / 6 = -u' u'''' dx^5 / 18 + O(dx^6), so the slope tends to 5"
    )


SHOCK_CASES = [
    ("blast_wave", 400, 6400, (Discretization(6, rc.JS), Discretization(5, rc.JS))),
    ("shu_osher", 400, 4000, (Discretization(6, rc.JS), Discretization(5, rc.JS))),
    ("titarev_toro", 1000, 8000, (Discretization(6, rc.Z), Discretization(6, rc.JS))),
]


def _strict_then_fallback(spec, n, disc):
    """Run as configured; if that aborts, rerun with the interface fallback for the comparison."""
    try:
        fld, _ = solve(spec, (n,), disc)
        return fld, None
    except NonPhysicalState as exc:
        fld, log = solve(spec, (n,), replace(disc, fallback=True))
        return fld, f"{disc.label} aborted at t={exc.time:.4g} (fallback rerun: {int(log.fallbacks[0])} events)"


@pytest.mark.slow
def test_criterion_6_shock_benchmarks(report):
    lines, aborts, ranked = [], [], True
    for name, n, n_ref, (better, worse) in SHOCK_CASES:
        spec = get_problem(name)
        ref = reference_solution(spec, (n_ref,))
        errors = []
        for disc in (better, worse):
            fld, abort = _strict_then_fallback(spec, n, disc)
            if abort:
                aborts.append(f"{name}: {abort}")
            errors.append(error_norms(fld, ref)[0])
        case_ok = errors[0] < errors[1]
        ranked &= case_ok
        lines.append(f"{name} {better.label} {errors[0]:.4e} < {worse.label} {errors[1]:.4e} {'ok' if case_ok else 'FAIL'}")
    ok = ranked and not aborts
    report(6, ok, "; ".join(lines + (aborts or ["no NonPhysicalState"])))
    assert ranked, lines
    assert not aborts, (
        f"{aborts}: when the two blast shocks meet, a two-cell gap at p = 0.01 sits between p = 235 and p = 35; "
        "every conserved or characteristic-variable reconstruction tried (WENO5/6, HLLC/LLF, CFL 0.5 and 0.4) yields a "
        "negative interface pressure there, and positivity limiting is outside the solver's contract"
    )


@pytest.mark.slow
def test_criterion_7_riemann2d_symmetry(report):
    fld, _ = solve(get_problem("riemann2d_shocks"), (250, 250), Discretization(6, rc.JS))
    rho = fld.interior[0]
    asym = float(np.abs(rho - rho.T).max())
    ok = asym <= 1e-6
    report(7, ok, f"max |rho(x,y) - rho(y,x)| = {asym:.3e} at 250x250, t = {fld.time}")
    assert ok


def _positive_and_finite(fld, gas):
    u = fld.interior
    kinetic = 0.5 * (u[1] ** 2 + u[2] ** 2) / u[0]
    p = (gas.gamma - 1) * (u[3] - kinetic)
    return bool(np.all(np.isfinite(u)) and np.all(u[0] > 0) and np.all(p > 0)), float(u[0].min()), float(p.min())


@pytest.mark.slow
def test_criterion_8_2d_robustness(report):
    dmr_spec = get_problem("double_mach")
    try:
        solve(dmr_spec, (480, 120), Discretization(6, rc.JS), t_end=1e-4)
        strict = "completes"
    except NonPhysicalState as exc:
        strict = f"aborts at t={exc.time:.3g} stage {exc.stage}"
    # the opt-in interface fallback is what lets the wall cusp start at all
    dmr, dmr_log = solve(dmr_spec, (480, 120), Discretization(6, rc.JS, fallback=True))
    dmr_ok, dmr_rho, dmr_p = _positive_and_finite(dmr, dmr_spec.gas)
    rt_spec = get_problem("rayleigh_taylor")
    rt, _ = solve(rt_spec, (25, 100), Discretization(6, rc.JS))
    rt_ok, rt_rho, rt_p = _positive_and_finite(rt, rt_spec.gas)
    ok = dmr_ok and rt_ok and math.isclose(dmr.time, 0.2) and math.isclose(rt.time, 2.25)
    report(
        8, ok,
        f"double_mach 480x120 t={dmr.time:.4g} steps {dmr_log.steps} min rho {dmr_rho:.3g} min p {dmr_p:.3g} "
        f"interface fallbacks {[int(v) for v in dmr_log.fallbacks]} (without fallback: {strict}); rayleigh_taylor 25x100 t={rt.time:.4g} "
        f"min rho {rt_rho:.3g} min p {rt_p:.3g} (fallback off)",
    )
    assert ok


def test_criterion_9_oracle_suite(report):
    star = star_state(np.array([1.0, 0.0, 1.0]), np.array([0.125, 0.0, 0.1]), AIR)
    sod_ok = abs(star.p - 0.30313) <= 1e-4 and abs(star.u - 0.92745) <= 1e-4
    contact = hllc_flux(np.array([1.0, 0.0, 1.0]), np.array([0.125, 0.0, 1.0]), 0, AIR)
    contact_ok = contact[0] == 0.0 and contact[1] == 1.0 and contact[2] == 0.0
    worst = 0.0
    for re in np.linspace(-3, 0.5, 15):
        for im in np.linspace(-2, 2, 15):
            a = np.array([[re, -im], [im, re]])
            out = rk3_step(np.array([1.0, 0.0]), 1.0, lambda v, t: a @ v)
            z = complex(re, im)
            expect = 1 + z + z**2 / 2 + z**3 / 6
            worst = max(worst, abs(complex(*out) - expect) / max(1.0, abs(expect)))
    rk_ok = worst <= 1e-14
    ok = sod_ok and contact_ok and rk_ok
    report(
        9, ok,
        f"Sod p* {star.p:.6f} u* {star.u:.6f}; HLLC stationary contact flux {[float(f) for f in contact]}; "
        f"RK3 amplification max rel err {worst:.1e}",
    )
    assert ok
