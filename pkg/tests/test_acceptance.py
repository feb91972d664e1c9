"""Acceptance criteria 1-13, each at its stated tolerance.

Every test records a one-line PASS/FAIL summary (shown at the end of the
pytest run) before asserting.
"""
import math
import subprocess
import sys

import numpy as np
import pytest

import closedmems.analysis as analysis_mod
import closedmems.core as core_mod
from closedmems import (
    Domain,
    SolveOptions,
    SolveStatus,
    assemble,
    build_grid,
    extremal_probe,
    find_pullin,
    fit_boundary_decay,
    green_apply,
    holder_alpha,
    lambda_hash,
    lambda_upper_bound,
    make_profile,
    p_sharp,
    p_star,
    q_sharp,
    stability,
    sweep_lambda,
    varrho_tau,
    f0,
)
from closedmems.analysis import lambda_p0_limit

_SOLVES = []
_solve = core_mod.solve_minimal


def solve_minimal(*args, **kwargs):
    res = _solve(*args, **kwargs)
    _SOLVES.append(res)
    return res


@pytest.fixture(scope="module", autouse=True)
def _record_all_solves():
    # every solve in this module, including those inside the analysis layer
    saved = analysis_mod.solve_minimal
    analysis_mod.solve_minimal = solve_minimal
    yield
    analysis_mod.solve_minimal = saved


_CACHE = {}


def interval(n, gamma=0.5):
    key = (n, gamma)
    if key not in _CACHE:
        grid = build_grid(Domain.interval(1.0), n)
        _CACHE[key] = (grid, assemble(grid), make_profile(grid, gamma))
    return _CACHE[key]


def pullin(n, gamma, p):
    key = ("pull", n, gamma, p)
    if key not in _CACHE:
        _, op, prof = interval(n, gamma)
        _CACHE[key] = find_pullin(op, prof, p)
    return _CACHE[key]


def _midpoint_error(n):
    grid = build_grid(Domain.interval(1.0), n)
    u = green_apply(assemble(grid), np.ones(grid.size))
    x = grid.coords[:, 0]
    exact = x * (1 - x) / 2
    xs = np.concatenate(([0.0], x, [1.0]))
    us = np.concatenate(([0.0], u, [0.0]))
    xm, um = 0.5 * (xs[1:] + xs[:-1]), 0.5 * (us[1:] + us[:-1])
    return float(np.abs(u - exact).max()), float(np.abs(um - xm * (1 - xm) / 2).max())


def test_c01_green_oracle(criterion):
    nod64, e64 = _midpoint_error(64)
    nod128, e128 = _midpoint_error(128)
    ratio = e64 / e128
    ok = e64 <= 1e-3 and abs(ratio - 4) <= 0.8 and max(nod64, nod128) <= 1e-12
    assert criterion(1, ok, f"Green oracle: err(64)={e64:.3e}, ratio={ratio:.4f}, nodal err={max(nod64, nod128):.1e}")


def test_c02_green_weight_band(criterion):
    details, ok = [], True
    for tau in (0.5, 1.0, 1.5):
        bands = []
        for n in (256, 512):
            grid, op, _ = interval(n)
            rho = make_profile(grid, 1.0).rho
            r = green_apply(op, rho ** (tau - 2)) / varrho_tau(grid, tau)
            bands.append((r.min(), r.max()))
        (a0, b0), (a1, b1) = bands
        ch = max(abs(a1 / a0 - 1), abs(b1 / b0 - 1))
        ok &= a0 > 0 and a1 > 0 and ch < 0.1
        details.append(f"tau={tau}: [{a1:.4f}, {b1:.4f}] change {100 * ch:.2f}%")
    assert criterion(2, ok, "G[rho^(tau-2)]/varrho band: " + "; ".join(details))


@pytest.mark.parametrize("gamma,p", [(0.5, 1.0), (0.5, 3.0), (1.0, 0.5)])
def test_c04_guaranteed_solvability(criterion, gamma, p):
    _, op, prof = interval(256, gamma)
    lam = lambda_hash(op, prof, p)
    res = solve_minimal(op, prof, p, lam)
    mu_star = 1.0 / (p + 1)
    ok = res.converged and bool((res.u <= mu_star * prof.rho ** gamma).all())
    margin = float((res.u / prof.rho ** gamma).max())
    prev = _C04.get("ok", True)
    _C04["ok"] = prev and ok
    _C04.setdefault("d", []).append(f"({gamma},{p}) {res.status.value} max u/rho^g={margin:.4f}<= {mu_star:.4f}")
    assert criterion(4, _C04["ok"], "lambda_hash solvable: " + "; ".join(_C04["d"]))


_C04 = {}


def test_c05_bracket_consistency(criterion):
    brackets = []
    ok = True
    for n in (256, 512):
        _, op, prof = interval(n)
        pr = pullin(n, 0.5, 1.0)
        ok &= pr.lambda_hash <= pr.lambda_lo < pr.lambda_hi <= pr.lambda_upper
        brackets.append(pr)
    move = abs(brackets[1].midpoint / brackets[0].midpoint - 1)
    ok &= move < 0.02
    b0, b1 = brackets
    assert criterion(5, ok, f"bracket n=256 [{b0.lambda_lo:.6f}, {b0.lambda_hi:.6f}], "
                            f"n=512 [{b1.lambda_lo:.6f}, {b1.lambda_hi:.6f}], midpoint moves {100 * move:.3f}%")


def test_c06_stability_program(criterion):
    _, op, prof = interval(256)
    lo = pullin(256, 0.5, 1.0).lambda_lo
    mus = {}
    for f in (0.25, 0.5, 0.75, 0.9, 0.999):
        res = solve_minimal(op, prof, 1.0, f * lo)
        assert res.converged
        mus[f] = stability(op, prof, 1.0, f * lo, res.u).mu1
    seq = [mus[f] for f in (0.25, 0.5, 0.75, 0.9)]
    ok = all(m > 0 for m in seq) and all(b < a for a, b in zip(seq, seq[1:]))
    ok &= mus[0.999] < 0.2 * mus[0.25]
    text = ", ".join(f"{f}:{m:.4f}" for f, m in mus.items())
    assert criterion(6, ok, f"mu1 at fractions of lambda_lo: {text}")


def test_c07_monotonicity_comparison(criterion):
    _, op, prof = interval(256)
    lo = pullin(256, 0.5, 1.0).lambda_lo
    u_lam = [solve_minimal(op, prof, 1.0, f * lo) for f in (0.2, 0.4, 0.6, 0.8)]
    inc_lam = all(r.converged for r in u_lam) and all((b.u >= a.u).all() for a, b in zip(u_lam, u_lam[1:]))

    lam_p = 0.9 * pullin(256, 0.5, 3.0).lambda_lo  # solvable for every p below
    u_p = [solve_minimal(op, prof, p, lam_p) for p in (0.5, 1.0, 2.0, 3.0)]
    dec_p = all(r.converged for r in u_p) and all((b.u <= a.u).all() for a, b in zip(u_p, u_p[1:]))
    inc_p = all((b.u >= a.u).all() for a, b in zip(u_p, u_p[1:]))

    base = solve_minimal(op, prof, 1.0, 0.5 * lo)
    ws = [solve_minimal(op, prof, 1.0, 0.5 * lo, SolveOptions(epsilon=10.0 ** -k)) for k in range(1, 7)]
    dec_eps = all(w.converged for w in ws) and all((b.u >= a.u).all() for a, b in zip(ws, ws[1:]))
    below = all((w.u <= base.u).all() for w in ws)
    devs = [float(np.abs(w.u - base.u).max()) for w in ws]
    dev_dec = all(b < a for a, b in zip(devs, devs[1:]))

    ok = inc_lam and dec_p and dec_eps and below and dev_dec
    assert criterion(7, ok, f"u up in lambda: {inc_lam}; u down in p: {dec_p} (observed u up in p: {inc_p}); "
                            f"w down in eps: {dec_eps}; w<=u: {below}; sup|w-u| decreasing: {dev_dec}")


def test_c08_decay_exponent(criterion):
    fits = {}
    for n in (256, 512, 1024, 2048):
        grid, op, prof = interval(n)
        res = solve_minimal(op, prof, 1.0, 0.3 * pullin(n, 0.5, 1.0).lambda_lo)
        fits[n] = fit_boundary_decay(grid, res.u, 0.5, 1.0).exponent
    grid, op, prof = interval(1024)
    res3 = solve_minimal(op, prof, 3.0, 0.3 * pullin(1024, 0.5, 3.0).lambda_lo)
    e3 = fit_boundary_decay(grid, res3.u, 0.5, 3.0).exponent
    ok = abs(fits[2048] - 1.0) <= 0.1 and 0.4 <= e3 <= 0.6
    seq = ", ".join(f"n={n}:{e:.4f}" for n, e in fits.items())
    assert criterion(8, ok, f"p=1 exponent (n=2048) {fits[2048]:.4f} [refinement {seq}]; p=3 exponent {e3:.4f}")


def test_c09_nonexistence(criterion):
    counts = {}
    for gamma, p in ((1.5, 1.0), (0.5, 4.0)):
        for n in (256, 512):
            _, op, prof = interval(n, gamma)
            scale = lambda_p0_limit(op, prof) if p >= 2 / gamma else lambda_upper_bound(op, prof, p)
            lams = [scale * 10.0 ** k for k in range(-6, 1)]
            recs = sweep_lambda(op, prof, p, lams, with_stability=False, with_decay=False)
            conv = [r.lam / scale for r in recs if r.status is SolveStatus.CONVERGED]
            counts[(gamma, p, n)] = conv
    ok = all(len(v) == 0 for v in counts.values())
    text = "; ".join(f"g={g},p={p},n={n}: {len(v)} converged (max {max(v, default=0):.0e}x scale)"
                     for (g, p, n), v in counts.items())
    assert criterion(9, ok, "nonexistence sweep: " + text)


def test_c10_classifier_identities(criterion):
    closed = p_star(0.5) == 3.0 and p_star(1.0) == 1.0 and math.isinf(p_sharp(6)) and p_sharp(11) == 1 / 3
    dev_p = max(abs(f0(p_sharp(N)) - N) for N in range(7, 13))
    dev_q = max(abs(f0(q_sharp(N)) - N / 2) for N in range(13, 17))
    dev_a = max(abs(holder_alpha(p_sharp(N), N) - 1) for N in range(7, 13))
    ok = closed and dev_p <= 1e-10 and dev_q <= 1e-10 and dev_a <= 1e-10
    assert criterion(10, ok, f"closed forms: {closed}; max|f0(p_sharp)-N|={dev_p:.3g}; "
                             f"max|f0(q_sharp)-N/2|={dev_q:.3g}; max|alpha(p_sharp)-1|={dev_a:.3g}")


def test_c11_lambda_star_trends(criterion):
    b1 = [pullin(256, 1.0, p) for p in (0.5, 0.7, 0.9, 0.95)]
    b05 = [pullin(256, 0.5, p) for p in (0.5, 1.0, 2.0, 3.0)]
    # strict: the whole later bracket lies below the earlier one
    strict = all(b.lambda_hi < a.lambda_lo for a, b in zip(b1, b1[1:]))
    nonincr = all(b.lambda_lo <= a.lambda_hi for a, b in zip(b05, b05[1:]))
    ok = strict and nonincr
    assert criterion(11, ok, "gamma=1: " + ", ".join(f"{b.midpoint:.4f}" for b in b1)
                     + "; gamma=0.5: " + ", ".join(f"{b.midpoint:.4f}" for b in b05))


def test_c12_extremal_probes(criterion):
    floors, ok, text = [], True, []
    for n in (256, 512):
        _, op, prof = interval(n)
        lo = pullin(n, 0.5, 1.0).lambda_lo
        probe = extremal_probe(op, prof, 1.0, [f * lo for f in (0.9, 0.99, 0.999)], 0.25, 2.0, 0.1)
        assert not probe.q_exceeds_f0
        floor = min(r.min_gap_3r for r in probe.records)
        floors.append(floor)
        ok &= probe.I_bounded and probe.J_bounded and floor > 0
        text.append(f"n={n}: I={[round(r.I_beta, 3) for r in probe.records]} "
                    f"J={[round(r.J_q, 3) for r in probe.records]} gap floor={floor:.4f}")
    ok &= abs(floors[1] / floors[0] - 1) < 0.1
    assert criterion(12, ok, "; ".join(text))


def test_c13_verify_deterministic(criterion, tmp_path):
    outs = []
    for d in ("a", "b"):
        proc = subprocess.run([sys.executable, "-m", "closedmems.cli", "verify", "--out", str(tmp_path / d)],
                              capture_output=True)
        files = {p.name: p.read_bytes() for p in sorted((tmp_path / d).iterdir())}
        outs.append((proc.returncode, proc.stdout, files))
    ok = outs[0] == outs[1] and len(outs[0][2]) == 2
    assert criterion(13, ok, f"two verify runs byte-identical: {ok} (exit code {outs[0][0]})")


def test_c03_monotone_iteration_everywhere(criterion):
    # runs last: checks every solve made by this module
    extra = []
    for dom, n in ((Domain.rectangle(1.0, 1.0), 64), (Domain.disk(1.0), 64)):
        grid = build_grid(dom, n)
        op, prof = assemble(grid), make_profile(grid, 0.5)
        pr = find_pullin(op, prof, 1.0, rel_tol=1e-2)
        extra.append(solve_minimal(op, prof, 1.0, 0.99 * pr.lambda_lo))
    converged = [r for r in _SOLVES if r.converged]
    ok = all(r.monotone_violations == 0 and (r.trace_increment >= 0).all() for r in converged)
    ok &= all(r.converged for r in extra)
    assert criterion(3, ok, f"{len(converged)} converged solves, violations="
                            f"{sum(r.monotone_violations for r in converged)}")
