"""``mems <command> --config <path> [--out <dir>]``.

Exit codes: 0 success (a Touchdown answer included), 1 invalid input,
2 solver failure, 3 a failed property in ``verify``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .cli_io import (
    DEFAULT_CONFIG,
    ConfigError,
    CsvTable,
    RunConfig,
    parse_config,
    write_columns,
    write_csv,
    write_text,
)
from .core import MonotonicityError, ProfileError, SolveOptions, make_profile, solve_minimal
from .geometry import build_grid
from .operators import MMatrixError, SolverError, assemble
from .regimes import classify, in_I_gamma
from .verify import format_report, run_suite

__all__ = ["COMMANDS", "run_command", "main"]

COMMANDS = ("solve", "pullin", "sweep", "stability", "decay", "extremal", "classify", "verify")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3


def _setup(cfg: RunConfig):
    cfg.require("domain", "n")
    grid = build_grid(cfg.domain, cfg.n)
    op = assemble(grid)
    prof = make_profile(grid, cfg.gamma, cfg.kappa, cfg.shape)
    opts = SolveOptions(tol=cfg.tol, max_iter=cfg.max_iter, touch_eps=cfg.touch_eps, epsilon=cfg.epsilon)
    return grid, op, prof, opts


def _coord_columns(cfg: RunConfig, grid) -> tuple[list[str], np.ndarray]:
    names = ["x", "y"][: grid.dim]
    origin = np.zeros(grid.dim)
    origin[: len(cfg.origin)] = cfg.origin[: grid.dim]
    return names, grid.coords + origin


def _field_table(cfg: RunConfig, grid, columns: dict[str, np.ndarray]) -> CsvTable:
    names, xy = _coord_columns(cfg, grid)
    table = CsvTable(names + list(columns))
    data = np.column_stack([xy] + [np.asarray(v, dtype=float) for v in columns.values()])
    for row in data:
        table.add(*row)
    return table


def _require_existence(cfg: RunConfig) -> None:
    if not in_I_gamma(cfg.gamma, cfg.p):
        raise ConfigError([f"p = {cfg.p!r} is outside the existence range for gamma = {cfg.gamma!r}"])


def _cmd_solve(cfg: RunConfig, out: Path, log) -> int:
    cfg.require("lambda")
    grid, op, prof, opts = _setup(cfg)
    res = solve_minimal(op, prof, cfg.p, cfg.lam, opts)
    gap = prof.a + cfg.epsilon - res.u
    write_csv(out / "solution.csv",
              _field_table(cfg, grid, {"rho": prof.rho, "a": prof.a, "u": res.u, "gap": gap}), cfg.digest)
    summary = CsvTable(["status", "lambda", "p", "epsilon", "iterations", "tol", "residual", "sup_u", "min_gap"])
    summary.add(res.status, res.lam, res.p, res.epsilon, res.iterations, res.tol, res.residual,
                float(res.u.max()), float(gap.min()))
    write_csv(out / "summary.csv", summary, cfg.digest)
    if grid.dim == 1:
        _, xy = _coord_columns(cfg, grid)
        write_columns(out / "u_profile.dat", xy[:, 0], res.u, cfg.digest)
    log(f"status = {res.status.value}")
    log(f"iterations = {res.iterations}")
    return EXIT_OK


def _cmd_pullin(cfg: RunConfig, out: Path, log) -> int:
    _require_existence(cfg)
    _, op, prof, opts = _setup(cfg)
    pr = analysis.find_pullin(op, prof, cfg.p, cfg.rel_tol, opts)
    table = CsvTable(["lambda_hash", "lambda_lo", "lambda_hi", "lambda_upper", "midpoint",
                      "rel_width", "undecided", "solves"])
    table.add(pr.lambda_hash, pr.lambda_lo, pr.lambda_hi, pr.lambda_upper, pr.midpoint,
              pr.rel_width, pr.undecided_count, pr.solves)
    write_csv(out / "pullin.csv", table, cfg.digest)
    log(f"lambda_lo = {pr.lambda_lo:.10g}")
    log(f"lambda_hi = {pr.lambda_hi:.10g}")
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, out: Path, log) -> int:
    _, op, prof, opts = _setup(cfg)
    lambdas = cfg.sweep_lambdas()
    existence = in_I_gamma(cfg.gamma, cfg.p)
    records = analysis.sweep_lambda(op, prof, cfg.p, lambdas, opts,
                                    with_stability=existence, with_decay=existence)
    table = CsvTable(["lambda", "status", "sup_norm_u", "min_gap", "mu1", "decay_exponent"])
    for r in records:
        table.add(r.lam, r.status, r.sup_norm_u, r.min_gap, r.mu1, r.decay_exponent)
    write_csv(out / "sweep.csv", table, cfg.digest)
    conv = [r for r in records if r.status.value == "Converged"]
    write_columns(out / "sweep_sup_u.dat", [r.lam for r in conv], [r.sup_norm_u for r in conv], cfg.digest)
    log(f"converged = {len(conv)} of {len(records)}")
    return EXIT_OK


def _converged_solution(cfg: RunConfig, op, prof, opts):
    cfg.require("lambda")
    res = solve_minimal(op, prof, cfg.p, cfg.lam, opts)
    if not res.converged:
        raise SolverError(f"solve at lambda = {cfg.lam!r} ended with {res.status.value}")
    return res


def _cmd_stability(cfg: RunConfig, out: Path, log) -> int:
    grid, op, prof, opts = _setup(cfg)
    res = _converged_solution(cfg, op, prof, opts)
    rep = analysis.stability(op, prof, cfg.p, cfg.lam, res.u, cfg.epsilon, cfg.eig_tol)
    table = CsvTable(["lambda", "mu1", "stable", "margin", "lower", "upper", "iterations", "residual"])
    table.add(cfg.lam, rep.mu1, rep.stable, rep.margin, rep.eigen.lower, rep.eigen.upper,
              rep.eigen.iterations, rep.eigen.residual)
    write_csv(out / "stability.csv", table, cfg.digest)
    write_csv(out / "eigenfield.csv", _field_table(cfg, grid, {"phi": rep.phi}), cfg.digest)
    if grid.dim == 1:
        _, xy = _coord_columns(cfg, grid)
        write_columns(out / "eigenfield.dat", xy[:, 0], rep.phi, cfg.digest)
    log(f"mu1 = {rep.mu1:.10g}")
    log(f"stable = {str(rep.stable).lower()}")
    return EXIT_OK


def _cmd_decay(cfg: RunConfig, out: Path, log) -> int:
    grid, op, prof, opts = _setup(cfg)
    res = _converged_solution(cfg, op, prof, opts)
    fit = analysis.fit_boundary_decay(grid, res.u, cfg.gamma, cfg.p)
    table = CsvTable(["lambda", "exponent", "intercept", "rho_min", "rho_max", "r2", "nodes", "log_corrected"])
    table.add(cfg.lam, fit.exponent, fit.intercept, fit.window[0], fit.window[1], fit.r2, fit.nodes,
              fit.log_corrected)
    write_csv(out / "decay.csv", table, cfg.digest)
    log(f"exponent = {fit.exponent:.10g}")
    return EXIT_OK


def _cmd_extremal(cfg: RunConfig, out: Path, log) -> int:
    _require_existence(cfg)
    _, op, prof, opts = _setup(cfg)
    if cfg.lambdas is not None or cfg.lambda_min is not None:
        lambdas = cfg.sweep_lambdas()
    else:
        lo = analysis.find_pullin(op, prof, cfg.p, cfg.rel_tol, opts).lambda_lo
        lambdas = [f * lo for f in (0.9, 0.99, 0.999)]
    beta = cfg.beta if cfg.beta is not None else cfg.gamma / 2
    probe = analysis.extremal_probe(op, prof, cfg.p, lambdas, beta, cfg.q, cfg.r, opts)
    table = CsvTable(["lambda", "status", "I_beta", "J_q", "min_gap_3r"])
    for r in probe.records:
        table.add(r.lam, r.status, r.I_beta, r.J_q, r.min_gap_3r)
    write_csv(out / "extremal.csv", table, cfg.digest)
    log(f"I_bounded = {str(probe.I_bounded).lower()}")
    log(f"J_bounded = {str(probe.J_bounded).lower()}")
    return EXIT_OK


def _cmd_classify(cfg: RunConfig, out: Path, log) -> int:
    text = classify(cfg.gamma, cfg.p, cfg.dimension()).to_text()
    write_text(out / "classify.txt", text, cfg.digest)
    for line in text.splitlines():
        log(line)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig, out: Path, log) -> int:
    results = run_suite(cfg.domain, cfg.n or 128, cfg.gamma, cfg.p, cfg.kappa, cfg.shape)
    report = format_report(results)
    write_text(out / "verify.txt", report, cfg.digest)
    table = CsvTable(["property", "result", "detail"])
    for r in results:
        table.add(r.name, r.label, r.detail)
    write_csv(out / "verify.csv", table, cfg.digest)
    for line in report.splitlines():
        log(line)
    return EXIT_VERIFY if any(r.passed is False for r in results) else EXIT_OK


_HANDLERS = {
    "solve": _cmd_solve,
    "pullin": _cmd_pullin,
    "sweep": _cmd_sweep,
    "stability": _cmd_stability,
    "decay": _cmd_decay,
    "extremal": _cmd_extremal,
    "classify": _cmd_classify,
    "verify": _cmd_verify,
}


def run_command(cmd: str, cfg: RunConfig, out: str | Path | None = None, log=print) -> int:
    """Run one command and return its exit status; files go to ``out``."""
    if cmd not in _HANDLERS:
        raise ValueError(f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}")
    out = Path(out if out is not None else (cfg.out or "."))
    try:
        return _HANDLERS[cmd](cfg, out, log)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverError, analysis.PullInError, MonotonicityError, MMatrixError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, ProfileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mems", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="key = value file (verify defaults to the reference problem)")
    parser.add_argument("--out", type=Path, help="output directory (default: 'out' key, else the cwd)")
    args = parser.parse_args(argv)

    if args.config is None:
        if args.command != "verify":
            parser.error("--config is required for this command")
        text = DEFAULT_CONFIG
    else:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_INVALID
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return run_command(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
