"""Command-line surface: simulate, monitor, hm, constants, scan.

Every subcommand that emits delimited output (CSV / JSON-lines) embeds the
fully-resolved configuration for provenance and renders a matplotlib figure
next to it.  Identical config and seed produce byte-identical snapshots and
verdict logs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import plots
from .config import RunConfig, parse_config
from .errors import MhdLabError
from .harmonic import extremal_slits, mc_harmonic_measure, solynin_lower_bound
from .initial import InitialSpec, generate_initial
from .mild import ConstantsLedger, SolverParams, calibrate_constants, picard_solve
from .monitor import CriterionParams, MonitorConfig, certify_interval
from .snapshots import Snapshot, read_snapshot, write_snapshot
from .sparseness import global_sparseness_scan, super_level_set
from .spectral import Grid

__all__ = ["run_command", "main"]


def _load_config(path: str) -> RunConfig:
    return parse_config(Path(path).read_text())


def _grid(cfg: RunConfig) -> Grid:
    return Grid(dim=cfg.dim, n=cfg.n, length=cfg.length)


def _solver(cfg: RunConfig, grid: Grid) -> SolverParams:
    return SolverParams(
        grid=grid, nu=cfg.nu, mu=cfg.mu, substeps=cfg.substeps, dealias=cfg.dealias
    )


def _initial_spec(cfg: RunConfig) -> InitialSpec:
    return InitialSpec(
        kind=cfg.initial,
        amplitude=cfg.amplitude,
        b_amplitude=cfg.b_amplitude,
        seed=cfg.seed,
        slope=cfg.slope,
        constant_value=cfg.constant_value,
        mode=cfg.mode_k,
    )


def _ledger(cfg: RunConfig, params: SolverParams, u0, b0) -> ConstantsLedger:
    if cfg.constants == "calibrate":
        samples = [(u0, b0)]
        for i in range(1, cfg.calibration_samples):
            spec = InitialSpec(
                kind="random-divfree",
                amplitude=cfg.amplitude,
                seed=cfg.seed + i,
                slope=cfg.slope,
            )
            samples.append(generate_initial(spec, params.grid))
        return calibrate_constants(samples, params, n_max=cfg.n_max, tol=cfg.tol)
    return ConstantsLedger(c1=cfg.c1, c2=cfg.c2, c3=cfg.c3, c4=cfg.c4)


def _monitor_cfg(cfg: RunConfig) -> MonitorConfig:
    return MonitorConfig(
        candidate_count=cfg.candidates,
        dir_count=cfg.dir_count,
        scale_count=cfg.scale_count,
        samples=cfg.samples,
        stride=cfg.stride,
        mc_walks=cfg.walks,
        mc_step_frac=cfg.mc_step,
        mc_seed=cfg.seed,
        picard_n_max=cfg.n_max,
        picard_tol=cfg.tol,
    )


def _comment_header(cfg: RunConfig) -> str:
    return "".join(f"# {line}\n" for line in cfg.resolved_lines())


def _outdir(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if args.outdir:
        cfg.outdir = args.outdir
    grid = _grid(cfg)
    params = _solver(cfg, grid)
    u0, b0 = generate_initial(_initial_spec(cfg), grid)
    solution, report = picard_solve(
        u0, b0, params, cfg.horizon, n_max=cfg.n_max, tol=cfg.tol
    )
    out = _outdir(cfg.outdir)
    meta = cfg.resolved_text() + f"status = {solution.status}\n"
    for i, t in enumerate(solution.times):
        write_snapshot(
            out / f"snapshot_{i:04d}.mhds",
            Snapshot(
                grid=grid,
                time=t,
                u=solution.u[i],
                b=solution.b[i],
                pressure=solution.pressure[i],
                meta=meta,
            ),
        )
    with open(out / "norms.csv", "w") as fh:
        fh.write(_comment_header(cfg))
        fh.write("time,sup_u,sup_b\n")
        for i, t in enumerate(solution.times):
            un, bn = solution.norms_at(i)
            fh.write(f"{t!r},{un!r},{bn!r}\n")
    with open(out / "convergence.csv", "w") as fh:
        fh.write(_comment_header(cfg))
        fh.write("level,increment\n")
        for i, inc in enumerate(report.increments, start=1):
            fh.write(f"{i},{inc!r}\n")
    plots.convergence_figure(report.increments, out / "convergence.png")
    plots.fields_figure(
        solution.u[-1], solution.b[-1], out / "fields.png", time=solution.times[-1]
    )
    print(
        f"simulate: {solution.status} in {solution.levels} levels, "
        f"alpha_hat = {report.alpha_hat:.4g}, wrote {len(solution.times)} snapshots to {out}"
    )
    return 0


def _cmd_monitor(args) -> int:
    cfg = _load_config(args.config)
    if args.outdir:
        cfg.outdir = args.outdir
    grid = _grid(cfg)
    params = _solver(cfg, grid)
    u0, b0 = generate_initial(_initial_spec(cfg), grid)
    ledger = _ledger(cfg, params, u0, b0)
    crit = CriterionParams.create(
        cfg.criterion,
        cfg.delta,
        ledger,
        alpha=cfg.alpha,
        gamma=cfg.gamma,
        beta=cfg.beta,
    )
    verdict = certify_interval(
        u0, b0, cfg.horizon, cfg.epsilon_resolved, crit, params, _monitor_cfg(cfg)
    )
    out = _outdir(cfg.outdir)
    with open(out / "verdict.jsonl", "w") as fh:
        fh.write(json.dumps({"config": cfg.resolved_lines()}, sort_keys=True) + "\n")
        for step in verdict.steps:
            fh.write(json.dumps(step.to_record(), sort_keys=True) + "\n")
        fh.write(
            json.dumps(
                {"status": verdict.status, "epsilon": verdict.epsilon, "steps": len(verdict.steps)},
                sort_keys=True,
            )
            + "\n"
        )
    plots.monitor_figure(verdict, out / "monitor.png")
    print(f"monitor: {verdict.status} after {len(verdict.steps)} step(s), log in {out}")
    return 0


def _cmd_hm(args) -> int:
    out = _outdir(args.outdir)
    rows = []
    for gamma in args.gamma:
        slits = extremal_slits(gamma, args.radius)
        est = mc_harmonic_measure(slits, walks=args.walks, step=args.step, seed=args.seed)
        rows.append(
            (gamma, solynin_lower_bound(gamma), est.mean, est.standard_error, est.walks, est.seed)
        )
    path = out / "hm.csv"
    with open(path, "w") as fh:
        fh.write(f"# gamma = {','.join(str(g) for g in args.gamma)}\n")
        fh.write(f"# walks = {args.walks}\n# seed = {args.seed}\n")
        fh.write(f"# radius = {args.radius}\n# step = {args.step or 'auto'}\n")
        fh.write("gamma,closed_form,mc_mean,mc_se,walks,seed\n")
        for r in rows:
            fh.write(f"{r[0]!r},{r[1]!r},{r[2]!r},{r[3]!r},{r[4]},{r[5]}\n")
    plots.hm_figure(rows, out / "hm.png")
    for r in rows:
        print(
            f"hm: gamma = {r[0]}: closed form {r[1]:.6f}, estimate {r[2]:.6f} "
            f"+/- {r[3]:.6f} ({r[4]} walks)"
        )
    return 0


def _cmd_constants(args) -> int:
    cfg = _load_config(args.config)
    if args.outdir:
        cfg.outdir = args.outdir
    grid = _grid(cfg)
    params = _solver(cfg, grid)
    u0, b0 = generate_initial(_initial_spec(cfg), grid)
    samples = [(u0, b0)]
    for i in range(1, cfg.calibration_samples):
        spec = InitialSpec(
            kind="random-divfree", amplitude=cfg.amplitude, seed=cfg.seed + i, slope=cfg.slope
        )
        samples.append(generate_initial(spec, grid))
    ledger = calibrate_constants(samples, params, n_max=cfg.n_max, tol=cfg.tol)
    out = _outdir(cfg.outdir)
    with open(out / "constants.csv", "w") as fh:
        fh.write(_comment_header(cfg))
        fh.write("constant,value,provenance\n")
        for name, value, prov in zip(
            ("c1", "c2", "c3", "c4"),
            (ledger.c1, ledger.c2, ledger.c3, ledger.c4),
            ledger.provenance,
        ):
            fh.write(f"{name},{value!r},{prov}\n")
    print(
        f"constants: c1 = {ledger.c1}, c2 = {ledger.c2}, "
        f"c3 = {ledger.c3}, c4 = {ledger.c4} ({ledger.provenance[0]})"
    )
    return 0


def _cmd_scan(args) -> int:
    snap = read_snapshot(args.snapshot)
    field = snap.u if args.field == "u" else snap.b
    if field is None:
        raise MhdLabError(f"snapshot does not carry the {args.field.upper()} field")
    level_set = super_level_set(field, args.threshold, time=snap.time)
    reports, summary = global_sparseness_scan(
        level_set,
        args.delta,
        args.scale_cap,
        args.stride,
        dir_count=args.dir_count,
        scale_count=args.scale_count,
        samples=args.samples,
    )
    out = _outdir(args.outdir)
    grid = level_set.grid
    path = out / "scan.csv"
    with open(path, "w") as fh:
        fh.write(f"# snapshot = {args.snapshot}\n")
        fh.write(f"# field = {args.field}, threshold = {args.threshold!r}, delta = {args.delta!r}\n")
        fh.write(
            f"# scale_cap = {args.scale_cap!r}, stride = {args.stride}, "
            f"dir_count = {args.dir_count or 'auto'}, scale_count = {args.scale_count}, "
            f"samples = {args.samples}\n"
        )
        idx_cols = ",".join(f"i{a}" for a in range(grid.dim))
        dir_cols = ",".join(f"d{a}" for a in range(grid.dim))
        fh.write(f"{idx_cols},sparse,ratio,{dir_cols},scale\n")
        for rep in reports:
            idx = ",".join(str(int(round(c / grid.spacing))) for c in rep.point)
            dirs = ",".join(repr(d) for d in rep.direction)
            fh.write(f"{idx},{int(rep.sparse)},{rep.ratio!r},{dirs},{rep.scale!r}\n")
    plots.scan_figure(level_set, reports, out / "scan.png")
    print(
        f"scan: {summary.points} points, {summary.failures} failures, "
        f"worst ratio {summary.worst_ratio:.4g}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhdlab",
        description="Periodic-box laboratory for mild MHD solutions and "
        "geometric regularity certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the iteration and write snapshots")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("monitor", help="run a certification chain")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir", default=None)
    p.set_defaults(func=_cmd_monitor)

    p = sub.add_parser("hm", help="compare the walk estimate to the closed form")
    p.add_argument("--gamma", type=float, nargs="+", required=True,
                   help="slit measure fraction(s) in (0, 1)")
    p.add_argument("--walks", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=1.0, help="disk radius")
    p.add_argument("--step", type=float, default=None,
                   help="absorption layer, absolute length (default radius * 1e-4)")
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_hm)

    p = sub.add_parser("constants", help="calibrate the bound constants")
    p.add_argument("--config", required=True)
    p.add_argument("--outdir", default=None)
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("scan", help="sparseness-scan a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--scale-cap", type=float, default=0.5, dest="scale_cap")
    p.add_argument("--stride", type=int, default=8)
    p.add_argument("--dir-count", type=int, default=None, dest="dir_count")
    p.add_argument("--scale-count", type=int, default=8, dest="scale_count")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--field", choices=("u", "b"), default="u")
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=_cmd_scan)
    return parser


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MhdLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
