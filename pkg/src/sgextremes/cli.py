"""Command-line front end: constants tables, tail grids, levels, and the
Monte Carlo verification gates.

Exit codes: 0 all gates pass, 1 a gate failed, 2 usage or config error,
3 numerical failure (quadrature, bracketing, or embedding trouble).

Experiment configs are JSON files mirroring
:meth:`sgextremes.montecarlo.ExperimentConfig.to_dict`; command-line flags
override file values.  Reports are written append-only into the run
directory (existing files are never overwritten) together with a manifest
carrying timestamps and the resolved config, which is sufficient to
reproduce the run bit-exactly.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ._version import __version__
from .correlation import model_from_config
from .gaussian import EmbeddingNotPSD, sample_path, write_path_csv
from .montecarlo import (
    ExperimentConfig,
    berman_sum,
    run_block_test,
    run_independence_test,
    run_joint_order_test,
    run_poisson_test,
)
from .pointproc import extract, scale_path, write_pattern_csv
from .scaling import NoConvergence, dist_from_config, sample_scales
from .tails import (
    NoBracket,
    QuadratureFailure,
    asymptotic_level,
    norming_constants,
    product_constants,
    product_tail_oracle,
    product_tail_report,
    scaled_product_constants,
    solve_level,
)

_NUMERIC_ERRORS = (QuadratureFailure, NoBracket, EmbeddingNotPSD, NoConvergence)

_DEFAULT_MODEL = {"family": "geometric", "r": 0.5}
_DEFAULT_DIST = {"kind": "weibullian", "L": 1.0, "p": 1.0, "alpha": 0.0, "Cc": 1.0}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgextremes",
        description="Exceedance point processes of randomly scaled stationary "
        "Gaussian sequences: constants, tail grids, levels, and Monte Carlo gates.",
    )
    parser.add_argument("--version", action="version", version=f"sgextremes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="product-tail and norming constants")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--n", type=int, action="append", help="lengths for norming constants")
    p.add_argument("--q", type=float, help="Weibull exponent of the auxiliary factor")
    p.add_argument("--Ln", type=float, help="Weibull rate of the auxiliary factor")
    p.add_argument("--json", metavar="PATH", help="also write a JSON summary ('-' = stdout)")

    p = sub.add_parser("tail", help="asymptotic-vs-oracle grid for P(S*X > u)")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--u", type=float, action="append", help="explicit level (repeatable)")
    p.add_argument(
        "--prob",
        type=float,
        action="append",
        help="pick the level where the asymptotic equals this value (repeatable)",
    )
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")
    p.add_argument("--json", metavar="PATH", help="also write a JSON summary ('-' = stdout)")

    p = sub.add_parser("levels", help="solve n * P(Y > u) = exp(-x) for u")
    p.add_argument("--dist-json", default=json.dumps(_DEFAULT_DIST), help="scale law as JSON")
    p.add_argument("--n", type=int, action="append", required=True)
    p.add_argument("--x", type=float, action="append", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", metavar="PATH", help="CSV output path (default stdout)")

    p = sub.add_parser("verify", help="Monte Carlo verification gates")
    p.add_argument(
        "which",
        choices=["poisson", "joint", "independence", "blocks", "berman-sum"],
    )
    p.add_argument("--config", metavar="PATH", help="experiment config JSON")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--threads", type=int, help="worker count override")
    p.add_argument("--out", default="runs", help="run directory (default: runs)")
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--theta", type=float, action="append", help="block fraction (repeatable)")
    p.add_argument("--n-grid", type=int, action="append", help="trend grid entry (repeatable)")
    p.add_argument("--closed-form-levels", action="store_true")
    p.add_argument("--tol", type=float, help="quadrature tolerance for berman-sum")

    p = sub.add_parser("simulate", help="dump raw path / scaled path / pattern CSVs")
    p.add_argument("--model-json", default=json.dumps(_DEFAULT_MODEL))
    p.add_argument("--dist-json", default=json.dumps(_DEFAULT_DIST))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--u1", type=float, help="mark-1 level for the pattern dump")
    p.add_argument("--u2", type=float, help="mark-2 level for the pattern dump")
    p.add_argument("--out", default="runs", help="output directory")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "constants":
            return _cmd_constants(args)
        if args.command == "tail":
            return _cmd_tail(args)
        if args.command == "levels":
            return _cmd_levels(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        parser.error(f"unknown command {args.command!r}")
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_constants(args) -> int:
    c = product_constants(args.L, args.p)
    lines = [f"Q = {c.Q:.12g}", f"T = {c.T:.12g}"]
    summary = {"L": args.L, "p": args.p, "alpha": args.alpha, "C": args.C, "Q": c.Q, "T": c.T}
    if args.n:
        summary["norming"] = []
        for n in args.n:
            nc = norming_constants(args.L, args.p, args.alpha, args.C, n)
            cl = norming_constants(args.L, args.p, args.alpha, args.C, n, classical=True)
            lines.append(
                f"n = {n}: a_n = {nc.a_n:.12g}, b_n = {nc.b_n:.12g} "
                f"(classical: a = {cl.a_n:.12g}, b = {cl.b_n:.12g})"
            )
            summary["norming"].append(
                {"n": n, "a_n": nc.a_n, "b_n": nc.b_n, "a_classical": cl.a_n, "b_classical": cl.b_n}
            )
    if args.q is not None or args.Ln is not None:
        if args.q is None or args.Ln is None:
            raise ValueError("--q and --Ln must be given together")
        sc = scaled_product_constants(args.L, args.p, args.q, args.Ln)
        lines.append(f"q = {sc.q:g}, L_n = {sc.L_n:g}: A_n = {sc.A_n:.12g}, D_n = {sc.D_n:.12g}")
        summary["scaled"] = {"q": sc.q, "L_n": sc.L_n, "A_n": sc.A_n, "D_n": sc.D_n}
    print("\n".join(lines))
    if args.json:
        _write_text(args.json, json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_tail(args) -> int:
    dist = dist_from_config(
        {"kind": "weibullian", "L": args.L, "p": args.p, "alpha": args.alpha, "Cc": args.C}
    )
    levels = list(args.u or [])
    for prob in args.prob or []:
        levels.append(asymptotic_level(args.L, args.p, args.alpha, args.C, prob))
    if not levels:
        raise ValueError("give at least one --u or --prob")
    rows = [product_tail_report(dist, u, args.tol) for u in sorted(levels)]
    out = ["u,asymptotic,oracle,ratio"]
    for r in rows:
        out.append(f"{r.u!r},{r.asymptotic!r},{r.oracle!r},{r.ratio!r}")
    _write_text(args.out, "\n".join(out) + "\n")
    if args.json:
        summary = {
            "dist": {"L": args.L, "p": args.p, "alpha": args.alpha, "Cc": args.C},
            "rows": [
                {"u": r.u, "asymptotic": r.asymptotic, "oracle": r.oracle, "ratio": r.ratio}
                for r in rows
            ],
        }
        _write_text(args.json, json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_levels(args) -> int:
    dist = dist_from_config(json.loads(args.dist_json))
    out = ["n,x,u,relative_residual"]
    for n in args.n:
        for x in args.x:
            u = solve_level(dist, n, x, args.tol)
            resid = abs(n * product_tail_oracle(dist, u, args.tol) - np.exp(-x)) / np.exp(-x)
            out.append(f"{n},{x!r},{u!r},{resid!r}")
    _write_text(args.out, "\n".join(out) + "\n")
    return 0


def _load_experiment_config(args) -> ExperimentConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    base.setdefault("model", _DEFAULT_MODEL)
    base.setdefault("dist", _DEFAULT_DIST)
    base.setdefault("n", 2**14)
    base.setdefault("reps", 400)
    if args.n is not None:
        base["n"] = args.n
    if args.reps is not None:
        base["reps"] = args.reps
    if args.x is not None or args.y is not None:
        x = args.x if args.x is not None else 0.0
        y = args.y if args.y is not None else 0.0
        base["levels"] = [[x, y]]
    if args.k is not None:
        base["k"] = args.k
    if args.l is not None:
        base["l"] = args.l
    if args.theta:
        base["block_fractions"] = list(args.theta)
    if args.n_grid:
        base["n_grid"] = sorted(args.n_grid)
    if args.closed_form_levels:
        base["closed_form_levels"] = True
    if args.seed is not None:
        base["master_seed"] = args.seed
    threads = args.threads if args.threads is not None else 1
    return ExperimentConfig.from_dict(base, threads=threads)


def _next_free_stem(out_dir: Path, base: str) -> Path:
    for i in range(10000):
        stem = out_dir / f"{base}-{i:03d}"
        if not stem.with_suffix(".json").exists():
            return stem
    raise OSError(f"run directory {out_dir} is full for base {base}")


def _persist_report(report, config: ExperimentConfig, args, kind: str) -> Path:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = _next_free_stem(out_dir, f"{kind}-{config.digest}-s{config.master_seed}")
    report_path = stem.with_suffix(".json")
    report_path.write_text(report.to_json())
    with open(stem.parent / (stem.name + ".gates.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "empirical", "target", "se", "z", "deviation", "gap", "passed"])
        for g in report.gates:
            w.writerow(
                [
                    g.get("name"),
                    g.get("empirical"),
                    g.get("target"),
                    g.get("se"),
                    g.get("z"),
                    g.get("deviation"),
                    g.get("gap"),
                    g.get("passed"),
                ]
            )
    manifest = {
        "config_path": args.config,
        "resolved_config": config.to_dict(),
        "out_dir": str(out_dir),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "tool_version": __version__,
        "master_seed": config.master_seed,
        "threads": config.threads,
        "report_file": report_path.name,
    }
    (stem.parent / (stem.name + ".manifest.json")).write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )
    return report_path


def _cmd_verify(args) -> int:
    config = _load_experiment_config(args)
    if args.which == "berman-sum":
        return _cmd_verify_berman(args, config)
    runner = {
        "poisson": run_poisson_test,
        "joint": run_joint_order_test,
        "independence": run_independence_test,
        "blocks": run_block_test,
    }[args.which]
    report = runner(config)
    path = _persist_report(report, config, args, args.which)
    for g in report.gates:
        status = "PASS" if g.get("passed", True) else "FAIL"
        print(f"{status} {g['name']}")
    print(f"report: {path}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


def _cmd_verify_berman(args, config: ExperimentConfig) -> int:
    from .montecarlo import ExperimentReport

    n_values = list(config.n_grid) if config.n_grid else [config.n]
    x = config.levels[0][0]
    tol = args.tol if args.tol is not None else 1e-9
    details = [
        berman_sum(config.model, config.dist, n, x, tol=tol, return_detail=True)
        for n in n_values
    ]
    values = [d.value for d in details]
    gated = bool(getattr(config.model, "berman_ok", False))
    decreasing = all(values[i + 1] < values[i] for i in range(len(values) - 1))
    report = ExperimentReport(
        kind="berman-sum",
        tool_version=__version__,
        master_seed=config.master_seed,
        config=config.to_dict(),
        config_digest=config.digest,
    )
    report.add(
        {
            "name": f"berman-sum[x={x}]",
            "n_grid": n_values,
            "values": values,
            "levels": [d.level for d in details],
            "truncation_bounds": [d.truncation_bound for d in details],
            "gated": gated,
            "gate": "strictly decreasing along n_grid"
            + ("" if gated else " (diagnostic only: model fails the decay hypothesis)"),
            "passed": bool(decreasing) if gated else True,
            "decreasing": bool(decreasing),
        }
    )
    path = _persist_report(report, config, args, "berman-sum")
    for n, v in zip(n_values, values):
        print(f"n={n}: sum={v:.6e}")
    print(f"report: {path}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return 0 if report.passed else 1


def _cmd_simulate(args) -> int:
    model = model_from_config(json.loads(args.model_json))
    dist = dist_from_config(json.loads(args.dist_json))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    gauss = sample_path(model, args.n, seed=args.seed, stream_id=2 * args.stream)
    scales = sample_scales(dist, args.n, seed=args.seed, stream_id=2 * args.stream + 1)
    scaled = scale_path(gauss, scales, dist=dist)
    base = f"sim-n{args.n}-s{args.seed}-r{args.stream}"
    with open(out_dir / f"{base}-path.csv", "w", newline="") as fh:
        write_path_csv(gauss, fh)
    with open(out_dir / f"{base}-scaled.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value"])
        for v in scaled.values:
            w.writerow([repr(float(v))])
    written = [f"{base}-path.csv", f"{base}-scaled.csv"]
    if args.u1 is not None or args.u2 is not None:
        u1 = args.u1 if args.u1 is not None else float("inf")
        u2 = args.u2 if args.u2 is not None else float("inf")
        pattern = extract(scaled, u1, u2)
        with open(out_dir / f"{base}-pattern.csv", "w", newline="") as fh:
            write_pattern_csv(pattern, fh)
        written.append(f"{base}-pattern.csv")
    for name in written:
        print(f"wrote {out_dir / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
