"""Command-line front end.

Subcommands: estimate | admissibility | simulate | analyze. Every run
serializes a manifest next to its outputs naming the resolved parameters,
the master seed, and every file written; reruns with equal manifests
produce byte-identical outputs (nothing time-dependent is emitted).

Exit codes: 0 success, 2 usage error, 1 runtime/numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .admissibility import bounds, classify
from .analysis import DatasetError, analyze, bundled_dataset_path, fit, load_dataset
from .core import CovarianceSpec, InvalidParameterError, LinexError, LinexParams, ObservationPair
from .estimators import EstimatorSpec, PriorSpec, est_bayes, est_shift, evaluate
from .improvement import applicable_case, case_label, improve
from .risksim import TABLE_SPECS, TableSpec, table_columns, risk_grid
from .selection import select


class UsageError(Exception):
    pass


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{what} expects {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"{what}: could not parse {text!r} as numbers") from None


def _cov_from_flag(text: str) -> CovarianceSpec:
    sxx, sxy, syy = _floats(text, 3, "--cov")
    try:
        return CovarianceSpec(sigma_xx=sxx, sigma_yy=syy, sigma_xy=sxy)
    except InvalidParameterError as exc:
        raise UsageError(f"--cov: {exc}") from None


def _a_from_flag(value: float) -> LinexParams:
    if value == 0:
        raise UsageError("a must be nonzero")
    return LinexParams(value)


def _prior_from_flag(text: str) -> PriorSpec:
    mu1, mu2, m = _floats(text, 3, "--prior")
    try:
        return PriorSpec(mu1=mu1, mu2=mu2, m=m)
    except InvalidParameterError as exc:
        raise UsageError(f"--prior: {exc}") from None


def _write_manifest(outdir: Path, subcommand: str, params: dict, seed: int, outputs: list[Path]) -> Path:
    manifest = {
        "subcommand": subcommand,
        "parameters": params,
        "master_seed": seed,
        "version": __version__,
        "outputs": [p.name for p in outputs],
    }
    path = outdir / f"{subcommand}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _emit(outdir: Path, name: str, content: str) -> Path:
    path = outdir / name
    path.write_text(content)
    return path


def cmd_estimate(args: argparse.Namespace) -> int:
    x1, x2 = _floats(args.x, 2, "--x")
    y1, y2 = _floats(args.y, 2, "--y")
    cov = _cov_from_flag(args.cov)
    a = _a_from_flag(args.a)
    prior = _prior_from_flag(args.prior) if args.prior else None
    if prior is not None and cov.is_singular:
        raise UsageError("Bayes estimation requires |rho| < 1 (covariance is singular)")

    s = select(ObservationPair((x1, y1), (x2, y2)))
    rows: list[tuple[str, float, str]] = []
    base_specs = [
        ("N1", EstimatorSpec.n1()),
        ("N2", EstimatorSpec.n2()),
        ("N3", EstimatorSpec.n3()),
        ("N4", EstimatorSpec.n4(args.c)),
    ]
    for kind, spec in base_specs:
        rows.append((kind, evaluate(spec, s, a, cov), ""))
        case_id = applicable_case(kind, a.a, cov.rho)
        if case_id is not None:
            out = improve(EstimatorSpec.improved(spec), s, a, cov)
            rows.append((case_label(case_id), out.value, out.truncated))
    if args.d is not None:
        rows.append((f"Shift(d={args.d:g})", est_shift(s, args.d), ""))
    if prior is not None:
        rows.append(("Bayes", est_bayes(s, prior, a, cov), ""))

    if args.format == "csv":
        lines = ["estimator,estimate,truncated"]
        lines += [f"{label},{value:.4f},{'' if note == 'none' else note}"
                  for label, value, note in rows]
    else:
        lines = [
            f"selected population: {s.selected}",
            f"y_sel = {s.y_sel:.6g}, y_other = {s.y_other:.6g}, "
            f"t1 = {s.t1:.6g}, t2 = {s.t2:.6g} (rho = {cov.rho:.4f})",
        ]
        for label, value, note in rows:
            flag = "" if note in ("", "none") else f"  [{note}]"
            lines.append(f"{label:<12} {value:14.4f}{flag}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    name = "estimate_report.csv" if args.format == "csv" else "estimate_report.txt"
    outputs = [_emit(outdir, name, report)]
    _write_manifest(outdir, "estimate", {
        "x": [x1, x2],
        "y": [y1, y2],
        "cov": [cov.sigma_xx, cov.sigma_xy, cov.sigma_yy],
        "a": args.a, "c": args.c, "d": args.d, "prior": args.prior,
        "format": args.format,
    }, args.seed, outputs)
    return 0


def cmd_admissibility(args: argparse.Namespace) -> int:
    cov = _cov_from_flag(args.cov)
    a = _a_from_flag(args.a)
    b = bounds(a, cov)
    verdict = classify(args.d, a, cov) if args.d is not None else None
    if args.format == "csv":
        lines = ["quantity,value", f"d0,{b.d0:.7g}", f"d1,{b.d1:.7g}"]
        if verdict is not None:
            lines.append(f"classification({args.d:g}),{verdict}")
    else:
        lines = [f"d0 = {b.d0:.7g}", f"d1 = {b.d1:.7g}"]
        if verdict is not None:
            lines.append(f"d = {args.d:g}: {verdict}")
            if verdict == "dominated_by_d0":
                lines.append(f"dominating shift: d0 = {b.d0:.7g}")
            elif verdict == "dominated_by_d1":
                lines.append(f"dominating shift: d1 = {b.d1:.7g}")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    name = "admissibility_report.csv" if args.format == "csv" else "admissibility_report.txt"
    outputs = [_emit(outdir, name, report)]
    _write_manifest(outdir, "admissibility", {
        "cov": list(_floats(args.cov, 3, "--cov")),
        "a": args.a, "d": args.d, "format": args.format,
    }, args.seed, outputs)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if args.table is not None:
        spec = TABLE_SPECS[args.table]
        name = f"table{args.table}.csv"
    else:
        if args.cov is None or args.a is None:
            raise UsageError("custom grids need --cov and --a (or use --table)")
        cov = _cov_from_flag(args.cov)
        a = _a_from_flag(args.a)
        spec = TableSpec(
            table_id=0,
            a=a,
            cov=cov,
            columns=table_columns(a.a, cov.rho, args.improved, args.c),
            c=args.c,
        )
        name = "custom_grid.csv"
    result = risk_grid(spec, reps=args.reps, master_seed=args.seed, workers=args.workers)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / name
    result.write_csv(csv_path)
    for row, label, mean, se in result.flagged:
        sys.stderr.write(
            f"warning: high-variance cell row={row} estimator={label}: "
            f"risk={mean:.6g} se={se:.6g} (se > 5% of mean)\n"
        )
    _write_manifest(outdir, "simulate", {
        "table": args.table, "cov": args.cov, "a": args.a, "c": args.c,
        "improved": list(args.improved), "reps": args.reps, "workers": args.workers,
        "format": args.format,
    }, args.seed, [csv_path])
    sys.stdout.write(f"wrote {csv_path}\n")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    path = args.data if args.data else bundled_dataset_path()
    a = _a_from_flag(args.a)
    prior = _prior_from_flag(args.prior) if args.prior else None
    try:
        data = load_dataset(path, clean=args.clean)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    model = fit(data)
    if prior is not None and model.cov_hat.is_singular:
        raise UsageError("Bayes estimation requires |rho| < 1 (fitted covariance is singular)")
    report = analyze(model, a, c=args.c, prior=prior)

    if args.format == "csv":
        sys.stdout.write(report.parameters_csv())
        sys.stdout.write(report.estimates_csv())
    else:
        sys.stdout.write(report.to_text())

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = [
        _emit(outdir, "analysis_parameters.csv", report.parameters_csv()),
        _emit(outdir, "analysis_estimates.csv", report.estimates_csv()),
        _emit(outdir, "analysis_report.txt", report.to_text()),
    ]
    _write_manifest(outdir, "analyze", {
        "data": path, "clean": args.clean, "a": args.a, "c": args.c,
        "prior": args.prior, "format": args.format,
    }, args.seed, outputs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linexsel",
        description="Estimation after selection from two bivariate normal populations "
        "under LINEX loss.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("csv", "text"), default="text")

    p = sub.add_parser("estimate", help="evaluate all estimators on one observation pair")
    p.add_argument("--x", required=True, help="x1,x2")
    p.add_argument("--y", required=True, help="y1,y2")
    p.add_argument("--cov", required=True, help="sigma_xx,sigma_xy,sigma_yy")
    p.add_argument("--a", type=float, required=True, help="LINEX shape parameter (nonzero)")
    p.add_argument("--c", type=float, default=1.0, help="hybrid threshold (default 1)")
    p.add_argument("--d", type=float, default=None, help="also evaluate the shift Y_[2] + d")
    p.add_argument("--prior", default=None, help="mu1,mu2,m for the Bayes estimate")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("admissibility", help="admissible shift interval [d0, d1]")
    p.add_argument("--cov", required=True, help="sigma_xx,sigma_xy,sigma_yy")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, default=None, help="classify this shift")
    common(p)
    p.set_defaults(func=cmd_admissibility)

    p = sub.add_parser("simulate", help="Monte Carlo risk grid (published tables 5-10 or custom)")
    p.add_argument("--table", type=int, choices=sorted(TABLE_SPECS), default=None)
    p.add_argument("--cov", default=None, help="custom grid: sigma_xx,sigma_xy,sigma_yy")
    p.add_argument("--a", type=float, default=None, help="custom grid: LINEX parameter")
    p.add_argument("--c", type=float, default=1.0, help="hybrid threshold (default 1)")
    p.add_argument(
        "--improved",
        nargs="*",
        default=(),
        choices=("N1", "N2", "N3", "N4"),
        help="custom grid: bases that also get their improved column",
    )
    p.add_argument("--reps", type=int, default=20000)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="fit the two-group dataset and reproduce the reports")
    p.add_argument("--data", default=None, help="CSV path (default: bundled poultry data)")
    p.add_argument("--clean", action="store_true", help="repair the known corrupt value")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--prior", default=None, help="mu1,mu2,m for a Bayes estimate")
    common(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, InvalidParameterError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LinexError, OSError, KeyError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
