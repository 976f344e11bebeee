"""Command-line front end.

Subcommands: classify, evolve, compare-kernels, phase-portrait,
threshold-curve, bounds.  All output lands under --out as CSV/JSON plus a
manifest.json recording the effective options and the files written.

Options may also come from a flat config file (--config) of `key = value`
lines with `#` comments; explicit command-line flags win over the file,
which wins over built-in defaults.  Exit codes: 0 success, 2 validation
error, 3 numerical failure (a diagnostic dump is written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .characteristics import (
    CharState,
    ConstantFactor,
    integrate_characteristic,
    phase_trajectory,
    supercritical_bounds,
)
from .grid import format_float
from .kernels import parse_kernel
from .scenarios import RECIPES, Experiment, get_datum, run_experiment
from .solver import SolverFailure
from .threshold import default_curve, write_threshold_csv


def _read_config_file(path: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def _inject_config(argv: list[str]) -> list[str]:
    """Expand --config into flags placed before the explicit ones."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    flags: list[str] = []
    for key, value in _read_config_file(path):
        flag = "--" + key.replace("_", "-")
        if value.lower() == "true":
            flags.append(flag)
        elif value.lower() == "false":
            continue
        else:
            flags.extend([flag, value])
    return argv[:1] + flags + argv[1:]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--config", default=None, help="key = value options file")
    common.add_argument("--seed", type=int, default=0, help="rng seed (recorded)")

    parser = argparse.ArgumentParser(
        prog="nltraffic",
        description="nonlocal traffic-flow laboratory",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_grid_opts(p, with_kernel=False):
        p.add_argument("--datum", default="bump", help="initial profile name")
        p.add_argument("--n-cells", type=int, default=4000)
        p.add_argument("--x-left", type=float, default=None)
        p.add_argument("--x-right", type=float, default=None)
        if with_kernel:
            p.add_argument("--kernel", default="infinite", help="look-ahead kernel")
            p.add_argument("--cfl", type=float, default=0.45)
            p.add_argument("--scheme", choices=("godunov", "llf"), default="godunov")

    p = sub.add_parser("classify", parents=[common], help="threshold verdict for a datum")
    add_grid_opts(p)

    p = sub.add_parser("evolve", parents=[common], help="evolve one kernel")
    add_grid_opts(p, with_kernel=True)
    p.add_argument("--t-end", type=float, default=4.0)
    p.add_argument("--snapshots", default=None, help="comma list of times")
    p.add_argument("--ssp2", action="store_true", help="two-stage SSP stepping")
    p.add_argument(
        "--run-past-blowup",
        action="store_true",
        help="keep evolving after breakdown detection",
    )

    p = sub.add_parser(
        "compare-kernels", parents=[common], help="all four reference kernels"
    )
    add_grid_opts(p)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--cfl", type=float, default=0.45)
    p.add_argument("--scheme", choices=("godunov", "llf"), default="godunov")

    p = sub.add_parser(
        "phase-portrait", parents=[common], help="one characteristic trajectory"
    )
    p.add_argument("--d0", type=float, required=True)
    p.add_argument("--u0", type=float, required=True)
    p.add_argument("--u-end", type=float, default=None, help="phase mode: stop density")
    p.add_argument("--factor", type=float, default=None, help="time mode: constant factor")
    p.add_argument("--t-end", type=float, default=10.0)

    p = sub.add_parser(
        "threshold-curve", parents=[common], help="tabulate the critical curve"
    )
    p.add_argument("--samples", type=int, default=1001)

    p = sub.add_parser("bounds", parents=[common], help="analytic blow-up certificate")
    p.add_argument("--d0", type=float, required=True)
    p.add_argument("--u0", type=float, required=True)
    p.add_argument("--m", type=float, default=0.0)

    return parser


def parse_args(argv: list[str]):
    return build_parser().parse_args(_inject_config(list(argv)))


def _domain(args, datum):
    lo = args.x_left if args.x_left is not None else datum.domain[0]
    hi = args.x_right if args.x_right is not None else datum.domain[1]
    return (lo, hi)


def _write_manifest(out: Path, args, files: list[str]) -> None:
    options = {k: v for k, v in sorted(vars(args).items())}
    manifest = {"command": args.subcommand, "options": options, "files": sorted(files)}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _even_snapshots(t_end: float, k: int = 5) -> tuple:
    return tuple(i * t_end / (k - 1) for i in range(k))


def dispatch(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []

    if args.subcommand == "classify":
        datum = get_datum(args.datum)
        exp = Experiment(
            name=f"classify-{datum.name}",
            datum=datum,
            kernels=(),
            n_cells=args.n_cells,
        )
        if args.x_left is not None or args.x_right is not None:
            from dataclasses import replace

            exp = replace(exp, datum=replace(datum, domain=_domain(args, datum)))
        result = run_experiment(exp, out)
        files += result.files
        print(result.classification.verdict)

    elif args.subcommand == "evolve":
        datum = get_datum(args.datum)
        kernel = parse_kernel_arg(args.kernel)
        if args.snapshots is not None:
            snaps = tuple(sorted(float(s) for s in args.snapshots.split(",") if s))
        else:
            snaps = _even_snapshots(args.t_end)
        from dataclasses import replace

        if args.x_left is not None or args.x_right is not None:
            datum = replace(datum, domain=_domain(args, datum))
        exp = Experiment(
            name=f"evolve-{datum.name}",
            datum=datum,
            kernels=(kernel,),
            n_cells=args.n_cells,
            t_end=args.t_end,
            snapshot_times=snaps,
            cfl=args.cfl,
            scheme=args.scheme,
            stop_on_blowup=not args.run_past_blowup,
        )
        result = run_experiment(exp, out)
        files += result.files
        report = result.diagnostics[kernel.tag].blowup
        if report.detected:
            print(f"breakdown detected at t = {report.t_detect:g}")
        else:
            print("no breakdown detected")

    elif args.subcommand == "compare-kernels":
        datum = get_datum(args.datum)
        base = {
            "bump": RECIPES["supercritical-compare"],
            "subinit": RECIPES["subcritical-compare"],
        }[datum.name]
        from dataclasses import replace

        exp = base
        if args.x_left is not None or args.x_right is not None:
            exp = replace(exp, datum=replace(datum, domain=_domain(args, datum)))
        t_end = args.t_end if args.t_end is not None else exp.t_end
        exp = replace(
            exp,
            n_cells=args.n_cells,
            t_end=t_end,
            snapshot_times=_even_snapshots(t_end),
            cfl=args.cfl,
            scheme=args.scheme,
        )
        result = run_experiment(exp, out)
        files += result.files
        for tag, diag in result.diagnostics.items():
            rep = diag.blowup
            status = f"breakdown at t = {rep.t_detect:g}" if rep.detected else "smooth"
            print(f"{tag}: {status}")

    elif args.subcommand == "phase-portrait":
        if args.factor is not None:
            traj = integrate_characteristic(
                CharState(d=args.d0, u=args.u0),
                ConstantFactor(args.factor),
                t_end=args.t_end,
            )
            path = out / "trajectory.csv"
            with open(path, "w") as fh:
                fh.write("t,d,u\n")
                for row in zip(traj.t, traj.d, traj.u):
                    fh.write(",".join(format_float(v) for v in row) + "\n")
            if traj.blown_up:
                print(f"slope blow-up at t = {traj.blowup_time:g}")
        else:
            u_end = args.u_end if args.u_end is not None else args.u0 / 100.0
            traj = phase_trajectory(args.d0, args.u0, u_end)
            path = out / "trajectory.csv"
            with open(path, "w") as fh:
                fh.write("u,d\n")
                for row in zip(traj.u, traj.d):
                    fh.write(",".join(format_float(v) for v in row) + "\n")
        files.append("trajectory.csv")

    elif args.subcommand == "threshold-curve":
        if args.samples < 2:
            raise ValueError("--samples must be at least 2")
        write_threshold_csv(default_curve(), out / "threshold_curve.csv", args.samples)
        files.append("threshold_curve.csv")

    elif args.subcommand == "bounds":
        bounds = supercritical_bounds(args.d0, args.u0, args.m)
        with open(out / "bounds.json", "w") as fh:
            json.dump(bounds.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        files.append("bounds.json")
        print(f"T_star_sharp = {bounds.T_star_sharp:g}")

    else:  # pragma: no cover
        raise ValueError(f"unknown subcommand {args.subcommand!r}")

    _write_manifest(out, args, files)
    return 0


def parse_kernel_arg(text: str):
    try:
        return parse_kernel(text)
    except ValueError as exc:
        raise ValueError(f"--kernel: {exc}") from None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        dump = exc.dump if isinstance(exc, SolverFailure) else {}
        out = Path(getattr(args, "out", "out"))
        out.mkdir(parents=True, exist_ok=True)
        dump_path = out / "failure_dump.json"
        with open(dump_path, "w") as fh:
            json.dump({"error": str(exc), **dump}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"numerical failure: {exc} (dump: {dump_path})", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
