"""Command-line front end.

Exit codes: 0 ok, 1 oracle-side check failed, 2 usage/domain error, 3 I/O error,
4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

import numpy as np

from .errors import DomainError, NonConvergenceError, UnsupportedInputError
from .estimation import ExperimentConfig, run_trials
from .fock import qfi_oracle
from .gaussian import ProbeSpec, make_channel_point
from .optimizer import (
    Fig1Row,
    Fig2LeftRow,
    Fig2RightRow,
    optimize_x,
    sweep_compare_coherent,
    sweep_energy,
    sweep_x,
)
from .output import default_output, fmt, write_manifest, write_table
from .qfi import qfi_dilation_bound, qfi_general
from .sld import compare_with_oracle

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

FIG_DEFAULTS = {
    "fig1": {"z": "0.1", "nbar": "0.5,1,2,5,10,100", "grid": 101},
    "fig2l": {"z": "0.01,0.1,1,5,10", "nbar_grid": "0.1,100,61"},
    "fig2r": {"nbar": "0.1,0.3,0.7,1", "z_grid": "0.01,10,61"},
}


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _log_grid(text: str) -> np.ndarray:
    vals = _floats(text)
    if len(vals) != 3 or vals[0] <= 0 or vals[1] <= vals[0] or vals[2] < 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi,count with 0 < lo < hi, got {text!r}")
    return np.geomspace(vals[0], vals[1], int(vals[2]))


def _delta(text: str) -> float:
    value = float(text)
    if not 0.5 < value < 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in (1/2, 1), got {value}")
    return value


def _add_channel(p: argparse.ArgumentParser, required: bool = True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--z", type=float, help="z = tan(phi)^2")
    g.add_argument("--phi", type=float, help="channel angle in radians")
    g.add_argument("--gamma-t", dest="gamma_t", type=float, help="loss rate x time")


def _channel(args):
    for kind in ("z", "phi", "gamma_t"):
        value = getattr(args, kind, None)
        if value is not None:
            return make_channel_point(value, kind)
    raise DomainError("no channel parametrization given")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lossqfi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi", help="closed-form QFI (optionally checked against the Fock oracle)")
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    _add_channel(p)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--dim", type=int)

    p = sub.add_parser("optimize", help="maximise the QFI over the squeezing fraction")
    p.add_argument("--nbar", type=float, required=True)
    _add_channel(p)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("sweep", help="write the data behind a figure as CSV")
    p.add_argument("figure", choices=sorted(FIG_DEFAULTS))
    p.add_argument("--z", type=_floats)
    p.add_argument("--nbar", type=_floats)
    p.add_argument("--grid", type=int)
    p.add_argument("--nbar-grid", dest="nbar_grid", type=_log_grid, help="lo,hi,count (log-spaced)")
    p.add_argument("--z-grid", dest="z_grid", type=_log_grid, help="lo,hi,count (log-spaced)")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("sld", help="compare the closed-form SLD with the Fock-space solution")
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    _add_channel(p)
    p.add_argument("--dim", type=int)
    p.add_argument("--out", type=Path, help="also write the report as CSV")

    p = sub.add_parser("simulate", help="Monte-Carlo run of the one-step adaptive estimator")
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    _add_channel(p)
    p.add_argument("--N", dest="n_copies", type=int, default=10_000)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--delta", type=_delta, default=0.6)
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--basis", choices=("sld", "fock"), default="sld")
    p.add_argument("--out", type=Path)
    return parser


def cmd_qfi(args) -> int:
    point = _channel(args)
    res = qfi_general(args.nbar, args.x, point.z)
    print(f"H={fmt(res.h)}")
    print(f"inv_H={fmt(1.0 / res.h) if res.h > 0 else 'inf'}")
    print(f"dilation_bound={fmt(qfi_dilation_bound(args.nbar))}")
    if args.oracle:
        h = qfi_oracle(ProbeSpec(args.nbar, args.x), point, args.dim)
        print(f"H_oracle={fmt(h)}")
        print(f"rel_dev={fmt(abs(h - res.h) / res.h if res.h else abs(h))}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    point = _channel(args)
    opt = optimize_x(args.nbar, point.z, args.tol)
    print(f"x_opt={fmt(opt.x_opt)}")
    print(f"h_max={fmt(opt.h_max)}")
    print(f"boundary={opt.boundary}")
    print(f"evaluations={opt.evaluations}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    d = FIG_DEFAULTS[args.figure]
    params = {"figure": args.figure}
    if args.figure == "fig1":
        zs = args.z or _floats(d["z"])
        if len(zs) != 1:
            raise DomainError("fig1 takes a single --z value")
        nbars = args.nbar or _floats(d["nbar"])
        grid = args.grid or d["grid"]
        rows = sweep_x(nbars, zs[0], grid)
        header = Fig1Row._fields
        params.update(z=zs[0], nbar=",".join(map(fmt, nbars)), grid=grid)
    elif args.figure == "fig2l":
        zs = args.z or _floats(d["z"])
        ngrid = args.nbar_grid if args.nbar_grid is not None else _log_grid(d["nbar_grid"])
        rows = sweep_energy(zs, ngrid)
        header = Fig2LeftRow._fields
        params.update(z=",".join(map(fmt, zs)), nbar_grid=",".join(map(fmt, ngrid)))
    else:
        nbars = args.nbar or _floats(d["nbar"])
        zgrid = args.z_grid if args.z_grid is not None else _log_grid(d["z_grid"])
        rows = sweep_compare_coherent(nbars, zgrid)
        header = Fig2RightRow._fields
        params.update(nbar=",".join(map(fmt, nbars)), z_grid=",".join(map(fmt, zgrid)))
    out = args.out or default_output(f"sweep_{args.figure}.csv")
    n = write_table(out, header, rows)
    write_manifest(out, "sweep", params)
    print(f"wrote {n} rows to {out}")
    return EXIT_OK


def cmd_sld(args) -> int:
    point = _channel(args)
    report = compare_with_oracle(ProbeSpec(args.nbar, args.x), point, args.dim)
    print(report.to_table())
    if args.out:
        with open(args.out, "w", newline="") as fh:
            report.to_csv(fh)
        write_manifest(
            args.out, "sld", {"nbar": args.nbar, "x": args.x, "z": point.z, "dim": report.dim}
        )
    return EXIT_OK if report.oracle_ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    point = _channel(args)
    seed = args.seed if args.seed is not None else secrets.randbits(63)
    config = ExperimentConfig(
        probe=ProbeSpec(args.nbar, args.x),
        true_point=point,
        n_copies=args.n_copies,
        delta=args.delta,
        trials=args.trials,
        seed=seed,
        dim=args.dim,
        basis=args.basis,
    )
    out = args.out or default_output("simulate.csv")
    # fail on an unwritable destination before the expensive part
    open(out, "a").close()
    stats = run_trials(config)
    stats.write_csv(out)
    summary = Path(str(out).removesuffix(".csv") + "_summary.csv")
    stats.write_summary_csv(summary)
    params = {
        "nbar": args.nbar, "x": args.x, "z": point.z, "N": args.n_copies,
        "trials": args.trials, "delta": args.delta, "dim": args.dim or "auto",
        "basis": args.basis,
    }
    write_manifest(out, "simulate", params, seed=seed)
    print(f"seed={seed}")
    print(f"N_var={fmt(stats.scaled_var)}")
    print(f"inv_F={fmt(1.0 / stats.effective_fisher)}")
    print(f"F={fmt(stats.effective_fisher)}")
    print(f"crb={fmt(stats.crb)}")
    print(f"z_score={fmt(stats.z_score)}")
    return EXIT_OK


COMMANDS = {
    "qfi": cmd_qfi,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "sld": cmd_sld,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, UnsupportedInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
