"""Command-line front end: simulate, sweep, envelope, verify-bound,
transduce, plotdata.

Exit codes: 0 success, 2 validation/config error, 3 I/O error, 4 numerical
failure.  CSV is the single interchange format; floats are written with full
round-trip precision.  The RPSENSE_WORKERS environment variable overrides the
sweep worker count.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import montecarlo as mc
from .coherence import reaction_averaged_coherence
from .dynamics import (
    PropagationError,
    TimeGrid,
    propagate,
    singlet_yield,
    yield_uncertainty,
)
from .spinmodel import build_singlet_projector, load_model
from .transduction import SensingPoint, optimal_design

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


class SchemaError(ValueError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def write_sweep_csv(path, results) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(mc.CSV_HEADER)
        for r in results:
            writer.writerow(mc.result_to_row(r))


def read_sweep_csv(path):
    results = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != mc.CSV_HEADER:
            raise SchemaError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            try:
                results.append(mc.row_to_result(row))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: line {reader.line_num}: {exc}") from exc
    return results


def _grid_from_args(args) -> TimeGrid:
    return TimeGrid(
        t_max_over_k=args.tmax, steps=args.steps, coherence_stride=args.stride
    )


def _add_grid_flags(parser):
    parser.add_argument("--steps", type=int, default=10000)
    parser.add_argument("--tmax", type=float, default=10.0)
    parser.add_argument("--stride", type=int, default=1)


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    grid = _grid_from_args(args)
    traj = propagate(model, args.B, grid, keep_states=args.coherence)
    y = singlet_yield(traj)
    dy = yield_uncertainty(traj)
    k = model.rate_k
    y_at_k = singlet_yield(propagate(model, k, grid, keep_states=False))
    dy_db = abs(y_at_k - y) / k

    times = grid.times(k)
    weights = k * np.exp(-k * times)
    c_inst = None
    c_avg = None
    if args.coherence:
        q_s, q_t = build_singlet_projector(model)
        record = reaction_averaged_coherence(traj, q_s, q_t)
        c_inst = record.c_st_instant
        c_avg = record.c_st_avg

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "p_singlet", "weight", "c_st_instant"])
        for i, t in enumerate(times):
            if c_inst is not None and i % grid.coherence_stride == 0:
                c_col = _fmt(c_inst[i // grid.coherence_stride])
            else:
                c_col = ""
            writer.writerow([_fmt(t), _fmt(traj.p_singlet[i]), _fmt(weights[i]), c_col])

    print(f"Y = {_fmt(y)}")
    print(f"dY = {_fmt(dy)}")
    print(f"dY_dB = {_fmt(dy_db)}")
    if c_avg is not None:
        print(f"C_ST = {_fmt(c_avg)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = mc.SampleSpec(
        n_nuc=args.nuclei,
        runs=args.runs,
        seed=args.seed,
        grid=_grid_from_args(args),
    )
    result = mc.sweep(spec, workers=args.workers)
    write_sweep_csv(args.out, result.results)
    failures = sum(1 for r in result.results if r.flag != "ok")
    print(f"wrote {len(result.results)} runs to {args.out} ({failures} flagged)")
    return EXIT_OK


def cmd_envelope(args) -> int:
    results = read_sweep_csv(args.infile)
    value = mc.envelope_coefficient(results, args.m)
    print(_fmt(value))
    return EXIT_OK


def cmd_verify_bound(args) -> int:
    results = read_sweep_csv(args.infile)
    report = mc.verify_bound(results, args.slack)
    print(f"runs = {len(results)}")
    print(f"violations = {report.count}")
    print(f"max_excess = {_fmt(report.max_excess)}")
    for run_index, excess in report.violations:
        print(f"violation run_index={run_index} excess={_fmt(excess)}")
    return EXIT_OK


def cmd_transduce(args) -> int:
    if args.from_run is not None:
        results = read_sweep_csv(args.from_run)
        by_index = {r.run_index: r for r in results}
        if args.run_index not in by_index:
            raise SchemaError(f"run_index {args.run_index} not in {args.from_run}")
        r = by_index[args.run_index]
        point = SensingPoint(Y=r.Y, dY_dB=r.dY_dB, dY=r.dY, c_st=r.c_st)
    else:
        missing = [
            name
            for name, val in (
                ("--Y", args.Y),
                ("--dY", args.dY),
                ("--dYdB", args.dYdB),
            )
            if val is None
        ]
        if missing:
            raise ValueError(f"missing {' '.join(missing)} (or use --from-run)")
        point = SensingPoint(Y=args.Y, dY_dB=args.dYdB, dY=args.dY, c_st=args.cst)
    report = optimal_design(point, args.K, args.V)
    data = asdict(report)
    for key, value in data.items():
        print(f"{key} = {_fmt(value)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _write_xy(path, header, xs, ys) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for x, y in zip(xs, ys):
            writer.writerow([_fmt(x), _fmt(y)])


def _render_svg(path, bound_pts, ratio_pts) -> None:
    """Minimal self-contained two-panel log-log scatter."""

    def panel(points, x0, title):
        pts = [(x, y) for x, y in points if x > 0 and y > 0 and math.isfinite(y)]
        if not pts:
            return f'<text x="{x0 + 150}" y="160">no data: {title}</text>'
        lx = [math.log10(x) for x, _ in pts]
        ly = [math.log10(y) for _, y in pts]
        sx = (min(lx), max(lx) if max(lx) > min(lx) else min(lx) + 1)
        sy = (min(ly), max(ly) if max(ly) > min(ly) else min(ly) + 1)

        def px(v):
            return x0 + 20 + 280 * (v - sx[0]) / (sx[1] - sx[0])

        def py(v):
            return 300 - 20 - 260 * (v - sy[0]) / (sy[1] - sy[0])

        dots = "".join(
            f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="1.5" fill="steelblue"/>'
            for a, b in zip(lx, ly)
        )
        return (
            f'<text x="{x0 + 120}" y="15" font-size="12">{title}</text>'
            f'<rect x="{x0 + 20}" y="20" width="280" height="260" '
            'fill="none" stroke="black"/>' + dots
        )

    svg = (
        '<svg xmlns="http://www.w3.org/2000/svg" width="660" height="310">'
        + panel(bound_pts, 0, "2(dY)^2 vs C_ST")
        + panel(ratio_pts, 330, "Y dY/|dY/dB| vs C_ST")
        + "</svg>"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)


def cmd_plotdata(args) -> int:
    import os

    results = read_sweep_csv(args.infile)
    os.makedirs(args.out_dir, exist_ok=True)
    ok = [r for r in results if r.flag == "ok"]
    c = [r.c_st for r in ok]
    two_dy2 = [2.0 * r.dY * r.dY for r in ok]
    ratio = [r.ratio for r in ok]

    _write_xy(f"{args.out_dir}/bound_panel.csv", ["c_st", "two_dY2"], c, two_dy2)
    _write_xy(f"{args.out_dir}/ratio_panel.csv", ["c_st", "ratio"], c, ratio)

    if ok:
        lo, hi = min(c), max(c)
        xs = np.linspace(lo, hi, 200)
        _write_xy(f"{args.out_dir}/overlay_identity.csv", ["c_st", "y"], xs, xs)
        with np.errstate(divide="ignore"):
            _write_xy(
                f"{args.out_dir}/overlay_inverse.csv",
                ["c_st", "y"],
                xs,
                np.divide(0.32, xs, out=np.full_like(xs, np.inf), where=xs > 0),
            )
            _write_xy(
                f"{args.out_dir}/overlay_inverse_sqrt.csv",
                ["c_st", "y"],
                xs,
                np.divide(
                    0.015, np.sqrt(xs), out=np.full_like(xs, np.inf), where=xs > 0
                ),
            )
    else:
        for name in ("overlay_identity", "overlay_inverse", "overlay_inverse_sqrt"):
            _write_xy(f"{args.out_dir}/{name}.csv", ["c_st", "y"], [], [])

    if args.svg:
        _render_svg(args.svg, list(zip(c, two_dy2)), list(zip(c, ratio)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpsense",
        description="Radical-pair spin dynamics, S-T coherence, and "
        "receptor-ligand sensing bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="propagate one model and emit time series")
    p.add_argument("--model", required=True, help="YAML model file")
    p.add_argument("--B", type=float, default=0.0)
    _add_grid_flags(p)
    p.add_argument("--out", required=True, help="per-step CSV output path")
    p.add_argument(
        "--no-coherence",
        dest="coherence",
        action="store_false",
        help="skip the instantaneous-coherence column",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="randomized parameter study")
    p.add_argument("--nuclei", type=int, required=True)
    p.add_argument("--runs", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    _add_grid_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("envelope", help="empirical envelope constant")
    p.add_argument("--m", type=float, required=True, choices=[1.0, 0.5])
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("verify-bound", help="check c_st <= 2 dY^2 + slack")
    p.add_argument("--slack", type=float, default=1e-3)
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("transduce", help="receptor-ligand design bounds")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--Y", type=float)
    p.add_argument("--dY", type=float)
    p.add_argument("--dYdB", type=float)
    p.add_argument("--cst", type=float, default=0.0)
    p.add_argument("--from-run", default=None, help="sweep CSV with a RunResult")
    p.add_argument("--run-index", type=int, default=0)
    p.add_argument("--out", default=None, help="optional JSON report path")
    p.set_defaults(func=cmd_transduce)

    p = sub.add_parser("plotdata", help="scatter panels and overlay curves")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--svg", default=None, help="optional SVG scatter render")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PropagationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
