"""Command-line front end.

Three subcommands:

* ``run``     execute a .seq pulse program and write its report artifacts;
* ``sweep``   sweep the interferometer phase for a given input state and
              emit the statistics table as CSV;
* ``detect``  run one detection scheme on a state and write the trace and
              reconstruction artifacts, plus the three-way <Jz> comparison.

State specs reuse the sequence language's init clause verbatim, e.g.
``"coherent 0 0 2 0 nmax 40"``.  Exit codes: 0 success, 1 parse error,
2 runtime error, 3 I/O failure.  Floats are printed with 17 significant
digits so a reader can reproduce them exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import detection, interferometer, seqlang


def _angle(text: str):
    """Flag type accepting decimal radians or pi fractions like ``pi/3``."""
    m = seqlang._PI_RE.match(text.strip())
    if m:
        sign = -1 if m.group(1) == "-" else 1
        num = sign * (int(m.group(2)) if m.group(2) else 1)
        den = int(m.group(3)) if m.group(3) else 1
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-optics",
        description="Two-mode phonon optics: pulse programs, interferometer "
        "sweeps and phonon-number detection.",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="reserved for future measurement-noise options; currently unused",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a .seq pulse program")
    p_run.add_argument("path", help="pulse program file (.seq)")
    p_run.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="artifact format (default csv)")
    p_run.add_argument("--out", default=".", help="directory for artifacts (default .)")
    p_run.set_defaults(handler=cmd_run)

    p_sweep = sub.add_parser("sweep", help="interferometer phase sweep")
    p_sweep.add_argument("state_spec", help="init clause, e.g. 'coherent 0 0 2 0 nmax 40'")
    p_sweep.add_argument("--phi-min", type=_angle, default=0.0)
    p_sweep.add_argument("--phi-max", type=_angle, default=2.0 * math.pi,
                         help="grid is half open: [phi-min, phi-max)")
    p_sweep.add_argument("--points", type=int, default=64)
    p_sweep.add_argument("--nmax", type=int, default=None,
                         help="override the truncation of the state spec")
    p_sweep.add_argument("--fd-step", type=float, default=interferometer.DEFAULT_FD_STEP)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", default=None, help="CSV file (default stdout)")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_det = sub.add_parser("detect", help="run one detection scheme")
    p_det.add_argument("state_spec", help="init clause, e.g. 'fock 1 1 nmax 4'")
    p_det.add_argument("--method", choices=("single", "two", "direct"), required=True)
    p_det.add_argument("--mode", choices=("c", "r"), default="c",
                       help="probed mode for single/direct (default c)")
    p_det.add_argument("--coupling", type=float, default=1.0,
                       help="probe coupling in rad/s (default 1.0)")
    p_det.add_argument("--samples", type=int, default=detection.DEFAULT_SAMPLE_COUNT)
    p_det.add_argument("--m-max", type=int, default=None,
                       help="largest phonon number fitted (default nmax)")
    p_det.add_argument("--k-max", type=int, default=None,
                       help="largest product m*n fitted (default nmax)")
    p_det.add_argument("--chi-t", type=float, default=1e-3,
                       help="dispersive angle of the direct readout")
    p_det.add_argument("--mz", type=_angle, default=None,
                       help="push the state through the interferometer at this "
                            "phase before detecting")
    p_det.add_argument("--nmax", type=int, default=None,
                       help="override the truncation of the state spec")
    p_det.add_argument("--out", default="detect", help="artifact file prefix")
    p_det.set_defaults(handler=cmd_detect)
    return parser


def _report_json(record) -> str:
    d = record.distribution
    size = d.p_m.shape[0]
    rows = [
        [m, total - m, float(d.p_mn[m, total - m])]
        for total in range(size)
        for m in range(total + 1)
    ]
    return json.dumps(
        {
            "kind": "report",
            "index": record.index,
            "jx": record.jx,
            "jy": record.jy,
            "jz": record.jz,
            "mean_jz": d.mean_jz,
            "p_m": [float(x) for x in d.p_m],
            "p_n": [float(x) for x in d.p_n],
            "p": rows,
        }
    )


def _direct_json(est) -> str:
    return json.dumps(
        {
            "kind": "direct",
            "sigma_x_exact": est.sigma_x_exact,
            "mean_n_linearized": est.mean_n_linearized,
            "chi_t": est.chi_t,
            "mode": est.mode,
        }
    )


def _trace_json(trace) -> str:
    return json.dumps(
        {
            "kind": "trace",
            "coupling": trace.coupling,
            "signal_kind": trace.kind,
            "mode": trace.mode,
            "t": [float(x) for x in trace.times],
            "p_g": [float(x) for x in trace.values],
        }
    )


def cmd_run(args) -> int:
    path = Path(args.path)
    text = path.read_text(encoding="utf-8")
    program = seqlang.parse(text)
    result = seqlang.execute(program)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = path.stem
    ext = args.format
    for record in result.records:
        if isinstance(record, seqlang.ReportRecord):
            name = f"{stem}_report{record.index}.{ext}"
            body = record.distribution.to_csv() if ext == "csv" else _report_json(record)
            print(
                f"report[{record.index}]: jz={record.jz:.17g} jx={record.jx:.17g} "
                f"jy={record.jy:.17g} -> {name}"
            )
        elif isinstance(record, seqlang.TraceRecord):
            name = f"{stem}_trace{record.index}.{ext}"
            body = record.trace.to_csv() if ext == "csv" else _trace_json(record.trace)
            print(
                f"trace[{record.index}]: kind={record.trace.kind} "
                f"samples={record.trace.times.size} -> {name}"
            )
        else:
            est = record.estimate
            if ext == "csv":
                body = (
                    "sigma_x_exact,mean_n_linearized,chi_t,mode\n"
                    f"{est.sigma_x_exact:.17g},{est.mean_n_linearized:.17g},"
                    f"{est.chi_t:.17g},{est.mode}\n"
                )
            else:
                body = _direct_json(est)
            name = f"{stem}_direct{record.index}.{ext}"
            print(
                f"direct[{record.index}]: mode={est.mode} "
                f"mean_n={est.mean_n_linearized:.17g} -> {name}"
            )
        (out_dir / name).write_text(body, encoding="utf-8")
    final = result.final_state
    print(
        f"done: {len(result.records)} record(s), final state nmax={final.trunc.n_total_max} "
        f"tail_mass={final.tail_mass:.3g}"
    )
    return 0


def cmd_sweep(args) -> int:
    if args.points < 2:
        raise ValueError("sweep needs at least two grid points")
    state = seqlang.parse_state_spec(args.state_spec, args.nmax)
    step = (args.phi_max - args.phi_min) / args.points
    grid = [args.phi_min + k * step for k in range(args.points)]
    reports = interferometer.phase_sweep(state, grid, args.fd_step, args.workers)
    csv_text = interferometer.sweep_to_csv(reports)
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote {args.points} rows to {args.out}")
    return 0


def cmd_detect(args) -> int:
    state = seqlang.parse_state_spec(args.state_spec, args.nmax)
    if args.mz is not None:
        state = interferometer.mz_output(state, args.mz)
    nmax = state.trunc.n_total_max
    prefix = args.out

    artifacts: list[tuple[str, str]] = []
    if args.method in ("single", "two"):
        times = detection.default_times(args.coupling, args.samples)
        trace = detection.signal(state, args.coupling, times, args.method, args.mode)
        artifacts.append((f"{prefix}_trace.csv", trace.to_csv()))
        if args.method == "single":
            m_max = nmax if args.m_max is None else args.m_max
            rec = detection.reconstruct_single(trace, m_max)
            artifacts.append((f"{prefix}_p.json", rec.to_json()))
            mean = float(np.arange(rec.p.size) @ rec.p)
            print(f"single[{args.mode}]: mean_n={mean:.17g} residual={rec.residual:.3g}")
        else:
            k_max = nmax if args.k_max is None else args.k_max
            rec = detection.reconstruct_two(trace, k_max)
            artifacts.append((f"{prefix}_q.json", rec.to_json()))
            top = max(rec.q, key=rec.q.get)
            print(f"two: dominant product k={top} q_k={rec.q[top]:.17g} "
                  f"residual={rec.residual:.3g}")
    else:
        est = detection.direct_mean_phonon(state, args.chi_t, 1.0, args.mode)
        artifacts.append((f"{prefix}_direct.json", _direct_json(est)))
        print(f"direct[{est.mode}]: sigma_x={est.sigma_x_exact:.17g} "
              f"mean_n={est.mean_n_linearized:.17g}")

    comparison = detection.jz_from_methods(
        state, coupling=args.coupling, n_samples=args.samples,
        m_max=args.m_max, chi_t=args.chi_t,
    )
    print(comparison.summary())
    for name, body in artifacts:
        Path(name).write_text(body, encoding="utf-8")
        print(f"wrote {name}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except seqlang.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (seqlang.ExecutionError, ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
