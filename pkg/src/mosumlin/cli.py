"""Command line front end.

Exit codes: 0 success, 2 usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from ._errors import InputError
from .core import Series, mosum_profile
from .critical import DEFAULT_LOG_H, calibrate_log_h
from .detection import DEFAULT_ALPHA, DEFAULT_ETA, DEFAULT_THETA, detect, fibonacci_bandwidths
from .evaluation import MethodConfig, run_benchmark
from .signal import PiecewiseLinearSignal
from .simulation import (
    N_OBS,
    NOISE_FAMILIES,
    NoiseSpec,
    ScenarioSpec,
    block_mean,
    gen_scenario,
    scenario_beta,
    simulate_signal,
)

EXIT_DATA = 3
GRID_RTOL = 1e-9


class DataError(Exception):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def read_series(path: str, delta_t: float | None = None) -> tuple[Series, np.ndarray | None]:
    """Read a CSV with column ``x`` and optionally a uniformly spaced ``t``.

    Returns the series and the ``t`` column (``None`` if absent).
    """
    fh = sys.stdin if path == "-" else open(path, encoding="utf-8", newline="")
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "x" not in reader.fieldnames:
            raise DataError(f"{path}: header with an 'x' column is required")
        has_t = "t" in reader.fieldnames
        xs, ts = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                xs.append(float(row["x"]))
                if has_t:
                    ts.append(float(row["t"]))
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: not a number ({exc})") from exc
    finally:
        if fh is not sys.stdin:
            fh.close()
    if not xs:
        raise DataError(f"{path}: no observations")
    t = None
    if has_t:
        t = np.array(ts)
        if t.size > 1:
            steps = np.diff(t)
            step = (t[-1] - t[0]) / (t.size - 1)
            if not step > 0 or np.max(np.abs(steps - step)) > GRID_RTOL * abs(step):
                raise DataError(f"{path}: t column is not uniformly spaced")
            if delta_t is None:
                delta_t = float(step)
    try:
        return Series.from_values(xs, 1.0 if delta_t is None else delta_t), t
    except InputError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_series(fh, series: Series, truth: np.ndarray | None = None) -> None:
    fh.write("t,x,f\n" if truth is not None else "t,x\n")
    t = series.grid.times()
    for i in range(series.n):
        row = [fmt(t[i]), fmt(series.values[i])]
        if truth is not None:
            row.append(fmt(truth[i]))
        fh.write(",".join(row) + "\n")


def cmd_detect(args) -> int:
    series, t = read_series(args.input, args.delta_t)
    if args.bandwidth:
        bandwidths = args.bandwidth
    else:
        bandwidths = fibonacci_bandwidths(args.auto_bandwidths, series.n)
    if series.n <= 2 * max(bandwidths):
        raise DataError(
            f"series of length {series.n} is too short for G={max(bandwidths)}: need 2G < n"
        )
    result = detect(
        series, bandwidths, alpha=args.alpha, eta=args.eta, theta=args.theta,
        log_h=args.log_h, threads=1,
    )
    if t is not None:
        for i, cp in enumerate(result.change_points):
            result.change_points[i] = type(cp)(cp.k, float(t[cp.k - 1]), cp.G, cp.stat)
    with _open_out(args.output) as fh:
        json.dump(result.to_json(), fh, indent=2)
        fh.write("\n")
    if args.emit_profile:
        with open(args.emit_profile, "w", encoding="utf-8", newline="") as fh:
            fh.write("G,k,W\n")
            for g in sorted(set(bandwidths)):
                prof = mosum_profile(series, g)
                for k, w in zip(prof.k, prof.w):
                    fh.write(f"{g},{k},{fmt(w)}\n")
    return 0


def cmd_simulate(args) -> int:
    noise = NoiseSpec(args.noise, args.sigma_eps)
    if args.signal:
        sig = PiecewiseLinearSignal.load(args.signal)
        series = simulate_signal(sig, noise, args.seed, args.replication)
        meta = {"signal_file": str(args.signal)}
    else:
        spec = ScenarioSpec(f"sim{args.scenario}", noise, args.seed, args.replication)
        series, sig = gen_scenario(spec)
        meta = {"scenario": spec.id, "beta": [float(b) for b in scenario_beta(spec)]}
    sidecar = {
        **meta,
        "noise": {"family": noise.family, "sigma_eps": noise.sigma_eps},
        "seed": args.seed,
        "replication": args.replication,
        "changes": list(sig.change_indices),
        "signal": sig.to_json(),
    }
    with _open_out(args.output) as fh:
        write_series(fh, series, sig.values() if args.with_truth else None)
    truth_path = args.truth or (None if args.output == "-" else args.output + ".truth.json")
    if truth_path:
        with open(truth_path, "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_calibrate(args) -> int:
    value = calibrate_log_h(args.n, args.g, args.replications, args.seed, threads=args.threads)
    with _open_out(args.output) as fh:
        fh.write(fmt(value) + "\n")
    return 0


def cmd_bench(args) -> int:
    bandwidths = tuple(args.bandwidth) if args.bandwidth else tuple(fibonacci_bandwidths(args.g1, N_OBS))
    method = MethodConfig(bandwidths, args.alpha, args.eta, args.theta, args.log_h)
    report = run_benchmark(
        f"sim{args.scenario}", args.noise, args.sigma_eps, args.replications, args.seed,
        method, threads=args.threads,
    )
    with _open_out(args.output) as fh:
        fh.write(report.to_csv())
    table = sys.stderr if args.output == "-" else sys.stdout
    print(report.to_table(), file=table)
    print(
        f"wall time: total {report.total_seconds:.3f} s, "
        f"mean {1e3 * report.mean_seconds:.3f} ms per replication",
        file=sys.stderr,
    )
    return 0


def cmd_preprocess(args) -> int:
    series, _ = read_series(args.input, args.delta_t)
    out = block_mean(series, args.block)
    with _open_out(args.output) as fh:
        write_series(fh, out)
    return 0


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _bandwidth(s: str) -> int:
    v = int(s)
    if v < 3:
        raise argparse.ArgumentTypeError(f"bandwidth must be >= 3, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _open_unit(lo_open: float, hi: float, hi_closed: bool):
    def parse(s: str) -> float:
        v = float(s)
        if not (lo_open < v and (v <= hi if hi_closed else v < hi)):
            bracket = "]" if hi_closed else ")"
            raise argparse.ArgumentTypeError(f"{s} outside ({lo_open}, {hi}{bracket}")
        return v
    return parse


def _seed(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default: %(default)s)")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: all cores)")
    common.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")

    tuning = argparse.ArgumentParser(add_help=False)
    tuning.add_argument("--alpha", type=_open_unit(0, 1, False), default=DEFAULT_ALPHA)
    tuning.add_argument("--eta", type=_open_unit(0, 0.5, False), default=DEFAULT_ETA)
    tuning.add_argument("--theta", type=_open_unit(0, 1, True), default=DEFAULT_THETA)
    tuning.add_argument("--log-h", type=float, default=DEFAULT_LOG_H)

    p = argparse.ArgumentParser(prog="mosumlin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", parents=[common, tuning], help="detect change points in a CSV")
    d.add_argument("input", help="CSV with column x, or t,x ('-' for stdin)")
    bw = d.add_mutually_exclusive_group()
    bw.add_argument("--bandwidth", "-G", type=_bandwidth, action="append",
                    help="bandwidth; repeat for a multiscale run")
    bw.add_argument("--auto-bandwidths", type=_bandwidth, default=None, metavar="G1",
                    help="Fibonacci bandwidths from G1 (default when no --bandwidth: 50)")
    d.add_argument("--delta-t", type=_positive_float, default=None,
                   help="time step (default: from t column, else 1.0)")
    d.add_argument("--emit-profile", metavar="PATH", help="write the W profile as G,k,W CSV")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("simulate", parents=[common], help="generate a scenario series")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", type=int, choices=[1, 2, 3, 4])
    src.add_argument("--signal", type=Path, help="JSON signal specification")
    s.add_argument("--noise", choices=NOISE_FAMILIES, default="gaussian")
    s.add_argument("--sigma-eps", type=_positive_float, default=1.0)
    s.add_argument("--replication", type=int, default=0)
    s.add_argument("--with-truth", action="store_true", help="add the noiseless signal as column f")
    s.add_argument("--truth", help="truth JSON path (default: OUTPUT.truth.json)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", parents=[common], help="Monte Carlo estimate of log H")
    c.add_argument("--n", type=_positive_int, required=True)
    c.add_argument("--g", type=_bandwidth, required=True)
    c.add_argument("--replications", type=_positive_int, default=1000)
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("bench", parents=[common, tuning], help="reproduce a simulation table")
    b.add_argument("--scenario", type=int, choices=[1, 2, 3, 4], required=True)
    b.add_argument("--noise", choices=NOISE_FAMILIES, default="gaussian")
    b.add_argument("--sigma-eps", type=_positive_float, nargs="+", default=[0.5, 1.0, 1.5, 2.0])
    b.add_argument("--replications", type=_positive_int, default=1000)
    b.add_argument("--g1", type=_bandwidth, default=50, help="finest Fibonacci bandwidth")
    b.add_argument("--bandwidth", "-G", type=_bandwidth, action="append",
                   help="explicit bandwidth (overrides --g1); repeatable")
    b.set_defaults(func=cmd_bench)

    pp = sub.add_parser("preprocess", parents=[common], help="block-average a CSV series")
    pp.add_argument("input")
    pp.add_argument("--block", type=_positive_int, required=True)
    pp.add_argument("--delta-t", type=_positive_float, default=None)
    pp.set_defaults(func=cmd_preprocess)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "detect" and not args.bandwidth and args.auto_bandwidths is None:
        args.auto_bandwidths = 50
    if args.command == "calibrate" and args.replications < 100:
        parser.error("calibrate needs --replications >= 100")
    try:
        return args.func(args)
    except (DataError, InputError, OSError, json.JSONDecodeError) as exc:
        print(f"mosumlin {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
