"""Command-line sweep runner.

Exit codes: 0 on success, 2 on configuration errors, 3 on I/O failures.
"""

import argparse
import sys

from .harness import ALL_MODES, AXES, SweepSpec, run_sweep, write_csv
from .scenario import ConfigError, Scenario, load_scenario

_INT_AXES = ("n_elements", "a_active", "e_antennas")


def parse_sweep(text):
    """Parse 'axis=start:stop:step' into (axis, values tuple), stop inclusive."""
    axis, sep, grid = text.partition("=")
    if not sep:
        raise ConfigError(f"--sweep expects AXIS=START:STOP:STEP, got {text!r}")
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}, expected one of {AXES}")
    parts = grid.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--sweep expects START:STOP:STEP, got {grid!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as err:
        raise ConfigError(f"--sweep: {err}") from err
    if step <= 0 or stop < start:
        raise ConfigError("--sweep needs step > 0 and stop >= start")
    count = int((stop - start) / step + 1e-9) + 1
    values = [start + k * step for k in range(count)]
    if axis in _INT_AXES:
        if any(int(v) != v for v in values):
            raise ConfigError(f"axis {axis} takes integer values")
        values = [int(v) for v in values]
    return axis, tuple(values)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Monte Carlo latency sweeps for surface-assisted secure "
                    "computation offloading.")
    parser.add_argument("--config", metavar="FILE",
                        help="scenario config (key=value lines); omit for built-in defaults")
    parser.add_argument("--sweep", required=True, metavar="AXIS=START:STOP:STEP",
                        help=f"axis is one of {', '.join(AXES)}")
    parser.add_argument("--trials", type=int, default=200,
                        help="channel realizations per axis value (default 200)")
    parser.add_argument("--seed", type=int, default=1, help="64-bit base seed")
    parser.add_argument("--modes", default=",".join(ALL_MODES),
                        help="comma-separated subset of " + ",".join(ALL_MODES))
    parser.add_argument("--out", required=True, metavar="CSV", help="output CSV path")
    parser.add_argument("--deterministic", action="store_true",
                        help="suppress the timestamp comment for byte-identical reruns")
    parser.add_argument("--paired", action="store_true",
                        help="reuse each trial's seed across axis values (smoother trend curves)")
    parser.add_argument("--plot", nargs="?", const="", default=None, metavar="PNG",
                        help="also render mean-latency curves (default: CSV path with .png)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for trials (default 1)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as err:
                print(f"config error: cannot read {args.config}: {err}", file=sys.stderr)
                return 2
            scenario = load_scenario(text)
        else:
            scenario = Scenario()
        axis, values = parse_sweep(args.sweep)
        spec = SweepSpec(axis=axis, values=values, trials=args.trials,
                         base_seed=args.seed, modes=tuple(args.modes.split(",")))
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    table = run_sweep(spec, scenario, workers=max(1, args.workers),
                      paired_values=args.paired)

    try:
        write_csv(table, args.out, deterministic=args.deterministic)
        if args.plot is not None:
            from .plotting import render_sweep_figure
            plot_path = args.plot or _default_plot_path(args.out)
            render_sweep_figure(table, plot_path)
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 3
    return 0


def _default_plot_path(out_path):
    stem = out_path[:-4] if out_path.lower().endswith(".csv") else out_path
    return stem + ".png"


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
