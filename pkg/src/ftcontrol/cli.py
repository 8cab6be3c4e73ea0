"""Command-line interface: run, compare, calibrate."""

import argparse
import sys

from .config import MODES, ScenarioConfig, load_config
from .errors import FtControlError
from .harness import build_artifacts, run_comparison, run_scenario, \
    save_artifacts, write_comparison_csv

DEFAULT_COMPARE_MODES = ["fixed", "pl-always", "pl-on-detect", "deterministic"]


def _load(path):
    if path is None:
        return ScenarioConfig()
    return load_config(path)


def cmd_run(args):
    config = _load(args.config)
    result = run_scenario(config, mode=args.mode, seed=args.seed)
    out = args.out or config.output
    if out:
        result.to_csv(out)
    print(f"mode={result.mode} seed={result.seed} "
          f"faulty_joint_mse={result.faulty_joint_mse:.6g} "
          f"healthy_joint_mse={result.healthy_joint_mse:.6g}")
    if result.verdict_step >= 0:
        t = result.verdict_step * config.plant.dt
        print(f"fault isolated at t={t:.3f}s (step {result.verdict_step})")
    if out:
        print(f"time series written to {out}")
    return 0


def cmd_compare(args):
    config = _load(args.config)
    seeds = [config.seed + i for i in range(args.seeds)]
    rows = run_comparison(config, args.modes, seeds)
    header = f"{'mode':<16} {'faulty_joint_mse':>18} {'healthy_joint_mse':>18}"
    print(header)
    for row in rows:
        print(f"{row['mode']:<16} {row['faulty_joint_mse']:>18.6g} "
              f"{row['healthy_joint_mse']:>18.6g}")
    if args.out:
        write_comparison_csv(rows, args.out)
        print(f"comparison table written to {args.out}")
    return 0


def cmd_calibrate(args):
    config = _load(args.config)
    artifacts = build_artifacts(config)
    save_artifacts(artifacts, args.out)
    print(f"camera model and residual monitors written to {args.out}")
    print(f"proprioceptive threshold: {artifacts.monitor_p.threshold:g}")
    print(f"visual threshold: {artifacts.monitor_v.threshold:g}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ftcontrol",
        description="Fault-tolerant active-inference control of a simulated 2-DOF arm",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write its time series")
    run.add_argument("--config", help="scenario config YAML (defaults built in)")
    run.add_argument("--mode", choices=MODES, default=None,
                     help="override the config's recovery mode")
    run.add_argument("--seed", type=int, default=None, help="override the run seed")
    run.add_argument("--out", help="output CSV path")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="mean MSE per mode across seeds")
    compare.add_argument("--config", help="scenario config YAML")
    compare.add_argument("--seeds", type=int, default=10,
                         help="number of seeds (config seed + 0..n-1)")
    compare.add_argument("--modes", nargs="+", choices=MODES,
                         default=DEFAULT_COMPARE_MODES)
    compare.add_argument("--out", help="comparison CSV path")
    compare.set_defaults(func=cmd_compare)

    cal = sub.add_parser("calibrate",
                         help="fit the camera model and residual monitors")
    cal.add_argument("--config", help="scenario config YAML")
    cal.add_argument("--out", required=True, help="artifact output directory")
    cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FtControlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
