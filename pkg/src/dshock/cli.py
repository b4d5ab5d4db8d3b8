"""Command line front end.

Exit codes: 0 success, 2 bad input (scenario/parameter validation),
3 a run diverged, 1 anything unexpected.
"""

import argparse
import sys
from dataclasses import replace

from .errors import DshockError, NothingToPlotError, ScenarioError
from .ladder import run_residual_study, run_scale_study
from .scenario import emit_plot_script, load_scenario, write_trajectory
from .timeint import run

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_DIVERGED = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dshock",
        description="Weak-asymptotic delta shock laboratory on the 2-pi torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write CSV snapshots")
    p_run.add_argument("--scenario", required=True, help="scenario config file")
    p_run.add_argument("--epsilon", type=float, default=None,
                       help="override params.epsilon")
    p_run.add_argument("--out", default=None, help="output directory")

    p_scale = sub.add_parser("scale-study",
                             help="delta-strength area across an eps-halving ladder")
    p_scale.add_argument("--scenario", required=True)
    p_scale.add_argument("--n", type=int, default=None,
                         help="density power (retunes alpha/beta defaults)")
    p_scale.add_argument("--eps-start", type=float, default=None)
    p_scale.add_argument("--levels", type=int, default=4)
    p_scale.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p_res = sub.add_parser("residual-study",
                           help="weak residual decay across an eps-halving ladder")
    p_res.add_argument("--scenario", required=True)
    p_res.add_argument("--equation", required=True, choices=["v", "w", "z"])
    p_res.add_argument("--eps-start", type=float, default=None)
    p_res.add_argument("--levels", type=int, default=3)
    p_res.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p_plot = sub.add_parser("plot", help="emit a gnuplot script for a run directory")
    p_plot.add_argument("--dir", required=True, help="directory with snapshot CSVs")
    return parser


def _load(path, epsilon=None):
    try:
        scenario = load_scenario(path)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}")
    if epsilon is not None:
        scenario = replace(scenario, params=scenario.params.with_epsilon(epsilon))
        scenario.validate()
    return scenario


def _emit_report(report, out):
    text = report.to_csv()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            scenario = _load(args.scenario, args.epsilon)
            traj = run(scenario)
            out_dir = args.out or scenario.output
            write_trajectory(traj, scenario, out_dir)
            if traj.diverged:
                print(f"diverged at t = {traj.divergence_time:.6g}", file=sys.stderr)
                return EXIT_DIVERGED
            print(f"wrote {len(traj.snapshots)} snapshots to {out_dir}")
            return EXIT_OK

        if args.command == "scale-study":
            scenario = _load(args.scenario)
            report = run_scale_study(scenario, n=args.n,
                                     eps_start=args.eps_start, levels=args.levels)
            _emit_report(report, args.out)
            return EXIT_DIVERGED if report.any_diverged else EXIT_OK

        if args.command == "residual-study":
            scenario = _load(args.scenario)
            report = run_residual_study(scenario, args.equation,
                                        eps_start=args.eps_start, levels=args.levels)
            _emit_report(report, args.out)
            return EXIT_DIVERGED if report.any_diverged else EXIT_OK

        if args.command == "plot":
            path = emit_plot_script(args.dir)
            print(f"wrote {path}")
            return EXIT_OK
    except (ScenarioError, NothingToPlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DshockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
