"""
Command-line front end.

    herglotz simulate --scenario affine --route compare --t-end 2 --dt 1e-3 --output out.csv
    herglotz check affine --seed 42
    herglotz list-scenarios

Exit status: 0 success, 1 configuration error, 2 numerical failure, 3 failed invariant check.
"""

import argparse
import json
import logging
import os
import sys

from .entities import FullState, GroupStepper, OutputFormat, Route, ScenarioName
from .errors import HerglotzError, NumericalError
from .files import RunConfig, build_config, load_config, trajectory_document, write_csv, write_json, write_trajectory
from .report import SAMPLE_COUNT, run_checks
from .scenarios import SCENARIO_PARAMETERS, SCENARIOS, build_scenario
from .simulation import simulate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CHECK_FAILED = 3

LOG_LEVELS = {
    "quiet": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def configure_logging():
    level_name = os.environ.get("HERGLOTZ_LOG", "info").strip().lower()
    logging.basicConfig(
        level=LOG_LEVELS.get(level_name, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _parse_param(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {name!r} needs a numeric value, got {value!r}") from None


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors exit with the configuration status
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="herglotz", description="Contact Lagrangian dynamics with symmetry reduction")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="integrate a scenario along one route")
    sim.add_argument("--config", help="YAML or JSON file with RunConfig fields")
    sim.add_argument("--scenario", choices=[s.value for s in ScenarioName])
    sim.add_argument("--param", action="append", type=_parse_param, default=[], metavar="NAME=VALUE")
    sim.add_argument("--gamma", type=float, help="shorthand for --param gamma=VALUE")
    sim.add_argument("--t-end", dest="t_end", type=float)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--route", choices=[r.value for r in Route])
    sim.add_argument("--stepper", choices=[s.value for s in GroupStepper])
    sim.add_argument("--output", dest="output_path", help="output file (stdout when omitted)")
    sim.add_argument("--format", choices=[f.value for f in OutputFormat])
    sim.add_argument("--seed", type=int)

    check = commands.add_parser("check", help="run the invariant suite of a scenario")
    check.add_argument("scenario", nargs="?", default=ScenarioName.affine.value, choices=[s.value for s in ScenarioName])
    check.add_argument("--param", action="append", type=_parse_param, default=[], metavar="NAME=VALUE")
    check.add_argument("--seed", type=int, default=42)
    check.add_argument("--samples", type=int, default=SAMPLE_COUNT)
    check.add_argument("--output", dest="output_path", help="write the report as JSON")

    commands.add_parser("list-scenarios", help="print registered scenarios and their parameters")
    return parser


# ----------------------------
# Commands
# ----------------------------

def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides scenario defaults."""
    base = load_config(args.config) if args.config else build_config({})
    parameters = dict(base.parameters)
    parameters.update(dict(args.param))
    if args.gamma is not None:
        parameters["gamma"] = args.gamma
    return base.merged(
        scenario=args.scenario,
        parameters=parameters,
        t_end=args.t_end,
        dt=args.dt,
        route=args.route,
        stepper=args.stepper,
        output_path=args.output_path,
        format=args.format,
        seed=args.seed,
    )


def cmd_simulate(config: RunConfig) -> int:
    scenario = build_scenario(config.scenario, config.parameters)
    initial = None
    if config.initial_state is not None:
        initial = FullState.from_vector(
            config.initial_state,
            base_dim=scenario.chart.base_dim,
            fiber_dim=scenario.chart.fiber_dim,
        )
    result = simulate(
        scenario=scenario,
        route=config.route,
        t_end=config.t_end,
        dt=config.dt,
        initial=initial,
        stepper=config.stepper,
    )

    if config.output_path:
        write_trajectory(
            result.frame,
            config.output_path,
            fmt=config.format,
            scenario=config.scenario,
            route=config.route,
            parameters=scenario.parameters,
            summary=result.summary,
        )
        summary_stream = sys.stdout
    else:
        if config.format is OutputFormat.json:
            document = trajectory_document(
                result.frame,
                scenario=config.scenario,
                route=config.route,
                parameters=scenario.parameters,
                summary=result.summary,
            )
            sys.stdout.write(json.dumps(document, indent=2) + "\n")
        else:
            write_csv(result.frame, sys.stdout)
        summary_stream = sys.stderr

    details = ", ".join(f"{name}={value:.3e}" for name, value in result.summary.items())
    print(f"{config.scenario} [{config.route}] {len(result.frame)} knots: {details}", file=summary_stream)
    return EXIT_OK


def cmd_check(*, scenario_name: str, parameters: dict[str, float], seed: int, samples: int, output_path: str | None) -> int:
    report = run_checks(build_scenario(scenario_name, parameters), seed=seed, samples=samples)
    for check in report.checks:
        mark = "✅" if check.passed else "❌"
        print(f"{mark} {check.name:<40} {check.residual:.3e}  (tol {check.tolerance:.0e})")
    if output_path:
        write_json(report.to_dict(), output_path)
    if report.passed:
        print(f"All {len(report.checks)} checks passed for {scenario_name} (seed {seed})")
        return EXIT_OK
    print(f"{len(report.failures())} of {len(report.checks)} checks failed for {scenario_name}", file=sys.stderr)
    return EXIT_CHECK_FAILED


def cmd_list_scenarios() -> int:
    for name in SCENARIOS:
        print(f"{name.value:<20} parameters: {', '.join(SCENARIO_PARAMETERS[name])}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        match args.command:
            case "simulate":
                return cmd_simulate(resolve_config(args))
            case "check":
                return cmd_check(
                    scenario_name=args.scenario,
                    parameters=dict(args.param),
                    seed=args.seed,
                    samples=args.samples,
                    output_path=args.output_path,
                )
            case "list-scenarios":
                return cmd_list_scenarios()
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except HerglotzError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
