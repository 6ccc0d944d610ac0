"""Subcomando wong: funcional cuadrático sobre los intervalos de signo del forzamiento."""
import argparse
import logging

from app.cli.check import save_reports
from app.cli.common import add_scenario_arguments, repository_for, resolve_scenario, verdict_exit_code
from app.cli.integrate import cmd_integrate
from app.core.errors import ScenarioError
from app.core.verdicts import CriterionReport
from app.core.wong import WongInstance, solution_functional, wong_test
from app.data.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("wong", help="Criterio del funcional cuadrático")
    add_scenario_arguments(parser)
    parser.add_argument(
        "--picone",
        action="store_true",
        help="Evaluar además Q en la solución integrada entre ceros consecutivos",
    )
    parser.set_defaults(func=run)


def _instance(scenario: ScenarioConfig) -> WongInstance:
    block = scenario.analysis.wong
    if block is None:
        raise ScenarioError("wong needs an analysis.wong block")
    return WongInstance.build(
        d=block.d, r=block.r, g=block.g, window=block.window,
        min_len=scenario.analysis.min_len, repetitions=scenario.analysis.repetitions,
    )


def cmd_wong(scenario: ScenarioConfig) -> CriterionReport:
    return wong_test(_instance(scenario))


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    report = cmd_wong(scenario)
    print(f"{report.criterion}: {report.verdict.tag.value}")
    for path in save_reports(scenario, [report]):
        print(f"  report: {path}")
    if args.picone:
        traj = cmd_integrate(scenario)
        values = solution_functional(_instance(scenario), traj)
        path = repository_for(scenario).save_result(scenario.name, "picone", {"values": values}, scenario)
        print(f"  picone: {len(values)} zero pairs -> {path}")
    return verdict_exit_code([report], args.require_verdict)
