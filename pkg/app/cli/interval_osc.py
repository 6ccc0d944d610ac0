"""Subcomando interval-osc: búsqueda de un par conjugado de (p phi')' + r phi = 0 en [a, b]."""
import argparse
import logging

from app.cli.common import EXIT_INCONCLUSIVE, EXIT_OK, add_scenario_arguments, repository_for, resolve_scenario
from app.core.errors import ScenarioError
from app.core.expressions import as_fn
from app.core.sturm import interval_oscillatory
from app.data.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("interval-osc", help="Oscilación de una ecuación ordinaria en un intervalo")
    add_scenario_arguments(parser)
    parser.set_defaults(func=run)


def cmd_interval_osc(scenario: ScenarioConfig) -> dict:
    """
    Raises:
        ScenarioError: falta el bloque analysis.interval_osc
    """
    block = scenario.analysis.interval_osc
    if block is None:
        raise ScenarioError("interval-osc needs an analysis.interval_osc block")
    found, pair = interval_oscillatory(
        as_fn(block.p), as_fn(block.r), block.interval,
        scan_points=scenario.analysis.scan_points, tol=scenario.analysis.tol,
    )
    return {
        "p": block.p,
        "r": block.r,
        "interval": list(block.interval),
        "oscillatory": found,
        "conjugate_pair": list(pair) if pair else None,
    }


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    result = cmd_interval_osc(scenario)
    a, b = result["interval"]
    print(f"[{a:.6g}, {b:.6g}]: oscillatory={result['oscillatory']} pair={result['conjugate_pair']}")
    if scenario.output.report_json:
        path = repository_for(scenario).save_result(scenario.name, "interval-osc", result, scenario)
        print(f"  report: {path}")
    if args.require_verdict and not result["oscillatory"]:
        return EXIT_INCONCLUSIVE
    return EXIT_OK
