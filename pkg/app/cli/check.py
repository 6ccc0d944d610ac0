"""Subcomando check: ejecuta un criterio sobre el escenario y guarda su reporte."""
import argparse
import logging
from typing import Dict, List

from app.cli.common import add_scenario_arguments, repository_for, resolve_scenario, verdict_exit_code
from app.core.criteria import (
    Criterion,
    check_comparison_nonosc,
    check_forced_osc,
    check_positive_part_nonosc,
    check_positive_part_osc,
)
from app.core.errors import ScenarioError
from app.core.interval_oscillation import IntervalOscInstance, check_interval_comparison
from app.core.verdicts import CriterionReport
from app.core.wong import WongInstance, wong_test
from app.data.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

# identificadores alternativos aceptados por la línea de comandos
CRITERION_ALIASES: Dict[str, str] = {
    "thm31": Criterion.COMPARISON_NONOSC.value,
    "cor31": Criterion.POSITIVE_PART_NONOSC.value,
    "thm32": Criterion.FORCED_OSC.value,
    "cor32": Criterion.POSITIVE_PART_OSC.value,
    "thm22": Criterion.INTERVAL_COMPARISON.value,
}


def criterion_id(value: str) -> str:
    """Traduce un alias al nombre del criterio; los demás valores pasan sin cambios."""
    return CRITERION_ALIASES.get(value, value)


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="Verifica un criterio de oscilación o no oscilación")
    add_scenario_arguments(parser)
    parser.add_argument(
        "--criterion",
        type=criterion_id,
        choices=[c.value for c in Criterion],
        default=None,
        help="Criterio (default: analysis.criterion del escenario)",
    )
    parser.set_defaults(func=run)


def _comparison(scenario: ScenarioConfig, eq) -> list:
    comparison = scenario.analysis.comparison
    return list(eq.coefficients) if comparison is None else list(comparison)


def _partitions(scenario: ScenarioConfig):
    partitions = scenario.analysis.partitions
    return partitions.to_partitions() if partitions is not None else None


def _cross_check(scenario: ScenarioConfig):
    block = scenario.analysis.cross_check
    return (block.histories, block.bin_width) if block is not None else None


def cmd_check(scenario: ScenarioConfig) -> List[CriterionReport]:
    """
    Ejecuta analysis.criterion y devuelve sus reportes.

    interval-comparison produce un reporte por partición; el resto, uno solo.

    Raises:
        ScenarioError: falta el criterio o un bloque que el criterio necesita
    """
    analysis = scenario.analysis
    if analysis.criterion is None:
        raise ScenarioError("no criterion given: set analysis.criterion or pass --criterion")
    criterion = Criterion(analysis.criterion)
    eq = scenario.equation.to_spec()
    seed = scenario.seed
    tol = analysis.tol
    logger.info(f"running {criterion.value} on '{scenario.name}'")

    if criterion == Criterion.WONG:
        if analysis.wong is None:
            raise ScenarioError("criterion 'wong' needs an analysis.wong block")
        block = analysis.wong
        inst = WongInstance.build(
            d=block.d, r=block.r, g=block.g, window=block.window,
            min_len=analysis.min_len, repetitions=analysis.repetitions,
        )
        return [wong_test(inst)]

    if criterion == Criterion.INTERVAL_COMPARISON:
        partitions = _partitions(scenario)
        if not partitions:
            raise ScenarioError("criterion 'interval-comparison' needs analysis.partitions")
        comparison = eq.with_coefficients(_comparison(scenario, eq)).homogeneous()
        if not comparison.is_q_zero((partitions[0][0], partitions[-1][3])):
            raise ScenarioError("criterion 'interval-comparison' needs q = 0")
        return [
            check_interval_comparison(
                IntervalOscInstance.from_equation(comparison, part),
                eps0=analysis.eps0, eps_count=analysis.eps_count, scan_points=analysis.scan_points, tol=tol,
            )
            for part in partitions
        ]

    window = scenario.window
    witness = analysis.witness.to_witness() if analysis.witness is not None else None
    if criterion == Criterion.COMPARISON_NONOSC:
        return [check_comparison_nonosc(
            eq, _comparison(scenario, eq), window, witness=witness,
            histories=analysis.search_histories, seed=seed, tol=tol,
        )]
    if criterion == Criterion.POSITIVE_PART_NONOSC:
        return [check_positive_part_nonosc(
            eq, window, witness=witness, histories=analysis.search_histories, seed=seed, tol=tol,
        )]

    options = dict(
        strategy=analysis.strategy,
        partitions=_partitions(scenario),
        min_len=analysis.min_len,
        repetitions=analysis.repetitions,
        eps0=analysis.eps0,
        eps_count=analysis.eps_count,
        scan_points=analysis.scan_points,
        cross_check=_cross_check(scenario),
        seed=seed,
        tol=tol,
    )
    if criterion == Criterion.FORCED_OSC:
        return [check_forced_osc(eq, _comparison(scenario, eq), window, **options)]
    return [check_positive_part_osc(eq, window, **options)]


def save_reports(scenario: ScenarioConfig, reports: List[CriterionReport]) -> List[str]:
    if not scenario.output.report_json:
        return []
    repo = repository_for(scenario)
    if len(reports) == 1:
        return [str(repo.save_report(scenario.name, reports[0], scenario))]
    return [str(repo.save_report(f"{scenario.name}.{i}", report, scenario)) for i, report in enumerate(reports)]


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    reports = cmd_check(scenario)
    paths = save_reports(scenario, reports)
    for report in reports:
        verdict = report.verdict
        print(f"{report.criterion}: {verdict.tag.value}")
        for hypothesis in report.hypotheses:
            print(f"  {hypothesis.id}: {hypothesis.status.value}")
    for path in paths:
        print(f"  report: {path}")
    return verdict_exit_code(reports, args.require_verdict)
