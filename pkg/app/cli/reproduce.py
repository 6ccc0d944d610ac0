"""Subcomando reproduce: corre de punta a punta los dos escenarios de referencia."""
import argparse
import logging
from typing import Dict

from app.cli.check import cmd_check, save_reports
from app.cli.common import add_output_arguments, repository_for, resolve_scenario, verdict_exit_code
from app.cli.integrate import cmd_integrate, save_trajectory
from app.core.crosscheck import search_zero_free
from app.data.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

# id de reproducción -> preset
REPRODUCTIONS: Dict[str, str] = {
    "nonoscillation": "delay-nonoscillation",
    "oscillation": "forced-delay-oscillation",
}

# alias numéricos de los escenarios
REPRODUCTION_ALIASES: Dict[str, str] = {
    "3.1": "nonoscillation",
    "3.2": "oscillation",
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("reproduce", help="Reproduce un escenario de referencia completo")
    parser.add_argument(
        "example_id",
        type=lambda value: REPRODUCTION_ALIASES.get(value, value),
        choices=sorted(REPRODUCTIONS),
        help="Escenario a reproducir (también 3.1 y 3.2)",
    )
    add_output_arguments(parser)
    parser.set_defaults(func=run)


def _nonoscillation(scenario: ScenarioConfig) -> dict:
    """Criterio con testigo y una solución numérica sin ceros de la ecuación forzada hasta el horizonte."""
    reports = cmd_check(scenario)
    eq = scenario.equation.to_spec()
    window = (scenario.history.t1, scenario.analysis.horizon)
    traj, attempts = search_zero_free(eq, window, seed=scenario.seed, tol=scenario.analysis.tol)
    zero_free = {"window": list(window), "found": traj is not None, "attempts": attempts}
    if traj is not None:
        zero_free["reached"] = traj.reached
        zero_free["history"] = {"theta": traj.history.theta.to_source(), "zeta": traj.history.zeta}
        zero_free["files"] = save_trajectory(scenario, traj, name=f"{scenario.name}.zero-free")
    return {"reports": reports, "zero_free": zero_free}


def _oscillation(scenario: ScenarioConfig) -> dict:
    """Criterio con contraste numérico y la trayectoria de la historia del escenario."""
    reports = cmd_check(scenario)
    traj = cmd_integrate(scenario)
    files = save_trajectory(scenario, traj)
    return {
        "reports": reports,
        "integration": {"reached": traj.reached, "zeros": len(traj.zeros), "files": files},
    }


def cmd_reproduce(example_id: str, scenario: ScenarioConfig) -> dict:
    """
    Returns:
        Dict con los reportes (CriterionReport) y los resultados numéricos adicionales
    """
    runner = _nonoscillation if example_id == "nonoscillation" else _oscillation
    logger.info(f"reproducing '{example_id}' from preset '{scenario.name}'")
    return runner(scenario)


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args, preset=REPRODUCTIONS[args.example_id])
    result = cmd_reproduce(args.example_id, scenario)
    reports = result.pop("reports")
    save_reports(scenario, reports)
    payload = {"reports": [report.to_dict() for report in reports], **result}
    path = repository_for(scenario).save_bundle(args.example_id, payload, scenario)
    for report in reports:
        print(f"{report.criterion}: {report.verdict.tag.value}")
    print(f"  bundle: {path}")
    return verdict_exit_code(reports, args.require_verdict)
