"""Subcomando integrate: problema de Cauchy, trayectoria CSV y ceros JSON."""
import argparse
from typing import Optional
import logging

from app.cli.common import EXIT_OK, add_scenario_arguments, repository_for, resolve_scenario
from app.core.integrator import Trajectory, solve_cauchy
from app.data.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("integrate", help="Integra el problema de Cauchy del escenario")
    add_scenario_arguments(parser)
    parser.set_defaults(func=run)


def cmd_integrate(scenario: ScenarioConfig) -> Trajectory:
    """
    Integra el escenario hasta analysis.horizon (t1 si no hay horizonte: trayectoria vacía).

    Raises:
        IntegrationError, HistoryDomainError, ExpressionDomainError: fallas numéricas
    """
    eq = scenario.equation.to_spec()
    hist = scenario.history.to_spec()
    horizon = scenario.analysis.horizon if scenario.analysis.horizon is not None else hist.t1
    return solve_cauchy(eq, hist, horizon, tol=scenario.analysis.tol)


def save_trajectory(scenario: ScenarioConfig, traj: Trajectory, name: Optional[str] = None) -> dict:
    """Escribe los archivos que pide el bloque output; devuelve sus rutas."""
    repo = repository_for(scenario)
    name = name or scenario.name
    paths = {}
    if scenario.output.trajectory_csv:
        paths["trajectory"] = str(repo.save_trajectory(name, traj))
    if scenario.output.zeros_json:
        paths["zeros"] = str(repo.save_zeros(name, traj, scenario))
    return paths


def run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args)
    traj = cmd_integrate(scenario)
    paths = save_trajectory(scenario, traj)
    print(f"{scenario.name}: reached t={traj.reached:.6g}, {len(traj.zeros)} zeros")
    for kind, path in paths.items():
        print(f"  {kind}: {path}")
    return EXIT_OK
