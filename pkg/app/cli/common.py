"""Opciones y utilidades compartidas por los subcomandos."""
import argparse
import logging
from typing import Iterable, Optional

from app.config import settings
from app.core.errors import ScenarioError
from app.core.expressions import parse_constant
from app.core.verdicts import CriterionReport, VerdictTag
from app.data.report_repository import ReportRepository
from app.data.scenario import ScenarioConfig, available_presets, load_preset, load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    """Opciones que sobrescriben el escenario: --horizon, --tol, --seed, --out-dir, --require-verdict."""
    parser.add_argument("--horizon", type=str, default=None, help="Horizonte de integración (acepta '30*pi')")
    parser.add_argument("--tol", type=float, default=None, help="Tolerancia del integrador")
    parser.add_argument("--seed", type=int, default=None, help="Semilla de las historias aleatorias")
    parser.add_argument("--out-dir", dest="out_dir", default=None, help=f"Directorio de salida (default {settings.OUTPUT_DIR})")
    parser.add_argument(
        "--require-verdict",
        dest="require_verdict",
        action="store_true",
        help="Salir con código 1 si el veredicto es Inconclusive",
    )


def add_scenario_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="Archivo de escenario JSON")
    source.add_argument("--preset", choices=available_presets(), help="Escenario incluido en el paquete")
    add_output_arguments(parser)


def resolve_scenario(args: argparse.Namespace, preset: Optional[str] = None) -> ScenarioConfig:
    """
    Carga el escenario de --config o --preset y aplica las opciones de la línea de comandos.

    Raises:
        ScenarioError: archivo inválido o combinación de opciones inválida
    """
    preset = preset or getattr(args, "preset", None)
    config = getattr(args, "config", None)
    if config:
        scenario = load_scenario(config)
    elif preset:
        scenario = load_preset(preset)
    else:
        raise ScenarioError("either --config or --preset is required")
    horizon = parse_constant(args.horizon) if args.horizon is not None else None
    return scenario.with_overrides(
        horizon=horizon,
        tol=args.tol,
        seed=args.seed,
        out_dir=args.out_dir,
        criterion=getattr(args, "criterion", None),
    )


def repository_for(scenario: ScenarioConfig) -> ReportRepository:
    return ReportRepository(scenario.output.dir or settings.OUTPUT_DIR)


def verdict_exit_code(reports: Iterable[CriterionReport], require_verdict: bool) -> int:
    """1 si se pidió veredicto y alguno es Inconclusive; 0 en otro caso."""
    inconclusive = [r.criterion for r in reports if r.verdict.tag == VerdictTag.INCONCLUSIVE]
    if inconclusive and require_verdict:
        logger.warning(f"inconclusive verdict: {', '.join(inconclusive)}")
        return EXIT_INCONCLUSIVE
    return EXIT_OK
