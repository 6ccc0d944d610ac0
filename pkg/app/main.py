"""Punto de entrada de la línea de comandos."""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli import check, integrate, interval_osc, reproduce, wong
from app.cli.common import EXIT_CONFIG, EXIT_NUMERIC
from app.config import settings
from app.core.equation import EquationError
from app.core.errors import NUMERIC_FAILURES, ComparisonShapeError, ExpressionSyntaxError, ScenarioError

logger = logging.getLogger(__name__)

CONFIG_ERRORS = (ScenarioError, ExpressionSyntaxError, ComparisonShapeError, EquationError, ValidationError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdelab",
        description="Integración y criterios de oscilación para ecuaciones funcional-diferenciales forzadas",
    )
    parser.add_argument(
        "--log-level",
        dest="log_level",
        default=settings.LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Nivel de logging",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Incluir subcomandos
    integrate.register(subparsers)
    check.register(subparsers)
    interval_osc.register(subparsers)
    wong.register(subparsers)
    reproduce.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Ejecuta un subcomando y traduce las excepciones a códigos de salida.

    Returns:
        0 éxito, 1 Inconclusive con --require-verdict, 2 error de configuración,
        3 falla numérica
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except NUMERIC_FAILURES as exc:
        logger.error(f"numeric failure: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CONFIG_ERRORS as exc:
        logger.error(f"configuration error: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
