"""Excepciones del laboratorio numérico."""
from typing import Optional


class ExpressionSyntaxError(ValueError):
    """Error de sintaxis en una expresión de coeficiente, con posición en la fuente."""

    def __init__(self, message: str, source: str = "", position: int = 0):
        self.source = source
        self.position = position
        self.line = source.count("\n", 0, position) + 1
        self.column = position - (source.rfind("\n", 0, position) + 1) + 1
        self.message = message
        super().__init__(f"{message} (line {self.line}, col {self.column})")


class ExpressionDomainError(ValueError):
    """Evaluación fuera del dominio (ln de no positivo, división por cero, no finito)."""

    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        suffix = f" at t={t!r}" if t is not None else ""
        super().__init__(f"{message}{suffix}")


class QuadratureError(ArithmeticError):
    """El refinamiento de paneles agotó su presupuesto."""


class HistoryDomainError(ValueError):
    """La función inicial no está definida suficientemente a la izquierda."""


class IntegrationError(ArithmeticError):
    """Falla del integrador (paso demasiado chico u otra falla del resolvedor)."""

    def __init__(self, message: str, t: Optional[float] = None):
        self.t = t
        suffix = f" at t={t!r}" if t is not None else ""
        super().__init__(f"{message}{suffix}")


class TransformUndefinedError(ValueError):
    """phi se anula dentro del tramo de una transformación de Riccati."""


class ComparisonShapeError(ValueError):
    """Los coeficientes de comparación no corresponden a los términos de la ecuación."""


class ScenarioError(ValueError):
    """Archivo de escenario ausente, ilegible o inválido."""


NUMERIC_FAILURES = (
    IntegrationError,
    QuadratureError,
    ExpressionDomainError,
    HistoryDomainError,
    TransformUndefinedError,
)
