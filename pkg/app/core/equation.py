"""Modelo de datos de la ecuación funcional-diferencial y sus datos de Cauchy."""
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union
import logging

import numpy as np

from app.config import settings
from app.core.errors import ComparisonShapeError, HistoryDomainError
from app.core.expressions import Coefficient, as_fn, constant
from app.core.signs import sample_grid

logger = logging.getLogger(__name__)

Source = Union[str, float, int, Coefficient]


class EquationError(ValueError):
    """Los coeficientes no cumplen p > 0 o alpha(t) <= t en la grilla."""


def is_identity_argument(alpha: Coefficient, window: Optional[Tuple[float, float]] = None, slack: Optional[float] = None) -> bool:
    """True si alpha(t) = t (estructuralmente o en toda la grilla de la ventana)."""
    if getattr(alpha, "is_identity", lambda: False)():
        return True
    if window is None:
        return False
    slack = settings.GRID_SLACK if slack is None else slack
    ts = sample_grid(*window)
    return bool(np.all(np.abs(np.asarray(alpha(ts)) - ts) <= slack * np.maximum(1.0, np.abs(ts))))


@dataclass(frozen=True)
class DelayTerm:
    """Término r(t) * phi(alpha(t))."""
    coefficient: Coefficient
    argument: Coefficient

    @classmethod
    def of(cls, coefficient: Source, argument: Source = "t") -> "DelayTerm":
        return cls(as_fn(coefficient), as_fn(argument))


@dataclass(frozen=True)
class EquationSpec:
    """
    (p phi')' + q phi' + sum_j r_j(t) phi(alpha_j(t)) = f(t),  t >= t0.
    """
    p: Coefficient
    q: Coefficient
    f: Coefficient
    terms: Tuple[DelayTerm, ...]
    t0: float = 0.0

    @classmethod
    def build(
        cls,
        p: Source = "1",
        q: Source = "0",
        f: Source = "0",
        terms: Sequence[Tuple[Source, Source]] = (),
        t0: float = 0.0,
    ) -> "EquationSpec":
        """Construye la ecuación desde fuentes de texto, números o coeficientes."""
        return cls(
            p=as_fn(p),
            q=as_fn(q),
            f=as_fn(f),
            terms=tuple(DelayTerm.of(r, alpha) for r, alpha in terms),
            t0=float(t0),
        )

    @property
    def coefficients(self) -> Tuple[Coefficient, ...]:
        return tuple(term.coefficient for term in self.terms)

    @property
    def arguments(self) -> Tuple[Coefficient, ...]:
        return tuple(term.argument for term in self.terms)

    def all_functions(self) -> Tuple[Coefficient, ...]:
        return (self.p, self.q, self.f) + self.coefficients + self.arguments

    def homogeneous(self) -> "EquationSpec":
        """La misma ecuación con f = 0."""
        return replace(self, f=constant(0.0))

    def with_coefficients(self, coefficients: Sequence[Source]) -> "EquationSpec":
        """Ecuación de comparación: mismos p, q, alpha_j y nuevos r_j."""
        if len(coefficients) != len(self.terms):
            raise ComparisonShapeError(
                f"expected {len(self.terms)} comparison coefficients, got {len(coefficients)}"
            )
        terms = tuple(DelayTerm(as_fn(r), term.argument) for r, term in zip(coefficients, self.terms))
        return replace(self, terms=terms)

    def is_q_zero(self, window: Tuple[float, float]) -> bool:
        q_const = getattr(self.q, "constant", lambda: None)()
        if q_const is not None:
            return q_const == 0.0
        return bool(np.all(np.asarray(self.q(sample_grid(*window))) == 0.0))

    def validate(self, t_start: float, t_end: float, step: Optional[float] = None) -> None:
        """
        Verifica p > 0 y alpha_j(t) <= t en una grilla de [t_start, t_end].

        Raises:
            EquationError: si alguna condición falla (con el primer punto malo)
        """
        if t_end <= t_start:
            return
        ts = sample_grid(t_start, t_end, step)
        p_values = np.asarray(self.p(ts))
        if np.any(p_values <= 0.0):
            bad = ts[np.argmax(p_values <= 0.0)]
            raise EquationError(f"p must be positive, p({bad!r}) = {self.p(bad)!r}")
        for j, term in enumerate(self.terms):
            alphas = np.asarray(term.argument(ts))
            ahead = alphas > ts + settings.GRID_SLACK * np.maximum(1.0, np.abs(ts))
            if np.any(ahead):
                bad = ts[np.argmax(ahead)]
                raise EquationError(f"argument {j + 1} is advanced: alpha({bad!r}) = {term.argument(bad)!r}")

    def min_argument(self, t_start: float, t_end: float) -> float:
        """Menor imagen de los argumentos sobre [t_start, t_end]."""
        if not self.terms:
            return t_start
        ts = sample_grid(t_start, t_end, settings.BREAKPOINT_SCAN_STEP)
        return float(min(np.min(term.argument(ts)) for term in self.terms))


@dataclass(frozen=True)
class HistorySpec:
    """phi(t) = theta(t) para t <= t1 y phi'(t1) = zeta."""
    t1: float
    theta: Coefficient = field(default_factory=lambda: constant(0.0))
    zeta: float = 0.0

    @classmethod
    def build(cls, t1: float = 0.0, theta: Source = "0", zeta: float = 0.0) -> "HistorySpec":
        return cls(float(t1), as_fn(theta), float(zeta))

    def check(self, lower: float) -> None:
        """
        Verifica que theta sea evaluable en [lower, t1] y continua en t1.

        Raises:
            HistoryDomainError: si theta no está definida o salta en t1
        """
        ts = sample_grid(min(lower, self.t1), self.t1) if lower < self.t1 else np.array([self.t1])
        try:
            values = np.asarray(self.theta(ts))
        except ValueError as exc:
            raise HistoryDomainError(f"history not defined on [{lower!r}, {self.t1!r}]: {exc}") from None
        at_t1 = float(values[-1])
        left = float(self.theta(self.t1 - 1e-9 * max(1.0, abs(self.t1))))
        if abs(left - at_t1) > 1e-6 * max(1.0, abs(at_t1)):
            raise HistoryDomainError(f"history is discontinuous at t1={self.t1!r}")


def linear_history(t1: float, value: float, slope: float) -> HistorySpec:
    """Historia constante con derivada inicial dada."""
    return HistorySpec(float(t1), constant(float(value)), float(slope))
