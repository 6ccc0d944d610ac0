"""Verificación de hipótesis sobre grillas de muestreo."""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from app.config import settings
from app.core.expressions import Coefficient
from app.core.signs import SignPattern, find_sign_patterns, sample_grid

logger = logging.getLogger(__name__)


class HypothesisStatus(str, Enum):
    VERIFIED = "verified"
    VIOLATED = "violated"
    NOT_VERIFIABLE = "not-verifiable"


@dataclass(frozen=True)
class HypothesisResult:
    """Resultado de la verificación de una hipótesis."""
    id: str
    status: HypothesisStatus
    message: str
    worst_point: Optional[float] = None
    margin: Optional[float] = None
    caveat: Optional[str] = None

    @property
    def verified(self) -> bool:
        return self.status == HypothesisStatus.VERIFIED

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status.value,
            "worst_point": self.worst_point,
            "margin": self.margin,
            "message": self.message,
            "caveat": self.caveat,
        }


def _identity_mask(alpha: Coefficient, ts: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(alpha(ts)) - ts) <= settings.GRID_SLACK * np.maximum(1.0, np.abs(ts))


class HypothesisCheck:
    """Verificaciones en grilla compartidas por los criterios."""

    @staticmethod
    def check_dominance(
        upper: Sequence[Coefficient],
        lower: Sequence[Coefficient],
        window: Tuple[float, float],
        hypothesis_id: str = "dominance",
    ) -> HypothesisResult:
        """Verifica upper_j(t) >= lower_j(t) para todo j en la grilla."""
        ts = sample_grid(*window)
        worst_margin, worst_point, worst_j = np.inf, None, None
        for j, (u, v) in enumerate(zip(upper, lower), start=1):
            diff = np.asarray(u(ts)) - np.asarray(v(ts))
            i = int(np.argmin(diff))
            if diff[i] < worst_margin:
                worst_margin, worst_point, worst_j = float(diff[i]), float(ts[i]), j
        if worst_j is None:
            return HypothesisResult(hypothesis_id, HypothesisStatus.VERIFIED, "Sin términos con desvío")
        if worst_margin < -settings.GRID_SLACK:
            return HypothesisResult(
                hypothesis_id,
                HypothesisStatus.VIOLATED,
                f"Dominancia violada en el término {worst_j}: diferencia {worst_margin:.3e} en t={worst_point:.6g}",
                worst_point=worst_point,
                margin=worst_margin,
            )
        return HypothesisResult(
            hypothesis_id,
            HypothesisStatus.VERIFIED,
            f"Dominancia verificada en {len(ts)} puntos",
            worst_point=worst_point,
            margin=worst_margin,
        )

    @staticmethod
    def check_negative_coefficients(
        dominated: Sequence[Coefficient],
        dominant: Sequence[Coefficient],
        arguments: Sequence[Coefficient],
        window: Tuple[float, float],
    ) -> HypothesisResult:
        """Donde dominated_j(t) < 0, exige dominant_j(t) >= 0 o alpha_j(t) = t."""
        ts = sample_grid(*window)
        slack = settings.GRID_SLACK
        for j, (low, high, alpha) in enumerate(zip(dominated, dominant, arguments), start=1):
            low_values = np.asarray(low(ts))
            high_values = np.asarray(high(ts))
            bad = (low_values < -slack) & (high_values < -slack) & ~_identity_mask(alpha, ts)
            if bad.any():
                k = int(np.argmax(bad))
                return HypothesisResult(
                    "negative-coefficients",
                    HypothesisStatus.VIOLATED,
                    f"Término {j}: coeficiente negativo sin compensación en t={ts[k]:.6g}",
                    worst_point=float(ts[k]),
                    margin=float(high_values[k]),
                )
        return HypothesisResult(
            "negative-coefficients",
            HypothesisStatus.VERIFIED,
            "Coeficientes negativos compensados o sin desvío",
        )

    @staticmethod
    def check_nonnegative(
        fn: Coefficient,
        window: Tuple[float, float],
        hypothesis_id: str,
        label: str = "f",
    ) -> HypothesisResult:
        """Verifica fn(t) >= 0 en la grilla."""
        ts = sample_grid(*window)
        values = np.asarray(fn(ts))
        i = int(np.argmin(values))
        if values[i] < -settings.GRID_SLACK:
            return HypothesisResult(
                hypothesis_id,
                HypothesisStatus.VIOLATED,
                f"{label} negativa: {values[i]:.3e} en t={ts[i]:.6g}",
                worst_point=float(ts[i]),
                margin=float(values[i]),
            )
        return HypothesisResult(
            hypothesis_id,
            HypothesisStatus.VERIFIED,
            f"{label} >= 0 en {len(ts)} puntos",
            worst_point=float(ts[i]),
            margin=float(values[i]),
        )

    @staticmethod
    def check_unbounded_arguments(
        arguments: Sequence[Coefficient],
        window: Tuple[float, float],
    ) -> HypothesisResult:
        """
        Aproximación de alpha_j(t) -> +inf: alpha_j(t) >= t - delta en la grilla.

        Verificada (con salvedad de horizonte finito) cuando el mayor retardo es
        menor que media ventana; si no, no verificable.
        """
        ts = sample_grid(*window)
        delta = 0.0
        for alpha in arguments:
            delta = max(delta, float(np.max(ts - np.asarray(alpha(ts)))))
        span = window[1] - window[0]
        if delta < span / 2:
            return HypothesisResult(
                "unbounded-arguments",
                HypothesisStatus.VERIFIED,
                f"alpha_j(t) >= t - {delta:.6g} en la ventana",
                margin=delta,
                caveat=f"retardo acotado por {delta:.6g} sólo en [{window[0]:.6g}, {window[1]:.6g}]",
            )
        return HypothesisResult(
            "unbounded-arguments",
            HypothesisStatus.NOT_VERIFIABLE,
            f"Retardo máximo {delta:.6g} comparable a la ventana; no verificable en infinito",
            margin=delta,
        )

    @staticmethod
    def check_forcing_sign_pattern(
        f: Coefficient,
        window: Tuple[float, float],
        min_len: Optional[float] = None,
        repetitions: Optional[int] = None,
    ) -> Tuple[HypothesisResult, List[SignPattern]]:
        """Busca `repetitions` patrones disjuntos (<= 0, >= 0) de f en la ventana."""
        repetitions = settings.SIGN_REPETITIONS if repetitions is None else repetitions
        patterns = find_sign_patterns(f, window, min_len=min_len, repetitions=repetitions)
        if len(patterns) < repetitions:
            return HypothesisResult(
                "forcing-sign-pattern",
                HypothesisStatus.VIOLATED,
                f"Sólo {len(patterns)} de {repetitions} patrones de signo de f en la ventana",
                margin=float(len(patterns)),
            ), patterns
        return HypothesisResult(
            "forcing-sign-pattern",
            HypothesisStatus.VERIFIED,
            f"{len(patterns)} patrones de signo disjuntos",
            worst_point=patterns[-1].positive.t,
            caveat=f"{repetitions} repeticiones en un horizonte finito",
        ), patterns

    @staticmethod
    def evaluate_comparison(
        coefficients: Sequence[Coefficient],
        comparison: Sequence[Coefficient],
        arguments: Sequence[Coefficient],
        window: Tuple[float, float],
        comparison_dominates: bool,
    ) -> List[HypothesisResult]:
        """
        Hipótesis sobre coeficientes comunes a los criterios de no oscilación y oscilación.

        Con ``comparison_dominates`` los coeficientes de comparación acotan por
        arriba a los de la ecuación (no oscilación); si no, por abajo.
        """
        if comparison_dominates:
            upper, lower = comparison, coefficients
        else:
            upper, lower = coefficients, comparison
        return [
            HypothesisCheck.check_dominance(upper, lower, window),
            HypothesisCheck.check_negative_coefficients(lower, upper, arguments, window),
            HypothesisCheck.check_unbounded_arguments(arguments, window),
        ]
