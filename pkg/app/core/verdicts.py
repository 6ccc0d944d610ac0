"""Veredictos de oscilación y reportes de criterio."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math

from app.core.hypotheses import HypothesisResult, HypothesisStatus

logger = logging.getLogger(__name__)


class VerdictTag(str, Enum):
    """Etiquetas de veredicto."""
    CERTIFIED_OSCILLATORY = "CertifiedOscillatory"
    CERTIFIED_NONOSCILLATORY = "CertifiedNonoscillatory"
    NUMERIC_OSCILLATORY = "NumericOscillatory"
    NUMERIC_NONOSCILLATORY = "NumericNonoscillatory"
    INCONCLUSIVE = "Inconclusive"

    @property
    def is_certified(self) -> bool:
        return self in (VerdictTag.CERTIFIED_OSCILLATORY, VerdictTag.CERTIFIED_NONOSCILLATORY)

    @property
    def is_numeric(self) -> bool:
        return self in (VerdictTag.NUMERIC_OSCILLATORY, VerdictTag.NUMERIC_NONOSCILLATORY)

    def numeric(self) -> "VerdictTag":
        """Versión numérica de una etiqueta certificada."""
        return {
            VerdictTag.CERTIFIED_OSCILLATORY: VerdictTag.NUMERIC_OSCILLATORY,
            VerdictTag.CERTIFIED_NONOSCILLATORY: VerdictTag.NUMERIC_NONOSCILLATORY,
        }.get(self, self)


@dataclass(frozen=True)
class OscillationVerdict:
    """
    Veredicto con su horizonte (etiquetas numéricas) o su intervalo
    (oscilación sobre [T1, T2]).
    """
    tag: VerdictTag
    horizon: Optional[float] = None
    interval: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.tag.is_numeric and (self.horizon is None or not math.isfinite(self.horizon)):
            raise ValueError(f"{self.tag.value} requires a finite horizon")

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "horizon": self.horizon,
            "interval": list(self.interval) if self.interval else None,
        }


@dataclass(frozen=True)
class CriterionReport:
    """Resultado de un criterio: hipótesis, veredicto, salvedades y testigos."""
    criterion: str
    hypotheses: Tuple[HypothesisResult, ...]
    verdict: OscillationVerdict
    caveats: Tuple[str, ...] = ()
    witnesses: Dict[str, Any] = field(default_factory=dict)
    cross_check: Optional[dict] = None

    def __post_init__(self):
        if self.verdict.tag.is_certified and not all(
            h.status == HypothesisStatus.VERIFIED for h in self.hypotheses
        ):
            raise ValueError("a certified verdict requires every hypothesis verified")

    def hypothesis(self, hypothesis_id: str) -> HypothesisResult:
        for result in self.hypotheses:
            if result.id == hypothesis_id:
                return result
        raise KeyError(hypothesis_id)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "verdict": self.verdict.to_dict(),
            "caveats": list(self.caveats),
            "witnesses": self.witnesses,
            "cross_check": self.cross_check,
        }


def conclude(
    hypotheses: Sequence[HypothesisResult],
    certified: VerdictTag,
    numeric_horizon: Optional[float] = None,
    interval: Optional[Tuple[float, float]] = None,
) -> OscillationVerdict:
    """
    Combina los estados de las hipótesis en un veredicto.

    Todas verificadas: la etiqueta certificada. Alguna violada: Inconclusive.
    Sólo no verificables: la etiqueta numérica si hay soporte numérico hasta
    ``numeric_horizon``; si no, Inconclusive.
    """
    statuses = [h.status for h in hypotheses]
    if statuses and all(s == HypothesisStatus.VERIFIED for s in statuses):
        return OscillationVerdict(certified, interval=interval)
    if any(s == HypothesisStatus.VIOLATED for s in statuses):
        failed = [h.id for h in hypotheses if h.status == HypothesisStatus.VIOLATED]
        logger.info(f"hypotheses violated: {', '.join(failed)}")
        return OscillationVerdict(VerdictTag.INCONCLUSIVE)
    if numeric_horizon is not None and math.isfinite(numeric_horizon):
        return OscillationVerdict(certified.numeric(), horizon=numeric_horizon, interval=interval)
    return OscillationVerdict(VerdictTag.INCONCLUSIVE)


def collect_caveats(hypotheses: Sequence[HypothesisResult], extra: Sequence[str] = ()) -> Tuple[str, ...]:
    caveats: List[str] = [f"{h.id}: {h.caveat}" for h in hypotheses if h.caveat]
    caveats.extend(extra)
    return tuple(caveats)
