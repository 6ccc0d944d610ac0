"""
Criterios de oscilación y no oscilación por comparación.

- comparison-nonosc: la ecuación es no oscilatoria si una ecuación homogénea de
  comparación con coeficientes mayores lo es.
- positive-part-nonosc: comparación con max{0, r_j}.
- forced-osc: la ecuación forzada es oscilatoria si la de comparación con
  coeficientes menores es oscilatoria en los intervalos de signo de f.
- positive-part-osc: la ecuación con max{0, r_j} frente a su parte homogénea.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from app.config import settings
from app.core.equation import EquationSpec, is_identity_argument
from app.core.expressions import CallableFn, Coefficient, as_fn, positive_part, sum_of
from app.core.hypotheses import HypothesisCheck, HypothesisResult, HypothesisStatus
from app.core.crosscheck import cross_check_zeros, search_zero_free
from app.core.interval_oscillation import (
    IntervalOscInstance,
    Partition,
    check_interval_comparison,
)
from app.core.quadrature import antiderivative
from app.core.signs import SignPattern
from app.core.sturm import interval_oscillatory
from app.core.verdicts import CriterionReport, VerdictTag, collect_caveats, conclude

logger = logging.getLogger(__name__)


class Criterion(str, Enum):
    COMPARISON_NONOSC = "comparison-nonosc"
    POSITIVE_PART_NONOSC = "positive-part-nonosc"
    FORCED_OSC = "forced-osc"
    POSITIVE_PART_OSC = "positive-part-osc"
    INTERVAL_COMPARISON = "interval-comparison"
    WONG = "wong"


class OscillationStrategy(str, Enum):
    """Cómo se establece la oscilación de la ecuación de comparación en un intervalo."""
    INTERVAL_PARTITIONS = "interval-partitions"
    CONJUGATE_SCAN = "conjugate-scan"
    ASSUME = "assume"


@dataclass(frozen=True)
class Witness:
    """Solución propuesta de la ecuación de comparación: phi, psi = p phi' y psi'."""
    phi: Coefficient
    psi: Optional[Coefficient] = None
    dpsi: Optional[Coefficient] = None

    @classmethod
    def build(cls, phi, psi=None, dpsi=None) -> "Witness":
        return cls(
            as_fn(phi),
            as_fn(psi) if psi is not None else None,
            as_fn(dpsi) if dpsi is not None else None,
        )

    @property
    def exact(self) -> bool:
        return self.psi is not None and self.dpsi is not None

    def to_dict(self) -> dict:
        def source(fn):
            if fn is None:
                return None
            text = getattr(fn, "source", None)
            if text is None and hasattr(fn, "to_source"):
                text = fn.to_source()
            return text

        return {"phi": source(self.phi), "psi": source(self.psi), "dpsi": source(self.dpsi)}


def _central_difference(fn, ts: np.ndarray) -> np.ndarray:
    h = 1e-5 * np.maximum(1.0, np.abs(ts))
    return (np.asarray(fn(ts + h)) - np.asarray(fn(ts - h))) / (2 * h)


def check_witness(comparison: EquationSpec, witness: Witness, window: Tuple[float, float]) -> HypothesisResult:
    """
    Verifica que el testigo no se anule y resuelva la ecuación de comparación.

    El residuo dpsi + (q/p) psi + sum_j r1_j phi(alpha_j) se mide en
    WITNESS_GRID_POINTS puntos, relativo a max(1, |dpsi|, sum |r1_j phi(alpha_j)|).
    Con psi y dpsi exactos la tolerancia es WITNESS_RESIDUAL_TOL; si falta
    alguno se usan diferencias centradas y WITNESS_FD_RESIDUAL_TOL.
    """
    ts = np.linspace(window[0], window[1], settings.WITNESS_GRID_POINTS)
    try:
        phi = np.asarray(witness.phi(ts))
        p = np.asarray(comparison.p(ts))
        psi = np.asarray(witness.psi(ts)) if witness.psi is not None else p * _central_difference(witness.phi, ts)
        if witness.dpsi is not None:
            dpsi = np.asarray(witness.dpsi(ts))
        elif witness.psi is not None:
            dpsi = _central_difference(witness.psi, ts)
        else:
            dpsi = _central_difference(
                lambda x: np.asarray(comparison.p(x)) * _central_difference(witness.phi, x), ts
            )
        delayed = [
            np.asarray(term.coefficient(ts)) * np.asarray(witness.phi(term.argument(ts)))
            for term in comparison.terms
        ]
    except ValueError as exc:
        return HypothesisResult(
            "comparison-nonoscillatory", HypothesisStatus.VIOLATED, f"Testigo no evaluable: {exc}"
        )

    scale = max(1.0, float(np.max(np.abs(phi))))
    if np.min(np.abs(phi)) <= settings.ZERO_TOL * scale or np.any(np.sign(phi) != np.sign(phi[0])):
        k = int(np.argmin(np.abs(phi)))
        return HypothesisResult(
            "comparison-nonoscillatory",
            HypothesisStatus.VIOLATED,
            f"El testigo se anula cerca de t={ts[k]:.6g}",
            worst_point=float(ts[k]),
            margin=float(phi[k]),
        )

    total = np.sum(delayed, axis=0) if delayed else np.zeros_like(ts)
    residual = dpsi + np.asarray(comparison.q(ts)) / p * psi + total
    magnitude = np.maximum(1.0, np.maximum(np.abs(dpsi), np.sum(np.abs(delayed), axis=0) if delayed else 0.0))
    relative = np.abs(residual) / magnitude
    k = int(np.argmax(relative))
    tol = settings.WITNESS_RESIDUAL_TOL if witness.exact else settings.WITNESS_FD_RESIDUAL_TOL
    if witness.psi is not None and witness.dpsi is None:
        tol = settings.WITNESS_FD_RESIDUAL_TOL
    if relative[k] > tol:
        return HypothesisResult(
            "comparison-nonoscillatory",
            HypothesisStatus.VIOLATED,
            f"Residuo del testigo {relative[k]:.3e} > {tol:.1e} en t={ts[k]:.6g}",
            worst_point=float(ts[k]),
            margin=float(relative[k]),
        )
    return HypothesisResult(
        "comparison-nonoscillatory",
        HypothesisStatus.VERIFIED,
        f"Testigo sin ceros con residuo {relative[k]:.3e} en {len(ts)} puntos",
        worst_point=float(ts[k]),
        margin=float(relative[k]),
        caveat=f"testigo verificado sólo en [{window[0]:.6g}, {window[1]:.6g}]",
    )


def _comparison_nonosc(
    criterion: Criterion,
    eq: EquationSpec,
    comparison_coefficients: Sequence,
    window: Tuple[float, float],
    witness: Optional[Witness],
    histories: Optional[int],
    seed: Optional[int],
    tol: Optional[float],
) -> CriterionReport:
    comparison = eq.with_coefficients(comparison_coefficients).homogeneous()
    hypotheses = HypothesisCheck.evaluate_comparison(
        eq.coefficients, comparison.coefficients, eq.arguments, window, comparison_dominates=True
    )
    hypotheses.insert(2, HypothesisCheck.check_nonnegative(eq.f, window, "nonnegative-forcing"))

    witnesses: Dict[str, object] = {}
    numeric_horizon = None
    if witness is not None:
        hypotheses.append(check_witness(comparison, witness, window))
        witnesses["witness"] = witness.to_dict()
    else:
        traj, attempts = search_zero_free(comparison, window, histories=histories, seed=seed, tol=tol)
        witnesses["search"] = attempts
        if traj is not None:
            numeric_horizon = float(window[1])
            hypotheses.append(HypothesisResult(
                "comparison-nonoscillatory",
                HypothesisStatus.NOT_VERIFIABLE,
                f"Solución numérica sin ceros hasta t={window[1]:.6g}",
                caveat="no oscilación de la ecuación de comparación sólo numérica",
            ))
        else:
            hypotheses.append(HypothesisResult(
                "comparison-nonoscillatory",
                HypothesisStatus.NOT_VERIFIABLE,
                f"Ninguna de {len(attempts)} historias dio una solución sin ceros",
            ))

    verdict = conclude(hypotheses, VerdictTag.CERTIFIED_NONOSCILLATORY, numeric_horizon=numeric_horizon)
    logger.info(f"{criterion.value}: {verdict.tag.value}")
    return CriterionReport(
        criterion.value,
        tuple(hypotheses),
        verdict,
        caveats=collect_caveats(hypotheses),
        witnesses=witnesses,
    )


def check_comparison_nonosc(
    eq: EquationSpec,
    comparison_coefficients: Sequence,
    window: Tuple[float, float],
    witness: Optional[Witness] = None,
    histories: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> CriterionReport:
    """
    No oscilación por comparación con una ecuación homogénea de coeficientes mayores.

    Hipótesis: dominance (r1_j >= r_j), negative-coefficients (si r_j < 0,
    r1_j >= 0 o alpha_j(t) = t), nonnegative-forcing (f >= 0),
    unbounded-arguments y comparison-nonoscillatory (testigo exacto o búsqueda
    numérica; ésta sólo permite un veredicto numérico).

    Raises:
        ComparisonShapeError: cantidad de coeficientes distinta a la de términos
    """
    return _comparison_nonosc(
        Criterion.COMPARISON_NONOSC, eq, comparison_coefficients, window, witness, histories, seed, tol
    )


def check_positive_part_nonosc(
    eq: EquationSpec,
    window: Tuple[float, float],
    witness: Optional[Witness] = None,
    histories: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> CriterionReport:
    """Comparación con r1_j = max{0, r_j}."""
    positive = [positive_part(r) for r in eq.coefficients]
    return _comparison_nonosc(
        Criterion.POSITIVE_PART_NONOSC, eq, positive, window, witness, histories, seed, tol
    )


# ---------------------------------------------------------------------------
# Oscilación forzada
# ---------------------------------------------------------------------------

def _integrating_factor_problem(
    comparison: EquationSpec, interval: Tuple[float, float]
) -> Tuple[Coefficient, Coefficient]:
    """
    (p phi')' + q phi' + r phi = 0 como (mu p phi')' + mu r phi = 0 con mu = exp(int q/p).
    """
    s, t = interval
    p, q = comparison.p, comparison.q
    r = sum_of(list(comparison.coefficients), label="sum r1")
    if comparison.is_q_zero(interval):
        return p, r
    ratio = CallableFn(lambda x: np.asarray(q(x)) / np.asarray(p(x)), label="q/p", sources=(q, p))
    prim = antiderivative(ratio, s, t)
    start = float(prim(s))

    def mu(x):
        return np.exp(np.asarray(prim(x)) - start)

    p_tilde = CallableFn(lambda x: mu(x) * np.asarray(p(x)), label="mu*p", sources=(p, q))
    r_tilde = CallableFn(lambda x: mu(x) * np.asarray(r(x)), label="mu*r", sources=(r, p, q))
    return p_tilde, r_tilde


class _PartitionMatcher:
    """Busca, para un intervalo, una partición certificada cuyo hull quede contenido en él."""

    def __init__(self, comparison: EquationSpec, partitions: Sequence[Partition], eps0, eps_count, scan_points, tol):
        self.comparison = comparison
        self.partitions = [tuple(part) for part in partitions]
        self.options = dict(eps0=eps0, eps_count=eps_count, scan_points=scan_points, tol=tol)
        self._reports: Dict[tuple, CriterionReport] = {}

    def match(self, s: float, t: float) -> Optional[dict]:
        slack = settings.INTERVAL_MATCH_TOL
        for part in self.partitions:
            inst = IntervalOscInstance.from_equation(self.comparison, part)
            lo, hi = inst.hull
            if lo < s - slack or hi > t + slack:
                continue
            if part not in self._reports:
                self._reports[part] = check_interval_comparison(inst, **self.options)
            report = self._reports[part]
            if report.verdict.tag == VerdictTag.CERTIFIED_OSCILLATORY:
                return {"partition": list(part), "hull": [lo, hi]}
        return None

    def reports(self) -> List[dict]:
        return [report.to_dict() for report in self._reports.values()]


def _interval_oscillation(
    comparison: EquationSpec,
    patterns: Sequence[SignPattern],
    window: Tuple[float, float],
    strategy: OscillationStrategy,
    partitions: Optional[Sequence[Partition]],
    eps0: Optional[float],
    eps_count: Optional[int],
    scan_points: Optional[int],
    tol: Optional[float],
) -> Tuple[HypothesisResult, dict]:
    hypothesis_id = "interval-oscillation"
    if not patterns:
        return HypothesisResult(hypothesis_id, HypothesisStatus.NOT_VERIFIABLE, "Sin intervalos de signo"), {}
    intervals = [(interval.s, interval.t) for pattern in patterns for interval in pattern.intervals]

    if strategy == OscillationStrategy.ASSUME:
        return HypothesisResult(
            hypothesis_id,
            HypothesisStatus.NOT_VERIFIABLE,
            "Oscilación en los intervalos asumida por el usuario",
            caveat="hipótesis asumida, no verificada",
        ), {"strategy": strategy.value}

    evidence: List[dict] = []
    if strategy == OscillationStrategy.INTERVAL_PARTITIONS:
        if not comparison.is_q_zero(window):
            return HypothesisResult(
                hypothesis_id,
                HypothesisStatus.NOT_VERIFIABLE,
                "La estrategia interval-partitions requiere q = 0",
            ), {"strategy": strategy.value}
        if not partitions:
            return HypothesisResult(
                hypothesis_id, HypothesisStatus.NOT_VERIFIABLE, "Sin particiones configuradas"
            ), {"strategy": strategy.value}
        matcher = _PartitionMatcher(comparison, partitions, eps0, eps_count, scan_points, tol)
        for s, t in intervals:
            found = matcher.match(s, t)
            evidence.append({"interval": [s, t], "match": found})
        extra = {"strategy": strategy.value, "intervals": evidence, "partition_reports": matcher.reports()}
        missing = [item["interval"] for item in evidence if item["match"] is None]
    else:
        for s, t in intervals:
            if not all(is_identity_argument(alpha, (s, t)) for alpha in comparison.arguments):
                return HypothesisResult(
                    hypothesis_id,
                    HypothesisStatus.NOT_VERIFIABLE,
                    f"conjugate-scan requiere alpha_j(t) = t en [{s:.6g}, {t:.6g}]",
                ), {"strategy": strategy.value}
            p_tilde, r_tilde = _integrating_factor_problem(comparison, (s, t))
            found, pair = interval_oscillatory(p_tilde, r_tilde, (s, t), scan_points=scan_points, tol=tol)
            evidence.append({"interval": [s, t], "match": list(pair) if found else None})
        extra = {"strategy": strategy.value, "intervals": evidence}
        missing = [item["interval"] for item in evidence if item["match"] is None]

    if missing:
        return HypothesisResult(
            hypothesis_id,
            HypothesisStatus.NOT_VERIFIABLE,
            f"Oscilación no establecida en {len(missing)} de {len(intervals)} intervalos",
            worst_point=float(missing[0][0]),
        ), extra
    return HypothesisResult(
        hypothesis_id,
        HypothesisStatus.VERIFIED,
        f"Ecuación de comparación oscilatoria en {len(intervals)} intervalos",
    ), extra


def _forced_osc(
    criterion: Criterion,
    eq: EquationSpec,
    comparison_coefficients: Sequence,
    window: Tuple[float, float],
    strategy: OscillationStrategy,
    partitions: Optional[Sequence[Partition]],
    min_len: Optional[float],
    repetitions: Optional[int],
    eps0: Optional[float],
    eps_count: Optional[int],
    scan_points: Optional[int],
    cross_check: Optional[Tuple[int, float]],
    seed: Optional[int],
    tol: Optional[float],
    extra_caveats: Sequence[str] = (),
) -> CriterionReport:
    strategy = OscillationStrategy(strategy)
    comparison = eq.with_coefficients(comparison_coefficients).homogeneous()
    hypotheses = HypothesisCheck.evaluate_comparison(
        eq.coefficients, comparison.coefficients, eq.arguments, window, comparison_dominates=False
    )
    sign_result, patterns = HypothesisCheck.check_forcing_sign_pattern(eq.f, window, min_len, repetitions)
    hypotheses.append(sign_result)
    osc_result, evidence = _interval_oscillation(
        comparison, patterns, window, strategy, partitions, eps0, eps_count, scan_points, tol
    )
    hypotheses.append(osc_result)

    witnesses = {"patterns": [pattern.to_dict() for pattern in patterns], "interval_oscillation": evidence}
    cross = None
    numeric_horizon = None
    if cross_check is not None:
        histories, bin_width = cross_check
        result = cross_check_zeros(eq, window, bin_width, histories=histories, seed=seed, tol=tol)
        cross = result.to_dict()
        if result.every_bin_hit:
            numeric_horizon = float(window[1])

    verdict = conclude(hypotheses, VerdictTag.CERTIFIED_OSCILLATORY, numeric_horizon=numeric_horizon)
    logger.info(f"{criterion.value}: {verdict.tag.value}")
    return CriterionReport(
        criterion.value,
        tuple(hypotheses),
        verdict,
        caveats=collect_caveats(hypotheses, extra_caveats),
        witnesses=witnesses,
        cross_check=cross,
    )


def check_forced_osc(
    eq: EquationSpec,
    comparison_coefficients: Sequence,
    window: Tuple[float, float],
    strategy: OscillationStrategy = OscillationStrategy.INTERVAL_PARTITIONS,
    partitions: Optional[Sequence[Partition]] = None,
    min_len: Optional[float] = None,
    repetitions: Optional[int] = None,
    eps0: Optional[float] = None,
    eps_count: Optional[int] = None,
    scan_points: Optional[int] = None,
    cross_check: Optional[Tuple[int, float]] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> CriterionReport:
    """
    Oscilación de la ecuación forzada por comparación con una homogénea de coeficientes menores.

    Hipótesis: dominance (r_j >= r1_j), negative-coefficients (si r1_j < 0,
    r_j >= 0 o alpha_j(t) = t), unbounded-arguments, forcing-sign-pattern
    (``repetitions`` patrones disjuntos de f) e interval-oscillation (la
    ecuación de comparación es oscilatoria en cada intervalo de signo, según
    ``strategy``).

    Args:
        cross_check: (historias, ancho de bin) para el contraste numérico

    Raises:
        ComparisonShapeError: cantidad de coeficientes distinta a la de términos
    """
    return _forced_osc(
        Criterion.FORCED_OSC, eq, comparison_coefficients, window, strategy, partitions, min_len,
        repetitions, eps0, eps_count, scan_points, cross_check, seed, tol,
    )


def check_positive_part_osc(
    eq: EquationSpec,
    window: Tuple[float, float],
    strategy: OscillationStrategy = OscillationStrategy.INTERVAL_PARTITIONS,
    partitions: Optional[Sequence[Partition]] = None,
    min_len: Optional[float] = None,
    repetitions: Optional[int] = None,
    eps0: Optional[float] = None,
    eps_count: Optional[int] = None,
    scan_points: Optional[int] = None,
    cross_check: Optional[Tuple[int, float]] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> CriterionReport:
    """
    La ecuación con r_j reemplazado por max{0, r_j} frente a su parte homogénea.

    El veredicto se refiere a la ecuación truncada; coincide con la original
    cuando todos los r_j son no negativos.
    """
    positive = [positive_part(r) for r in eq.coefficients]
    truncated = eq.with_coefficients(positive)
    caveats = []
    nonnegative = all(
        HypothesisCheck.check_nonnegative(r, window, "r").status == HypothesisStatus.VERIFIED
        for r in eq.coefficients
    )
    if not nonnegative:
        caveats.append("el veredicto corresponde a la ecuación con coeficientes max{0, r_j}")
    return _forced_osc(
        Criterion.POSITIVE_PART_OSC, truncated, positive, window, strategy, partitions, min_len,
        repetitions, eps0, eps_count, scan_points, cross_check, seed, tol, extra_caveats=caveats,
    )
