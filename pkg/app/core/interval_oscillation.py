"""
Oscilación en un intervalo para ecuaciones con argumentos desviados
(retardados o adelantados) y sin término q.

La ecuación (p phi')' + sum_k r_k(t) phi(beta_k(t)) = 0 es oscilatoria sobre
[T1, T2] si se cumplen las condiciones de signo, de orden de los argumentos y
de oscilación de dos ecuaciones ordinarias de comparación en [t1, t2] y [t3, t4].
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from app.config import settings
from app.core.equation import DelayTerm, EquationSpec
from app.core.expressions import CallableFn, Coefficient, as_fn, sum_of
from app.core.hypotheses import HypothesisCheck, HypothesisResult, HypothesisStatus
from app.core.quadrature import antiderivative
from app.core.signs import sample_grid
from app.core.sturm import interval_oscillatory
from app.core.verdicts import CriterionReport, VerdictTag, collect_caveats, conclude

logger = logging.getLogger(__name__)

CRITERION = "interval-comparison"

Partition = Tuple[float, float, float, float]


def _support(term: DelayTerm, ts: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(term.coefficient(ts))) > settings.GRID_SLACK


@dataclass(frozen=True)
class IntervalOscInstance:
    """
    Instancia con partición t1 < t2 <= t3 < t4 y los conjuntos de índices derivados.

    Los índices son 0-based; los reportes los muestran 1-based. La pertenencia
    se verifica en los puntos de la grilla donde r_k no se anula.
    """
    p: Coefficient
    terms: Tuple[DelayTerm, ...]
    partition: Partition
    omega_plus: Tuple[int, ...]
    omega1_minus: Tuple[int, ...]
    omega2_minus: Tuple[int, ...]
    T1: float
    T2: float
    t2_plus: float
    t3_minus: float

    @classmethod
    def build(cls, p, terms: Sequence, partition: Sequence[float]) -> "IntervalOscInstance":
        """
        Construye la instancia y deriva los conjuntos y cotas en grilla.

        Args:
            p: Coeficiente positivo
            terms: DelayTerm o pares (r_k, beta_k)
            partition: (t1, t2, t3, t4)

        Raises:
            ValueError: si la partición no está ordenada
        """
        t1, t2, t3, t4 = (float(x) for x in partition)
        if not (t1 < t2 <= t3 < t4):
            raise ValueError(f"partition must satisfy t1 < t2 <= t3 < t4, got {(t1, t2, t3, t4)}")
        terms = tuple(term if isinstance(term, DelayTerm) else DelayTerm.of(*term) for term in terms)
        slack = settings.GRID_SLACK
        first = sample_grid(t1, t2)
        second = sample_grid(t3, t4)
        whole = sample_grid(t1, t4)
        tol_first = slack * np.maximum(1.0, np.abs(first))
        tol_second = slack * np.maximum(1.0, np.abs(second))

        omega_plus: List[int] = []
        omega1: List[int] = []
        omega2: List[int] = []
        t2_plus, t3_minus = -math.inf, math.inf
        T1, T2 = math.inf, -math.inf
        for k, term in enumerate(terms):
            beta_first = np.asarray(term.argument(first))
            on = _support(term, first)
            if np.all((beta_first >= first - tol_first)[on]):
                omega_plus.append(k)
                if on.any():
                    t2_plus = max(t2_plus, float(beta_first[on].max()))
            elif np.all(((beta_first >= t1 - slack) & (beta_first <= first + tol_first))[on]):
                omega1.append(k)
            beta_second = np.asarray(term.argument(second))
            on = _support(term, second)
            if np.all((beta_second <= second + tol_second)[on]):
                omega2.append(k)
                if on.any():
                    t3_minus = min(t3_minus, float(beta_second[on].min()))
            beta_whole = np.asarray(term.argument(whole))
            T1 = min(T1, float(beta_whole.min()))
            T2 = max(T2, float(beta_whole.max()))
        if not terms:
            T1, T2 = t1, t4
        inst = cls(as_fn(p), terms, (t1, t2, t3, t4), tuple(omega_plus), tuple(omega1), tuple(omega2),
                   T1, T2, t2_plus, t3_minus)
        logger.debug(
            f"partition {inst.partition}: omega+={inst.omega_plus} omega1-={inst.omega1_minus} "
            f"omega2-={inst.omega2_minus} T=[{T1:.6g}, {T2:.6g}]"
        )
        return inst

    @classmethod
    def from_equation(cls, eq: EquationSpec, partition: Sequence[float]) -> "IntervalOscInstance":
        """Instancia para la parte homogénea de una ecuación con q = 0."""
        return cls.build(eq.p, eq.terms, partition)

    @property
    def hull(self) -> Tuple[float, float]:
        """Intervalo de conclusión [min(T1, t1), max(T2, t4)]."""
        t1, _, _, t4 = self.partition
        return min(self.T1, t1), max(self.T2, t4)

    def to_dict(self) -> dict:
        return {
            "partition": list(self.partition),
            "omega_plus": [k + 1 for k in self.omega_plus],
            "omega1_minus": [k + 1 for k in self.omega1_minus],
            "omega2_minus": [k + 1 for k in self.omega2_minus],
            "T1": self.T1,
            "T2": self.T2,
            "t2_plus": self.t2_plus,
            "t3_minus": self.t3_minus,
        }


def partition_family(base: Sequence[float], period: float, count: int) -> List[Partition]:
    """Particiones base + period * l para l = 0..count-1."""
    return [tuple(float(x) + period * l for x in base) for l in range(count)]


def eps_schedule(eps0: Optional[float] = None, count: Optional[int] = None) -> List[float]:
    """Muestra geométrica eps0 * 2^-i, i = 0..count-1."""
    eps0 = settings.EPS0 if eps0 is None else eps0
    count = settings.EPS_COUNT if count is None else count
    return [eps0 * 2.0 ** -i for i in range(count)]


def build_comparison(inst: IntervalOscInstance, eps: float) -> Tuple[Coefficient, Coefficient]:
    """
    Coeficiente efectivo de la ecuación ordinaria de comparación en [t1, t2].

    Para k en omega+ el peso es exp(int_t^{beta_k(t)} S(tau)/p(tau) dtau) con
    S(tau) = int_tau^{t2} sum_{omega+} r; para k en omega1- el peso es
    (P(beta_k(t)) + eps) / (P(t) + eps) con P(x) = int_{t1}^x dtau/p. Las
    integrales interiores se tabulan una vez sobre una malla.

    Returns:
        Tuple (p, r efectivo)

    Raises:
        ValueError: conjuntos vacíos, eps <= 0 o r_k negativo en [t1, t2]
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not inst.omega_plus and not inst.omega1_minus:
        raise ValueError("omega+ and omega1- are both empty")
    t1, t2, _, _ = inst.partition
    ts = sample_grid(t1, t2)
    for k in inst.omega_plus + inst.omega1_minus:
        values = np.asarray(inst.terms[k].coefficient(ts))
        if np.any(values < -settings.GRID_SLACK):
            raise ValueError(f"coefficient {k + 1} is negative on [{t1!r}, {t2!r}]")

    p = inst.p
    lo = min(t1, float(min((np.min(inst.terms[k].argument(ts)) for k in inst.omega1_minus), default=t1)))
    hi = max(t2, inst.t2_plus if math.isfinite(inst.t2_plus) else t2)
    inverse_p = CallableFn(lambda t: 1.0 / np.asarray(p(t)), label="1/p", sources=(p,))
    prim = antiderivative(inverse_p, lo, hi) if hi > lo else None
    anchor = float(prim(t1)) if prim is not None else 0.0

    def P(x):
        return np.asarray(prim(x)) - anchor

    weight_plus = None
    if inst.omega_plus:
        plus_sum = sum_of([inst.terms[k].coefficient for k in inst.omega_plus], label="sum r over omega+")
        r_prim = antiderivative(plus_sum, lo, hi)
        r_end = float(r_prim(t2))
        S_over_p = CallableFn(
            lambda t: (r_end - np.asarray(r_prim(t))) / np.asarray(p(t)),
            label="S/p",
            sources=(p,),
        )
        G = antiderivative(S_over_p, lo, hi)

        def weight_plus(t, beta):
            return np.exp(np.asarray(G(beta)) - np.asarray(G(t)))

    omega_plus = inst.omega_plus
    omega1 = inst.omega1_minus
    terms = inst.terms

    def effective(t: np.ndarray) -> np.ndarray:
        total = np.zeros_like(t, dtype=float)
        for k in omega_plus:
            beta = np.clip(np.asarray(terms[k].argument(t)), lo, hi)
            total += np.asarray(terms[k].coefficient(t)) * weight_plus(t, beta)
        if omega1:
            denominator = P(t) + eps
            for k in omega1:
                beta = np.clip(np.asarray(terms[k].argument(t)), lo, hi)
                total += np.asarray(terms[k].coefficient(t)) * (P(beta) + eps) / denominator
        return total

    sources = [terms[k].coefficient for k in omega_plus + omega1] + [terms[k].argument for k in omega_plus + omega1]
    return p, CallableFn(effective, label=f"effective r (eps={eps!r})", sources=sources)


def second_interval_coefficient(inst: IntervalOscInstance) -> Coefficient:
    """Suma de r_k sobre omega2- (ecuación de comparación en [t3, t4])."""
    return sum_of([inst.terms[k].coefficient for k in inst.omega2_minus], label="sum r over omega2-")


def check_interval_comparison(
    inst: IntervalOscInstance,
    eps0: Optional[float] = None,
    eps_count: Optional[int] = None,
    scan_points: Optional[int] = None,
    tol: Optional[float] = None,
) -> CriterionReport:
    """
    Verifica las condiciones de oscilación en intervalo y emite el reporte.

    El veredicto certificado es oscilación sobre el intervalo hull de la instancia.
    """
    t1, t2, t3, t4 = inst.partition
    hull = inst.hull
    hypotheses: List[HypothesisResult] = []
    witnesses: dict = {"instance": inst.to_dict(), "hull": list(hull)}

    sets_ok = bool(inst.omega_plus or inst.omega1_minus) and bool(inst.omega2_minus)
    hypotheses.append(HypothesisResult(
        "index-sets",
        HypothesisStatus.VERIFIED if sets_ok else HypothesisStatus.VIOLATED,
        "Conjuntos de índices no vacíos" if sets_ok else "omega+ U omega1- o omega2- vacío",
    ))

    nonneg = [
        HypothesisCheck.check_nonnegative(term.coefficient, hull, "nonnegative-coefficients", label=f"r_{k + 1}")
        for k, term in enumerate(inst.terms)
    ]
    violated = [h for h in nonneg if h.status == HypothesisStatus.VIOLATED]
    if violated:
        hypotheses.append(violated[0])
    else:
        hypotheses.append(HypothesisResult(
            "nonnegative-coefficients",
            HypothesisStatus.VERIFIED,
            f"r_k >= 0 en [{hull[0]:.6g}, {hull[1]:.6g}]",
        ))

    ordered = inst.t2_plus <= inst.t3_minus
    hypotheses.append(HypothesisResult(
        "argument-ordering",
        HypothesisStatus.VERIFIED if ordered else HypothesisStatus.VIOLATED,
        f"t2+ = {inst.t2_plus:.6g}, t3- = {inst.t3_minus:.6g}",
        margin=inst.t3_minus - inst.t2_plus if math.isfinite(inst.t3_minus - inst.t2_plus) else None,
    ))

    schedule = eps_schedule(eps0, eps_count)
    if sets_ok and not violated:
        pairs = []
        failed_eps = None
        for eps in schedule:
            p, r_eff = build_comparison(inst, eps)
            found, pair = interval_oscillatory(p, r_eff, (t1, t2), scan_points=scan_points, tol=tol)
            pairs.append({"eps": eps, "pair": list(pair) if pair else None})
            if not found:
                failed_eps = eps
                break
        witnesses["first_interval_pairs"] = pairs
        if failed_eps is None:
            hypotheses.append(HypothesisResult(
                "first-interval-conjugate",
                HypothesisStatus.VERIFIED,
                f"Oscilatoria en [{t1:.6g}, {t2:.6g}] para {len(schedule)} valores de eps",
                caveat=f"eps muestreado en {schedule[-1]:.3g}..{schedule[0]:.3g}, no en todo (0, eps0)",
            ))
        else:
            hypotheses.append(HypothesisResult(
                "first-interval-conjugate",
                HypothesisStatus.VIOLATED,
                f"Sin par conjugado en [{t1:.6g}, {t2:.6g}] con eps={failed_eps:.3g}",
                margin=failed_eps,
            ))

        found, pair = interval_oscillatory(inst.p, second_interval_coefficient(inst), (t3, t4),
                                           scan_points=scan_points, tol=tol)
        witnesses["second_interval_pair"] = list(pair) if pair else None
        hypotheses.append(HypothesisResult(
            "second-interval-conjugate",
            HypothesisStatus.VERIFIED if found else HypothesisStatus.VIOLATED,
            f"Par conjugado {pair} en [{t3:.6g}, {t4:.6g}]" if found else f"Sin par conjugado en [{t3:.6g}, {t4:.6g}]",
        ))
    else:
        skipped = "omitida: conjuntos vacíos o coeficientes negativos"
        for hypothesis_id in ("first-interval-conjugate", "second-interval-conjugate"):
            hypotheses.append(HypothesisResult(hypothesis_id, HypothesisStatus.NOT_VERIFIABLE, skipped))

    verdict = conclude(hypotheses, VerdictTag.CERTIFIED_OSCILLATORY, interval=hull)
    logger.info(f"interval comparison on {inst.partition}: {verdict.tag.value}")
    return CriterionReport(
        CRITERION,
        tuple(hypotheses),
        verdict,
        caveats=collect_caveats(hypotheses),
        witnesses=witnesses,
    )
