"""Criterio de oscilación por funcional cuadrático para (d phi')' + r phi = g."""
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import logging
import math

from app.config import settings
from app.core.expressions import Coefficient, as_fn
from app.core.hypotheses import HypothesisCheck, HypothesisResult, HypothesisStatus
from app.core.integrator import Trajectory
from app.core.quadrature import quad
from app.core.verdicts import CriterionReport, VerdictTag, collect_caveats, conclude

logger = logging.getLogger(__name__)

CRITERION = "wong"

ScalarFn = Callable[[float], float]


@dataclass(frozen=True)
class TrialFunction:
    """u en D(s, t): u(s) = u(t) = 0, u no idénticamente nula."""
    label: str
    u: ScalarFn
    du: ScalarFn
    breakpoints: Tuple[float, ...] = ()


def sine_power(s: float, t: float, m: int) -> TrialFunction:
    """u = sin^m(pi (x - s) / (t - s))."""
    k = math.pi / (t - s)

    def u(x: float) -> float:
        return math.sin(k * (x - s)) ** m

    def du(x: float) -> float:
        return m * math.sin(k * (x - s)) ** (m - 1) * math.cos(k * (x - s)) * k

    return TrialFunction(f"sin^{m}", u, du)


def hat(s: float, t: float, peak: float) -> TrialFunction:
    """Sombrero lineal con máximo 1 en s + peak (t - s)."""
    c = s + peak * (t - s)

    def u(x: float) -> float:
        return (x - s) / (c - s) if x <= c else (t - x) / (t - c)

    def du(x: float) -> float:
        return 1.0 / (c - s) if x < c else -1.0 / (t - c)

    return TrialFunction(f"hat({peak!r})", u, du, (c,))


def trial_family(s: float, t: float, powers: Sequence[int] = (1, 2, 3), peaks: Optional[Sequence[float]] = None) -> List[TrialFunction]:
    peaks = settings.WONG_HAT_PEAKS if peaks is None else peaks
    return [sine_power(s, t, m) for m in powers] + [hat(s, t, c) for c in peaks]


def wong_functional(
    d: Coefficient,
    r: Coefficient,
    u: ScalarFn,
    du: ScalarFn,
    s: float,
    t: float,
    extra_breakpoints: Iterable[float] = (),
    tol: Optional[float] = None,
) -> float:
    """
    Q(u) = int_s^t (r u^2 - d u'^2).

    Los puntos de quiebre de d y r y los de la función de prueba son bordes de panel.
    """
    d = as_fn(d)
    r = as_fn(r)
    breakpoints = list(extra_breakpoints)
    breakpoints.extend(d.breakpoints(s, t))
    breakpoints.extend(r.breakpoints(s, t))

    def integrand(x: float) -> float:
        return float(r(x)) * u(x) ** 2 - float(d(x)) * du(x) ** 2

    return quad(integrand, s, t, tol=tol, extra_breakpoints=breakpoints)


@dataclass(frozen=True)
class WongInstance:
    """Ecuación (d phi')' + r phi = g con la familia de prueba sobre una ventana."""
    d: Coefficient
    r: Coefficient
    g: Coefficient
    window: Tuple[float, float]
    powers: Tuple[int, ...] = (1, 2, 3)
    peaks: Tuple[float, ...] = field(default_factory=lambda: tuple(settings.WONG_HAT_PEAKS))
    min_len: Optional[float] = None
    repetitions: Optional[int] = None

    @classmethod
    def build(cls, d="1", r="1", g="0", window=(0.0, 1.0), **kwargs) -> "WongInstance":
        return cls(as_fn(d), as_fn(r), as_fn(g), (float(window[0]), float(window[1])), **kwargs)


def best_trial(inst: WongInstance, s: float, t: float) -> Tuple[float, str]:
    """
    Máximo de Q sobre la familia en [s, t].

    Raises:
        ValueError: intervalo más corto que el paso de grilla
    """
    if t - s < settings.GRID_STEP:
        raise ValueError(f"degenerate interval [{s!r}, {t!r}] shorter than the grid step")
    best_value, best_label = -math.inf, ""
    for trial in trial_family(s, t, inst.powers, inst.peaks):
        value = wong_functional(inst.d, inst.r, trial.u, trial.du, s, t, trial.breakpoints)
        if value > best_value:
            best_value, best_label = value, trial.label
    return best_value, best_label


def wong_test(inst: WongInstance, tol: Optional[float] = None) -> CriterionReport:
    """
    Busca patrones de signo de g y maximiza Q sobre la familia de prueba en cada intervalo.

    Returns:
        CriterionReport; CertifiedOscillatory si todos los máximos son >= -tol
    """
    tol = 10 * settings.QUAD_TOL if tol is None else tol
    sign_result, patterns = HypothesisCheck.check_forcing_sign_pattern(
        inst.g, inst.window, min_len=inst.min_len, repetitions=inst.repetitions
    )
    hypotheses: List[HypothesisResult] = [sign_result]
    evaluations = []
    worst = math.inf
    worst_point = None
    for pattern in patterns:
        for interval in pattern.intervals:
            value, label = best_trial(inst, interval.s, interval.t)
            evaluations.append({"s": interval.s, "t": interval.t, "sign": interval.sign, "Q": value, "trial": label})
            if value < worst:
                worst, worst_point = value, interval.s

    if not patterns:
        hypotheses.append(HypothesisResult(
            "trial-functional", HypothesisStatus.NOT_VERIFIABLE, "Sin intervalos de signo donde evaluar Q"
        ))
    elif worst >= -tol:
        hypotheses.append(HypothesisResult(
            "trial-functional",
            HypothesisStatus.VERIFIED,
            f"max Q >= {worst:.3e} en {len(evaluations)} intervalos",
            worst_point=worst_point,
            margin=worst,
        ))
    else:
        hypotheses.append(HypothesisResult(
            "trial-functional",
            HypothesisStatus.VIOLATED,
            f"max Q = {worst:.3e} < 0 en el intervalo que empieza en {worst_point:.6g}",
            worst_point=worst_point,
            margin=worst,
        ))
    verdict = conclude(hypotheses, VerdictTag.CERTIFIED_OSCILLATORY)
    logger.info(f"quadratic functional test: {verdict.tag.value}")
    return CriterionReport(
        CRITERION,
        tuple(hypotheses),
        verdict,
        caveats=collect_caveats(hypotheses),
        witnesses={
            "patterns": [pattern.to_dict() for pattern in patterns],
            "evaluations": evaluations,
        },
    )


def solution_functional(inst: WongInstance, traj: Trajectory, max_pairs: Optional[int] = None) -> List[dict]:
    """
    Q evaluado en la propia solución entre ceros consecutivos.

    Para una solución de (d phi')' + r phi = 0 con d = p el valor es 0 salvo
    error de cuadratura; con forzamiento mide cuánto se aparta.

    Args:
        inst: Instancia con d y r
        traj: Trajectory integrada (phi y psi = p phi')
        max_pairs: Cantidad máxima de pares de ceros a evaluar
    """
    locations = [zero.location for zero in traj.zeros]
    pairs = list(zip(locations[:-1], locations[1:]))
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    values = []
    for s, t in pairs:
        def u(x: float) -> float:
            return traj.phi(x)

        def du(x: float) -> float:
            return traj.psi(x) / float(inst.d(x))

        inner = [b for b in traj.step_times() if s < b < t]
        values.append({"s": s, "t": t, "Q": wong_functional(inst.d, inst.r, u, du, s, t, inner)})
    logger.debug(f"solution functional on {len(values)} zero pairs")
    return values
