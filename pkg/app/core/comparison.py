"""Verificación numérica de los resultados de comparación entre ecuaciones de Riccati."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from app.config import settings
from app.core.equation import EquationSpec
from app.core.expressions import CallableFn, Coefficient, as_fn, constant
from app.core.integrator import StepMarcher, evaluate_segments
from app.core.quadrature import panel_edges
from app.core.riccati import RiccatiProblem, RiccatiTrajectory, solve_riccati
from app.core.signs import sample_grid

logger = logging.getLogger(__name__)


class ComparisonMode(str, Enum):
    """Sentido de la comparación funcional."""
    FORCED_ABOVE = "forced-above"  # la solución forzada queda por encima de la de comparación
    FORCED_BELOW = "forced-below"  # la solución de comparación queda por encima de la forzada


@dataclass(frozen=True)
class ConditionCheck:
    """Resultado de una condición verificada en grilla."""
    id: str
    holds: bool
    worst_point: Optional[float] = None
    worst_value: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "holds": self.holds,
            "worst_point": self.worst_point,
            "worst_value": self.worst_value,
        }


@dataclass(frozen=True)
class ComparisonReport:
    """Condiciones, margen de orden y explosiones de una comparación."""
    kind: str
    interval: Tuple[float, float]
    conditions: Tuple[ConditionCheck, ...]
    margin: float
    margin_point: float
    common_end: float
    conclusion: bool
    blow_ups: Dict[str, Optional[dict]] = field(default_factory=dict)

    @property
    def conditions_hold(self) -> bool:
        return all(check.holds for check in self.conditions)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "interval": list(self.interval),
            "conditions": [check.to_dict() for check in self.conditions],
            "margin": self.margin,
            "margin_point": self.margin_point,
            "common_end": self.common_end,
            "conclusion": self.conclusion,
            "blow_ups": self.blow_ups,
        }


def _nonnegative(check_id: str, values: np.ndarray, ts: np.ndarray, tol: float) -> ConditionCheck:
    """Condición values >= -tol en toda la grilla; informa el peor punto."""
    i = int(np.argmin(values))
    return ConditionCheck(check_id, bool(values[i] >= -tol), float(ts[i]), float(values[i]))


# ---------------------------------------------------------------------------
# Comparación escalar
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarRiccatiPair:
    """
    y' + a y^2 + b y + c = 0 frente a y' + a1 y^2 + b1 y + c1 = 0 en [t1, t2).

    eta0 y eta1 son los valores iniciales de las soluciones de las
    desigualdades asociadas (se integran las ecuaciones lineales con a = 0).
    """
    a: Coefficient
    b: Coefficient
    c: Coefficient
    a1: Coefficient
    b1: Coefficient
    c1: Coefficient
    t1: float
    t2: float
    y0: float
    eta0: float
    eta1: float
    lam: float

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise ValueError(f"empty interval [{self.t1}, {self.t2})")
        if self.eta0 < self.y0 or self.eta1 < self.y0:
            raise ValueError("eta0(t1) and eta1(t1) must be >= y0(t1)")
        if not self.y0 <= self.lam <= self.eta1:
            raise ValueError(f"lam={self.lam!r} outside [y0(t1), eta1(t1)] = [{self.y0!r}, {self.eta1!r}]")

    @classmethod
    def build(cls, a, b, c, a1, b1, c1, t1: float, t2: float, y0: float,
              eta0: Optional[float] = None, eta1: Optional[float] = None,
              lam: Optional[float] = None) -> "ScalarRiccatiPair":
        eta0 = y0 if eta0 is None else eta0
        eta1 = y0 if eta1 is None else eta1
        lam = y0 if lam is None else lam
        return cls(as_fn(a), as_fn(b), as_fn(c), as_fn(a1), as_fn(b1), as_fn(c1),
                   float(t1), float(t2), float(y0), float(eta0), float(eta1), float(lam))

    def functions(self) -> Tuple[Coefficient, ...]:
        return (self.a, self.b, self.c, self.a1, self.b1, self.c1)


def verify_scalar_comparison(
    pair: ScalarRiccatiPair,
    horizon: Optional[float] = None,
    tol: Optional[float] = None,
    margin_tol: float = 1e-8,
) -> ComparisonReport:
    """
    Comparación escalar: verifica la hipótesis integral y el orden y1 >= y0.

    Integra el sistema (y0, eta0, eta1, G, H, y1) con
    G' = a1 (eta0 + eta1) + b1 y
    H' = e^G [(a - a1) y0^2 + (b - b1) y0 + c - c1],  H(t1) = lam - y0(t1),
    de modo que H(t) es el miembro izquierdo de la hipótesis integral.

    Args:
        pair: Par de ecuaciones escalares
        horizon: Extremo derecho (default pair.t2)
        tol: Tolerancia del integrador
        margin_tol: Tolerancia del margen y de la hipótesis integral

    Returns:
        ComparisonReport con las condiciones, el margen min(y1 - y0) y las explosiones
    """
    t1 = pair.t1
    t2 = pair.t2 if horizon is None else min(pair.t2, horizon)
    a, b, c, a1, b1, c1 = pair.functions()

    def rhs(t, x, delayed):
        y0, e0, e1, g, h, y1 = x
        av, bv, cv, a1v, b1v, c1v = a(t), b(t), c(t), a1(t), b1(t), c1(t)
        return np.array([
            -(av * y0 * y0 + bv * y0 + cv),
            -(bv * e0 + cv),
            -(b1v * e1 + c1v),
            a1v * (e0 + e1) + b1v,
            np.exp(g) * ((av - a1v) * y0 * y0 + (bv - b1v) * y0 + cv - c1v),
            -(a1v * y1 * y1 + b1v * y1 + c1v),
        ])

    y_max = settings.RICCATI_Y_MAX

    def escape(t, x, *args):
        return y_max - max(abs(x[0]), abs(x[5]))

    escape.terminal = True

    def no_past(component: int, tau: float) -> float:
        raise ValueError("the scalar comparison has no deviating arguments")

    x0 = [pair.y0, pair.eta0, pair.eta1, 0.0, pair.lam - pair.y0, pair.eta1]
    marcher = StepMarcher(rhs, no_past, t1, x0, tol=tol, events=[escape])
    mesh = np.unique(np.concatenate([panel_edges(fn, t1, t2) for fn in pair.functions()]))
    segments = marcher.march(mesh, settings.MACRO_STEP)
    end = segments[-1].t_end

    blow_ups: Dict[str, Optional[dict]] = {"y0": None, "y1": None}
    if marcher.stop is not None:
        state = marcher.stop.state
        which = "y0" if abs(state[0]) >= abs(state[5]) else "y1"
        value = state[0] if which == "y0" else state[5]
        blow_ups[which] = {"time": marcher.stop.t, "direction": "+inf" if value > 0 else "-inf"}

    hyp_ts = np.linspace(t1, end, settings.SCALAR_COMPARISON_GRID)
    states = evaluate_segments(segments, hyp_ts)
    a1_values = np.asarray(a1(hyp_ts))
    conditions = (
        _nonnegative("a1-nonnegative", a1_values, hyp_ts, 0.0),
        _nonnegative("integral-hypothesis", states[4], hyp_ts, margin_tol),
    )

    ts = np.unique(np.concatenate([sample_grid(t1, end), np.concatenate([seg.step_times for seg in segments])]))
    ts = ts[ts <= end]
    states = evaluate_segments(segments, ts)
    gap = states[5] - states[0]
    i = int(np.argmin(gap))
    margin = float(gap[i])
    report = ComparisonReport(
        kind="scalar",
        interval=(t1, t2),
        conditions=conditions,
        margin=margin,
        margin_point=float(ts[i]),
        common_end=float(end),
        conclusion=margin >= -margin_tol,
        blow_ups=blow_ups,
    )
    logger.debug(f"scalar comparison on [{t1:.6g}, {end:.6g}]: margin {margin:.3e}")
    return report


# ---------------------------------------------------------------------------
# Comparación funcional
# ---------------------------------------------------------------------------

def _identity_mask(alpha: Coefficient, ts: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(alpha(ts)) - ts) <= settings.GRID_SLACK * np.maximum(1.0, np.abs(ts))


def functional_conditions(
    eq: EquationSpec,
    comparison: EquationSpec,
    mode: ComparisonMode,
    lam: float,
    interval: Tuple[float, float],
) -> List[ConditionCheck]:
    """
    Condiciones de la comparación funcional en la grilla de ``interval``.

    En modo forced-above: r1_j >= r_j; si r_j < 0 entonces r1_j >= 0 o
    alpha_j(t) = t; f/lam >= 0. En modo forced-below los papeles de r y r1 se
    invierten y f/lam <= 0.
    """
    ts = sample_grid(*interval)
    slack = settings.GRID_SLACK
    checks: List[ConditionCheck] = []
    for j, (term, cmp_term) in enumerate(zip(eq.terms, comparison.terms), start=1):
        r = np.asarray(term.coefficient(ts))
        r1 = np.asarray(cmp_term.coefficient(ts))
        upper, lower = (r1, r) if mode == ComparisonMode.FORCED_ABOVE else (r, r1)
        checks.append(_nonnegative(f"dominance[{j}]", upper - lower, ts, slack))
        # donde el coeficiente dominado es negativo, el dominante debe ser >= 0 o no haber desvío
        negative = lower < -slack
        excused = (upper >= -slack) | _identity_mask(term.argument, ts)
        bad = negative & ~excused
        if bad.any():
            k = int(np.argmax(bad))
            checks.append(ConditionCheck(f"negative-coefficients[{j}]", False, float(ts[k]), float(upper[k])))
        else:
            checks.append(ConditionCheck(f"negative-coefficients[{j}]", True))
    forcing = np.asarray(eq.f(ts)) / lam
    if mode == ComparisonMode.FORCED_BELOW:
        forcing = -forcing
    checks.append(_nonnegative("forcing-sign", forcing, ts, slack))
    return checks


def verify_functional_comparison(
    eq: EquationSpec,
    comparison_coefficients: Sequence,
    gamma,
    mode: ComparisonMode,
    interval: Tuple[float, float],
    lam: float = 1.0,
    gap: float = 1.0,
    tol: Optional[float] = None,
    margin_tol: Optional[float] = None,
) -> ComparisonReport:
    """
    Comparación de la ecuación de Riccati forzada con la homogénea de comparación.

    ``gamma`` es el pasado de la solución de referencia (la homogénea en
    forced-above, la forzada en forced-below); la otra solución arranca con
    pasado gamma + gap, de modo que sus datos iniciales quedan ordenados.

    Returns:
        ComparisonReport con las condiciones, el margen de orden estricto
        sobre el intervalo de existencia común y las explosiones
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    mode = ComparisonMode(mode)
    margin_tol = settings.INTEGRATOR_TOL if margin_tol is None else margin_tol
    comparison = eq.with_coefficients(comparison_coefficients)
    t1, t2 = interval
    conditions = functional_conditions(eq, comparison, mode, lam, interval)

    gamma = as_fn(gamma)
    shifted = _shift(gamma, gap)
    if mode == ComparisonMode.FORCED_ABOVE:
        upper_prob = RiccatiProblem(eq, lam, t1, shifted)
        lower_prob = RiccatiProblem(comparison, lam, t1, gamma, homogeneous=True)
    else:
        upper_prob = RiccatiProblem(comparison, lam, t1, shifted, homogeneous=True)
        lower_prob = RiccatiProblem(eq, lam, t1, gamma)

    upper = solve_riccati(upper_prob, t2, tol=tol)
    lower = solve_riccati(lower_prob, t2, tol=tol)
    margin, point, end = _ordering_margin(upper, lower)
    report = ComparisonReport(
        kind=mode.value,
        interval=(t1, t2),
        conditions=tuple(conditions),
        margin=margin,
        margin_point=point,
        common_end=end,
        conclusion=all(check.holds for check in conditions) and margin > -margin_tol,
        blow_ups={
            "upper": upper.blow_up.to_dict() if upper.blow_up else None,
            "lower": lower.blow_up.to_dict() if lower.blow_up else None,
        },
    )
    logger.info(f"{mode.value} comparison on [{t1:.6g}, {t2:.6g}]: margin {margin:.3e}, conclusion {report.conclusion}")
    return report


def _shift(gamma: Coefficient, gap: float) -> Coefficient:
    value = getattr(gamma, "constant", lambda: None)()
    if value is not None:
        return constant(value + gap)
    return CallableFn(lambda t: np.asarray(gamma(t)) + gap, label=f"{gamma!r} + {gap!r}", sources=(gamma,))


def _ordering_margin(upper: RiccatiTrajectory, lower: RiccatiTrajectory) -> Tuple[float, float, float]:
    end = min(upper.reached, lower.reached)
    t1 = upper.t1
    if end <= t1:
        return float(upper.y(t1) - lower.y(t1)), t1, t1
    ts = np.unique(np.concatenate([sample_grid(t1, end), [m for m in upper.mesh + lower.mesh if t1 <= m <= end]]))
    diff = np.asarray(upper.y(ts)) - np.asarray(lower.y(ts))
    i = int(np.argmin(diff))
    return float(diff[i]), float(ts[i]), float(end)
