"""
Ecuación de Riccati funcional asociada a la ecuación y su transformación.

Con phi = lam * exp(F), F' = y / p, la ecuación se convierte en

    y' = -y^2/p - (q/p) y - sum_j r_j exp(-(F(t) - F(alpha_j(t)))) + (f/lam) exp(-F(t))

y en modo homogéneo se descarta el término forzado. El signo +q/p se usa en
ambas formas.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple
import logging
import math

import numpy as np

from app.config import settings
from app.core.equation import EquationSpec, HistorySpec
from app.core.errors import IntegrationError, TransformUndefinedError
from app.core.expressions import CallableFn, Coefficient, as_fn, constant
from app.core.integrator import (
    Segment,
    StepMarcher,
    Trajectory,
    evaluate_segments,
    macro_step,
    propagate_breakpoints,
)
from app.core.quadrature import antiderivative
from app.core.signs import sample_grid

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RiccatiProblem:
    """
    Problema de Riccati: ecuación base, lam != 0, inicio t1 y pasado gamma.

    En modo homogéneo ``equation`` es la ecuación de comparación (coeficientes
    r_{1,j}) y el término f/lam no participa.
    """
    equation: EquationSpec
    lam: float
    t1: float
    gamma: Coefficient = field(default_factory=lambda: constant(0.0))
    homogeneous: bool = False

    def __post_init__(self):
        if self.lam == 0.0:
            raise ValueError("lam must be nonzero")
        at_t1 = float(self.gamma(self.t1))
        left = float(self.gamma(self.t1 - 1e-9 * max(1.0, abs(self.t1))))
        if abs(left - at_t1) > 1e-6 * max(1.0, abs(at_t1)):
            raise ValueError(f"gamma is discontinuous at t1={self.t1!r}")

    @property
    def y0(self) -> float:
        return float(self.gamma(self.t1))


@dataclass(frozen=True)
class BlowUp:
    """Escape de y a +-inf: último tiempo integrado y estimación del escape."""
    time: float
    escape_time: float
    direction: str  # "+inf" | "-inf"

    def to_dict(self) -> dict:
        return {"time": self.time, "escape_time": self.escape_time, "direction": self.direction}


@dataclass(frozen=True)
class RiccatiTrajectory:
    """y y su acumulador F (F' = y/p), extendidos a la izquierda de t1."""
    equation: EquationSpec
    t1: float
    lam: float
    horizon: float
    reached: float
    y_right: ArrayFn
    F_right: ArrayFn
    y_left: ArrayFn
    F_left: ArrayFn
    mesh: Tuple[float, ...] = ()
    blow_up: Optional[BlowUp] = None

    @property
    def clean(self) -> bool:
        return self.blow_up is None

    def _eval(self, t, right: ArrayFn, left: ArrayFn):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(arr.size)
        mask = arr < self.t1
        if mask.any():
            out[mask] = left(arr[mask])
        if (~mask).any():
            tr = arr[~mask]
            if np.any(tr > self.reached + 1e-12 * max(1.0, abs(self.reached))):
                raise ValueError(f"t={float(tr.max())!r} beyond the Riccati span (reached {self.reached!r})")
            out[~mask] = right(tr)
        return float(out[0]) if np.ndim(t) == 0 else out

    def y(self, t):
        return self._eval(t, self.y_right, self.y_left)

    def F(self, t):
        return self._eval(t, self.F_right, self.F_left)

    def to_dict(self) -> dict:
        return {
            "t1": self.t1,
            "lam": self.lam,
            "horizon": self.horizon,
            "reached": self.reached,
            "blow_up": self.blow_up.to_dict() if self.blow_up else None,
        }


def _left_accumulator(p: Coefficient, gamma: Coefficient, lower: float, t1: float) -> ArrayFn:
    """F(t) = -int_t^{t1} gamma/p para t <= t1."""
    g_const = getattr(gamma, "constant", lambda: None)()
    p_const = getattr(p, "constant", lambda: None)()
    if g_const == 0.0:
        return lambda t: np.zeros(np.shape(t))
    if g_const is not None and p_const is not None:
        rate = g_const / p_const
        return lambda t: -rate * (t1 - np.asarray(t, dtype=float))
    if lower >= t1:
        return lambda t: np.zeros(np.shape(t))
    ratio = CallableFn(lambda t: np.asarray(gamma(t)) / np.asarray(p(t)), label="gamma/p", sources=(gamma, p))
    prim = antiderivative(ratio, lower, t1)
    end = float(prim(t1))
    return lambda t: np.asarray(prim(t)) - end


def solve_riccati(prob: RiccatiProblem, horizon: float, tol: Optional[float] = None) -> RiccatiTrajectory:
    """
    Integra la ecuación de Riccati funcional hasta ``horizon`` o hasta el escape.

    Los términos retardados se evalúan como F(t) - F(alpha_j(t)) con F como
    estado auxiliar del sistema aumentado (y, F).

    Returns:
        RiccatiTrajectory; una explosión se informa en ``blow_up``
    """
    eq = prob.equation
    t1 = prob.t1
    if horizon < t1:
        raise ValueError(f"horizon {horizon!r} precedes t1={t1!r}")
    tol = settings.INTEGRATOR_TOL if tol is None else tol
    lower = min(eq.min_argument(t1, horizon), t1) if horizon > t1 else t1
    F_left = _left_accumulator(eq.p, prob.gamma, lower, t1)

    def y_left(t):
        return np.asarray(prob.gamma(t), dtype=float)

    if horizon == t1:
        y0 = prob.y0
        return RiccatiTrajectory(eq, t1, prob.lam, horizon, t1, lambda t: np.full(np.shape(t), y0),
                                 lambda t: np.zeros(np.shape(t)), y_left, F_left)

    eq.validate(t1, horizon)
    forced = not prob.homogeneous
    lam = prob.lam
    terms = eq.terms

    def rhs(t: float, x: np.ndarray, delayed) -> np.ndarray:
        y, F = x
        p = eq.p(t)
        total = 0.0
        for term in terms:
            r = term.coefficient(t)
            if r != 0.0:
                total += r * math.exp(delayed(1, term.argument(t)) - F)
        dy = -y * y / p - eq.q(t) / p * y - total
        if forced:
            dy += eq.f(t) / lam * math.exp(-F)
        return np.array([dy, y / p])

    def past(component: int, tau: float) -> float:
        if component == 0:
            return float(prob.gamma(tau))
        return float(F_left(np.array([tau]))[0])

    y_max = settings.RICCATI_Y_MAX

    def escape(t, x, *args):
        return abs(x[0]) - y_max

    escape.terminal = True

    sources = [t1]
    for fn in eq.all_functions():
        sources.extend(fn.breakpoints(t1, horizon))
    sources.extend(prob.gamma.breakpoints(lower, t1))
    mesh = propagate_breakpoints(eq.arguments, sources, t1, horizon)
    macro = macro_step(eq.arguments, t1, horizon)

    marcher = StepMarcher(rhs, past, t1, [prob.y0, 0.0], tol=tol, events=[escape])
    blow_up: Optional[BlowUp] = None
    try:
        segments = marcher.march(mesh, macro)
    except IntegrationError as exc:
        state = marcher.failed_state
        if state is None or not _escaping(state[0], marcher.failed_step):
            raise
        segments = marcher.segments
        blow_up = _blow_up(eq, exc.t, state[0])
    if marcher.stop is not None:
        blow_up = _blow_up(eq, marcher.stop.t, marcher.stop.state[0])

    if not segments:
        raise IntegrationError("Riccati integration made no progress", t=t1)
    reached = segments[-1].t_end
    if blow_up is not None:
        logger.info(f"Riccati solution escapes to {blow_up.direction} near t={blow_up.escape_time:.8g}")
    else:
        logger.info(f"Riccati solution clean on [{t1:.6g}, {reached:.6g}]")

    def y_right(t):
        return evaluate_segments(segments, t)[0]

    def F_right(t):
        return evaluate_segments(segments, t)[1]

    return RiccatiTrajectory(
        eq, t1, lam, horizon, reached, y_right, F_right, y_left, F_left, tuple(float(m) for m in mesh), blow_up
    )


def _escaping(y: float, step: Optional[float]) -> bool:
    """
    Decide si una falla del integrador corresponde a una explosión de y.

    Lo es cuando |y| supera RICCATI_FALLBACK_Y o cuando el último paso aceptado
    quedó por debajo de RICCATI_MIN_STEP (colapso del paso cerca del escape).
    """
    if abs(y) > settings.RICCATI_FALLBACK_Y:
        return True
    return step is not None and step < settings.RICCATI_MIN_STEP


def _blow_up(eq: EquationSpec, t: float, y: float) -> BlowUp:
    # y' ~ -y^2/p cerca del escape
    escape_time = t + float(eq.p(t)) / abs(y)
    return BlowUp(float(t), float(escape_time), "+inf" if y > 0 else "-inf")


def riccati_from_solution(traj: Trajectory, t1: Optional[float] = None, zero_tol: Optional[float] = None) -> RiccatiTrajectory:
    """
    Transformación y = p phi' / phi sobre [t1, alcanzado].

    A la izquierda de t1, y se extiende por la constante y(t1) y F por
    -int_t^{t1} y(t1)/p. lam = phi(t1).

    Raises:
        TransformUndefinedError: si phi se anula en el tramo
    """
    t1 = traj.t1 if t1 is None else float(t1)
    zero_tol = settings.ZERO_TOL if zero_tol is None else zero_tol
    if traj.is_empty:
        raise TransformUndefinedError("empty trajectory")
    reached = traj.reached
    ts = np.unique(np.concatenate([sample_grid(t1, reached), traj.step_times()]))
    ts = ts[(ts >= t1) & (ts <= reached)]
    phi = traj.phi(ts)
    scale = max(1.0, float(np.max(np.abs(phi))))
    if np.min(np.abs(phi)) <= zero_tol * scale or np.any(np.sign(phi) != np.sign(phi[0])):
        bad = float(ts[np.argmin(np.abs(phi))])
        raise TransformUndefinedError(f"phi vanishes near t={bad!r}; the transform is undefined")
    lam = float(traj.phi(t1))
    y1 = float(traj.psi(t1)) / lam
    eq = traj.equation

    def y_right(t):
        state = traj.state(np.asarray(t, dtype=float))
        return state[1] / state[0]

    def F_right(t):
        return np.log(np.asarray(traj.phi(np.asarray(t, dtype=float))) / lam)

    lower = min(eq.min_argument(t1, reached), t1)
    F_left = _left_accumulator(eq.p, constant(y1), lower, t1)
    return RiccatiTrajectory(
        eq, t1, lam, traj.horizon, reached, y_right, F_right,
        lambda t: np.full(np.shape(t), y1), F_left, tuple(float(m) for m in traj.step_times()),
    )


def solution_from_riccati(riccati: RiccatiTrajectory, lam: Optional[float] = None) -> Trajectory:
    """
    phi = lam * exp(F) y psi = lam * y * exp(F) sobre el tramo limpio.

    Returns:
        Trajectory de un solo tramo, sin ceros
    """
    lam = riccati.lam if lam is None else float(lam)
    t1 = riccati.t1

    def dense(t):
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr)
        growth = np.exp(riccati.F(flat))
        out = np.vstack([lam * growth, lam * np.asarray(riccati.y(flat)) * growth])
        return out[:, 0] if arr.ndim == 0 else out

    y1 = float(riccati.y(t1))
    p1 = float(riccati.equation.p(t1))
    theta = CallableFn(lambda t: lam * np.exp(riccati.F(np.minimum(t, t1))), label="lam*exp(F)")
    history = HistorySpec(t1, theta, lam * y1 / p1)
    steps = np.array(riccati.mesh) if riccati.mesh else np.array([t1, riccati.reached])
    steps = np.unique(np.clip(np.concatenate([steps, [t1, riccati.reached]]), t1, riccati.reached))
    segment = Segment(t1, riccati.reached, dense, steps)
    return Trajectory(riccati.equation, history, riccati.horizon, (segment,), tuple(steps))


def initial_value(p: Coefficient, phi0: float, dphi0: float, t1: float) -> float:
    """y(t1) = p(t1) phi'(t1) / phi(t1)."""
    if phi0 == 0.0:
        raise TransformUndefinedError("phi(t1) = 0")
    return float(as_fn(p)(t1)) * dphi0 / phi0
