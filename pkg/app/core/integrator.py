"""Integración del problema de Cauchy por el método de pasos."""
from bisect import bisect_right
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from app.config import settings
from app.core.equation import EquationSpec, HistorySpec, is_identity_argument
from app.core.errors import IntegrationError
from app.core.expressions import Coefficient
from app.core.signs import sample_grid
from app.core.zeros import Zero, detect_zeros

logger = logging.getLogger(__name__)

Delayed = Callable[[int, float], float]
SystemRhs = Callable[[float, np.ndarray, Delayed], np.ndarray]
Past = Callable[[int, float], float]


@dataclass(frozen=True)
class Segment:
    """Tramo integrado con su salida densa (vector de estado completo)."""
    t_start: float
    t_end: float
    dense: Callable
    step_times: np.ndarray


@dataclass(frozen=True)
class StopEvent:
    """Evento terminal alcanzado durante la marcha."""
    t: float
    state: np.ndarray


def evaluate_segments(segments: Sequence[Segment], t: np.ndarray) -> np.ndarray:
    """Evalúa la salida densa por tramos; devuelve (n_estados, len(t))."""
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        return np.empty((2, 0))
    starts = np.array([seg.t_start for seg in segments])
    idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(segments) - 1)
    out = None
    for i in np.unique(idx):
        mask = idx == i
        values = np.asarray(segments[i].dense(t[mask])).reshape(-1, int(mask.sum()))
        if out is None:
            out = np.empty((values.shape[0], t.size))
        out[:, mask] = values
    return out


class StepMarcher:
    """
    Avanza un sistema con argumentos retardados por el método de pasos.

    ``rhs(t, x, delayed)`` recibe ``delayed(component, tau)``, que resuelve el
    valor retardado desde el pasado, la salida densa de tramos anteriores, el
    estado actual (tau ~ t) o, dentro del tramo en curso, por interpolación lineal
    entre el inicio del tramo y el estado actual.
    """

    def __init__(
        self,
        rhs: SystemRhs,
        past: Past,
        t_start: float,
        x0: Sequence[float],
        tol: Optional[float] = None,
        method: Optional[str] = None,
        events: Sequence[Callable] = (),
    ):
        self.rhs = rhs
        self.past = past
        self.t_start = float(t_start)
        self.x = np.asarray(x0, dtype=float)
        self.tol = settings.INTEGRATOR_TOL if tol is None else tol
        self.method = method or settings.INTEGRATOR_METHOD
        self.events = list(events)
        self.segments: List[Segment] = []
        self._starts: List[float] = []
        self.stop: Optional[StopEvent] = None
        self._fallbacks = 0
        self.failed_state: Optional[np.ndarray] = None
        self.failed_step: Optional[float] = None

    def _from_segments(self, component: int, tau: float) -> float:
        i = max(0, bisect_right(self._starts, tau) - 1)
        return float(self.segments[i].dense(tau)[component])

    def _delayed(self, component: int, tau: float, t: float, x: np.ndarray, lo: float, x_lo: np.ndarray) -> float:
        if tau >= t - 1e-14 * max(1.0, abs(t)):
            return float(x[component])
        if tau <= self.t_start:
            return self.past(component, tau)
        if tau <= lo:
            return self._from_segments(component, tau)
        self._fallbacks += 1
        w = (tau - lo) / (t - lo)
        return float(x_lo[component] + w * (x[component] - x_lo[component]))

    def _advance(self, lo: float, hi: float) -> bool:
        x_lo = self.x.copy()

        def fun(t, x):
            return self.rhs(t, x, lambda c, tau: self._delayed(c, tau, t, x, lo, x_lo))

        sol = solve_ivp(
            fun,
            (lo, hi),
            self.x,
            method=self.method,
            rtol=self.tol,
            atol=self.tol,
            dense_output=True,
            events=self.events or None,
        )
        if sol.status == -1:
            self.failed_state = sol.y[:, -1].copy() if sol.y.size else self.x.copy()
            # último paso aceptado antes de la falla
            self.failed_step = float(sol.t[-1] - sol.t[-2]) if sol.t.size > 1 else None
            raise IntegrationError(f"integrator failed: {sol.message}", t=float(sol.t[-1]))
        self.segments.append(Segment(lo, float(sol.t[-1]), sol.sol, sol.t.copy()))
        self._starts.append(lo)
        self.x = sol.y[:, -1].copy()
        if sol.status == 1:
            self.stop = StopEvent(float(sol.t[-1]), self.x.copy())
            return False
        return True

    def march(self, mesh: Sequence[float], macro: float) -> List[Segment]:
        """
        Integra tramo a tramo sobre la malla, subdividiendo en macro-pasos.

        Returns:
            Lista de tramos integrados (se detiene en un evento terminal)
        """
        mesh = np.asarray(mesh, dtype=float)
        for a, b in zip(mesh[:-1], mesh[1:]):
            if b <= a:
                continue
            n = max(1, math.ceil((b - a) / macro - 1e-9))
            edges = np.linspace(a, b, n + 1)
            for lo, hi in zip(edges[:-1], edges[1:]):
                if not self._advance(float(lo), float(hi)):
                    return self.segments
        if self._fallbacks:
            logger.debug(f"{self._fallbacks} delayed values interpolated inside the current step")
        return self.segments


def propagate_breakpoints(
    arguments: Sequence[Coefficient],
    sources: Sequence[float],
    t_start: float,
    t_end: float,
    order: Optional[int] = None,
) -> np.ndarray:
    """
    Propaga discontinuidades: resuelve alpha_j(t) = b para cada b conocido.

    Args:
        arguments: Argumentos alpha_j (los idénticos a t no propagan)
        sources: Puntos de quiebre iniciales (t1, quiebres de coeficientes e historia)
        t_start: Inicio de la integración
        t_end: Horizonte
        order: Orden máximo de propagación

    Returns:
        Malla ordenada en [t_start, t_end] con ambos extremos
    """
    order = settings.DISCONTINUITY_ORDER if order is None else order
    scan = sample_grid(t_start, t_end, settings.BREAKPOINT_SCAN_STEP)
    images = [(alpha, np.asarray(alpha(scan))) for alpha in arguments if not is_identity_argument(alpha)]
    found = {t_start, t_end}
    found.update(b for b in sources if t_start < b < t_end)
    level = list(sources)
    for _ in range(order):
        new: List[float] = []
        for b in level:
            for alpha, values in images:
                g = values - b
                hits = set(scan[g == 0.0])
                for i in np.flatnonzero(g[:-1] * g[1:] < 0):
                    hits.add(brentq(lambda t: float(alpha(t)) - b, scan[i], scan[i + 1], xtol=1e-13))
                for t in hits:
                    if abs(t - b) <= 1e-12 * max(1.0, abs(b)) or not t_start < t < t_end:
                        continue
                    if any(abs(t - f) <= 1e-12 * max(1.0, abs(f)) for f in found):
                        continue
                    new.append(float(t))
                    found.add(float(t))
        if not new:
            break
        level = new
    return np.array(sorted(found))


def macro_step(arguments: Sequence[Coefficient], t_start: float, t_end: float) -> float:
    """Menor retardo positivo (acotado por MACRO_STEP y MIN_MACRO_STEP)."""
    step = settings.MACRO_STEP
    scan = sample_grid(t_start, t_end, settings.BREAKPOINT_SCAN_STEP)
    for alpha in arguments:
        if is_identity_argument(alpha):
            continue
        delays = scan - np.asarray(alpha(scan))
        positive = delays[delays > settings.GRID_SLACK]
        if positive.size:
            step = min(step, float(positive.min()))
    return max(step, settings.MIN_MACRO_STEP)


@dataclass(frozen=True)
class Trajectory:
    """Solución densa por tramos (phi, psi = p phi') con sus ceros."""
    equation: EquationSpec
    history: HistorySpec
    horizon: float
    segments: Tuple[Segment, ...] = ()
    breakpoints: Tuple[float, ...] = ()
    zeros: Tuple[Zero, ...] = ()
    near_zeros: Tuple[Zero, ...] = ()
    max_residual: float = 0.0
    residual_ok: bool = True

    @property
    def t1(self) -> float:
        return self.history.t1

    @property
    def is_empty(self) -> bool:
        return not self.segments

    @property
    def reached(self) -> float:
        return self.segments[-1].t_end if self.segments else self.t1

    def step_times(self) -> np.ndarray:
        if not self.segments:
            return np.array([self.t1])
        return np.unique(np.concatenate([seg.step_times for seg in self.segments]))

    def state(self, t) -> np.ndarray:
        """Estado (phi, psi) en t; a la izquierda de t1 se usa la historia."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((2, arr.size))
        left = arr < self.t1 if self.segments else arr <= self.t1
        if left.any():
            tl = arr[left]
            h = 1e-6 * np.maximum(1.0, np.abs(tl))
            dtheta = (np.asarray(self.history.theta(tl + h)) - np.asarray(self.history.theta(tl - h))) / (2 * h)
            out[0, left] = self.history.theta(tl)
            out[1, left] = np.asarray(self.equation.p(tl)) * dtheta
        right = ~left
        if right.any():
            tr = arr[right]
            limit = self.reached + 1e-12 * max(1.0, abs(self.reached))
            if np.any(tr > limit):
                raise ValueError(f"t={float(tr.max())!r} beyond the integrated span (reached {self.reached!r})")
            out[:, right] = evaluate_segments(self.segments, tr)[:2]
        if np.ndim(t) == 0:
            return out[:, 0]
        return out

    def phi(self, t):
        values = self.state(t)[0]
        return float(values) if np.ndim(t) == 0 else values

    def psi(self, t):
        values = self.state(t)[1]
        return float(values) if np.ndim(t) == 0 else values

    def sample(self) -> pd.DataFrame:
        """Tabla (t, phi, psi) en los pasos aceptados y puntos de malla."""
        if not self.segments:
            return pd.DataFrame({"t": [], "phi": [], "psi": []})
        ts = np.unique(np.concatenate([self.step_times(), np.asarray(self.breakpoints)]))
        ts = ts[(ts >= self.t1) & (ts <= self.reached)]
        values = self.state(ts)
        return pd.DataFrame({"t": ts, "phi": values[0], "psi": values[1]})

    def zeros_report(self) -> dict:
        return {
            "zeros": [zero.to_dict() for zero in self.zeros],
            "near_zeros": [zero.to_dict() for zero in self.near_zeros],
            "horizon": self.horizon,
        }


def _system_rhs(eq: EquationSpec) -> SystemRhs:
    """Sistema phi' = psi/p, psi' = -sum r_j phi(alpha_j) - (q/p) psi + f."""
    terms = eq.terms

    def rhs(t: float, x: np.ndarray, delayed: Delayed) -> np.ndarray:
        p = eq.p(t)
        total = 0.0
        for term in terms:
            r = term.coefficient(t)
            if r != 0.0:
                total += r * delayed(0, term.argument(t))
        return np.array([x[1] / p, -total - eq.q(t) / p * x[1] + eq.f(t)])

    return rhs


def residual(traj: Trajectory) -> float:
    """
    Residuo relativo del sistema en 3 puntos interiores de cada paso aceptado.

    La derivada de la salida densa se aproxima por diferencias centradas.
    """
    if traj.is_empty:
        return 0.0
    eq = traj.equation
    steps = traj.step_times()
    lo, hi = steps[:-1], steps[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    width = hi - lo
    tc = (lo[:, None] + width[:, None] * np.array([0.25, 0.5, 0.75])[None, :]).ravel()
    h = np.repeat(width * 1e-3, 3)
    x = traj.state(tc)
    dx = (traj.state(tc + h) - traj.state(tc - h)) / (2 * h)
    p = np.asarray(eq.p(tc))
    total = np.zeros_like(tc)
    for term in eq.terms:
        alpha = np.asarray(term.argument(tc))
        current = alpha >= tc - 1e-14 * np.maximum(1.0, np.abs(tc))
        delayed = np.where(current, x[0], traj.phi(np.where(current, tc, alpha)))
        total += np.asarray(term.coefficient(tc)) * delayed
    f_values = np.vstack([x[1] / p, -total - np.asarray(eq.q(tc)) / p * x[1] + np.asarray(eq.f(tc))])
    scale = np.maximum(1.0, np.maximum(np.abs(x).max(axis=0), np.abs(f_values).max(axis=0)))
    return float(np.max(np.abs(dx - f_values).max(axis=0) / scale))


def solve_cauchy(
    eq: EquationSpec,
    hist: HistorySpec,
    horizon: float,
    tol: Optional[float] = None,
    zero_tol: Optional[float] = None,
    check_residual: bool = True,
) -> Trajectory:
    """
    Resuelve el problema de Cauchy por el método de pasos.

    Args:
        eq: Ecuación
        hist: Historia theta en (-inf, t1] y phi'(t1) = zeta
        horizon: Extremo derecho (>= t1; igual a t1 da una trayectoria vacía)
        tol: Tolerancia del par Runge-Kutta
        zero_tol: Tolerancia de ceros
        check_residual: Calcula el residuo en puntos de colocación

    Returns:
        Trajectory con ceros y residuo

    Raises:
        HistoryDomainError: theta no definida a la izquierda necesaria
        IntegrationError: paso demasiado chico (con la ubicación)
    """
    t1 = hist.t1
    if t1 < eq.t0:
        raise ValueError(f"t1={t1!r} precedes the domain start t0={eq.t0!r}")
    if horizon < t1:
        raise ValueError(f"horizon {horizon!r} precedes t1={t1!r}")
    tol = settings.INTEGRATOR_TOL if tol is None else tol
    if horizon == t1:
        return Trajectory(eq, hist, horizon)

    eq.validate(t1, horizon)
    lower = min(eq.min_argument(t1, horizon), t1)
    hist.check(lower)

    sources = [t1]
    for fn in eq.all_functions():
        sources.extend(fn.breakpoints(t1, horizon))
    sources.extend(hist.theta.breakpoints(lower, t1))
    mesh = propagate_breakpoints(eq.arguments, sources, t1, horizon)
    macro = macro_step(eq.arguments, t1, horizon)
    logger.debug(f"method of steps on [{t1!r}, {horizon!r}]: {len(mesh)} mesh points, macro step {macro:.6g}")

    def past(component: int, tau: float) -> float:
        return float(hist.theta(tau))

    x0 = [float(hist.theta(t1)), float(eq.p(t1)) * hist.zeta]
    marcher = StepMarcher(_system_rhs(eq), past, t1, x0, tol=tol)
    segments = marcher.march(mesh, macro)

    traj = Trajectory(eq, hist, horizon, tuple(segments), tuple(float(m) for m in mesh))
    zeros, near = detect_zeros(traj, zero_tol)
    traj = replace(traj, zeros=tuple(zeros), near_zeros=tuple(near))
    if check_residual:
        value = residual(traj)
        ok = value <= settings.RESIDUAL_TOL
        if not ok:
            logger.warning(f"residual {value:.3e} above tolerance {settings.RESIDUAL_TOL:.1e}")
        traj = replace(traj, max_residual=value, residual_ok=ok)
    logger.info(f"integrated to t={traj.reached:.6g}: {len(zeros)} zeros, residual {traj.max_residual:.2e}")
    return traj
