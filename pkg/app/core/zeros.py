"""Localización de ceros de phi sobre la salida densa."""
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Tuple
import logging

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from app.config import settings

if TYPE_CHECKING:
    from app.core.integrator import Trajectory

logger = logging.getLogger(__name__)

SIGN_CHANGE = "sign-change"
TANGENCY = "tangency"

_XTOL = 1e-14


@dataclass(frozen=True)
class Zero:
    """Cero (o casi-cero tangencial) de phi."""
    location: float
    error_bound: float
    kind: str
    value: float

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "error_bound": self.error_bound,
            "kind": self.kind,
            "value": self.value,
        }


def sample_times(step_times: np.ndarray, per_step: Optional[int] = None) -> np.ndarray:
    """Subdivide cada paso aceptado en ``per_step`` sub-intervalos."""
    per_step = settings.ZERO_SAMPLES_PER_STEP if per_step is None else per_step
    step_times = np.unique(step_times)
    if len(step_times) < 2:
        return step_times
    fractions = np.arange(per_step) / per_step
    lo, hi = step_times[:-1], step_times[1:]
    inner = lo[:, None] + (hi - lo)[:, None] * fractions[None, :]
    return np.unique(np.concatenate([inner.ravel(), step_times[-1:]]))


def _root(phi, lo: float, hi: float) -> Zero:
    z = brentq(phi, lo, hi, xtol=_XTOL)
    bound = _XTOL + 4 * np.finfo(float).eps * abs(z)
    return Zero(float(z), float(bound), SIGN_CHANGE, float(phi(z)))


def detect_zeros(traj: "Trajectory", zero_tol: Optional[float] = None) -> Tuple[List[Zero], List[Zero]]:
    """
    Localiza los ceros de phi a la derecha de t1.

    Args:
        traj: Trayectoria con salida densa
        zero_tol: Tolerancia base (se escala por max(1, max |phi| acumulado))

    Returns:
        Tuple (zeros, near_zeros): cambios de signo refinados con brentq y
        casi-ceros tangenciales (|phi| < tol sin cambio de signo)
    """
    zero_tol = settings.ZERO_TOL if zero_tol is None else zero_tol
    if traj.is_empty:
        return [], []
    ts = sample_times(traj.step_times())
    values = np.asarray(traj.phi(ts))
    scale = np.maximum(1.0, np.maximum.accumulate(np.abs(values)))
    tols = zero_tol * scale

    def phi(x: float) -> float:
        return float(traj.phi(x))

    zeros: List[Zero] = []
    near: List[Zero] = []
    signs = np.sign(values)

    crossings = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    for i in crossings:
        zeros.append(_root(phi, ts[i], ts[i + 1]))

    for i in np.flatnonzero(values[1:] == 0.0) + 1:
        if i == len(values) - 1 or signs[i - 1] * signs[i + 1] < 0:
            zeros.append(Zero(float(ts[i]), 0.0, SIGN_CHANGE, 0.0))
        else:
            near.append(Zero(float(ts[i]), 0.0, TANGENCY, 0.0))

    absv = np.abs(values)
    for i in range(1, len(values) - 1):
        if signs[i] == 0 or signs[i - 1] != signs[i] or signs[i + 1] != signs[i]:
            continue
        if not (absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1] and (absv[i] < absv[i - 1] or absv[i] < absv[i + 1])):
            continue
        result = minimize_scalar(lambda x: abs(phi(x)), bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                                 options={"xatol": 1e-12})
        x_min = float(result.x)
        v_min = phi(x_min)
        if np.sign(v_min) == -signs[i]:
            # dos cruces entre muestras consecutivas
            zeros.append(_root(phi, ts[i - 1], x_min))
            zeros.append(_root(phi, x_min, ts[i + 1]))
        elif abs(v_min) <= tols[i]:
            near.append(Zero(x_min, 1e-12, TANGENCY, v_min))

    zeros = _dedupe(sorted(zeros, key=lambda z: z.location))
    near = _dedupe(sorted(near, key=lambda z: z.location))
    logger.debug(f"detected {len(zeros)} zeros and {len(near)} near-zeros up to t={traj.reached!r}")
    return zeros, near


def _dedupe(found: List[Zero]) -> List[Zero]:
    unique: List[Zero] = []
    for zero in found:
        if unique and abs(zero.location - unique[-1].location) <= 1e-12 * max(1.0, abs(zero.location)):
            continue
        unique.append(zero)
    return unique
