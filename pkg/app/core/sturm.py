"""Ecuaciones ordinarias (p phi')' + r phi = 0 en un intervalo y puntos conjugados."""
from typing import Optional, Tuple
import logging

import numpy as np

from app.config import settings
from app.core.equation import EquationSpec, HistorySpec
from app.core.expressions import Coefficient, as_fn, constant
from app.core.integrator import Trajectory, solve_cauchy

logger = logging.getLogger(__name__)


def solve_ode_interval(
    p: Coefficient,
    r: Coefficient,
    interval: Tuple[float, float],
    ic: Tuple[float, float],
    tol: Optional[float] = None,
) -> Trajectory:
    """
    Resuelve (p phi')' + r phi = 0 en [a, b] con phi(a), phi'(a) dados.

    Args:
        p: Coeficiente positivo
        r: Coeficiente del término sin desvío
        interval: [a, b]
        ic: (phi(a), phi'(a))
        tol: Tolerancia del integrador

    Returns:
        Trajectory densa en [a, b]
    """
    a, b = interval
    eq = EquationSpec.build(p=as_fn(p), terms=[(as_fn(r), "t")], t0=a)
    hist = HistorySpec(float(a), constant(float(ic[0])), float(ic[1]))
    return solve_cauchy(eq, hist, b, tol=tol, check_residual=False)


def interval_oscillatory(
    p: Coefficient,
    r: Coefficient,
    interval: Tuple[float, float],
    scan_points: Optional[int] = None,
    tol: Optional[float] = None,
) -> Tuple[bool, Optional[Tuple[float, float]]]:
    """
    Busca un par conjugado tau1 < tau2 dentro de [a, b].

    Para cada tau1 de la grilla se integra la solución con phi(tau1) = 0,
    phi'(tau1) = 1; si vuelve a anularse antes de b, toda solución se anula
    en [tau1, tau2] por separación de Sturm.

    Returns:
        Tuple (oscilatoria en [a, b], (tau1, tau2) o None)
    """
    a, b = interval
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    scan_points = settings.CONJUGATE_SCAN_POINTS if scan_points is None else scan_points
    for tau1 in np.linspace(a, b, scan_points, endpoint=False):
        traj = solve_ode_interval(p, r, (float(tau1), b), (0.0, 1.0), tol=tol)
        hits = [zero.location for zero in traj.zeros if zero.location <= b]
        if hits:
            logger.debug(f"conjugate pair ({tau1:.6g}, {hits[0]:.6g}) inside [{a:.6g}, {b:.6g}]")
            return True, (float(tau1), float(hits[0]))
    logger.debug(f"no conjugate pair found in [{a:.6g}, {b:.6g}] with {scan_points} start points")
    return False, None
