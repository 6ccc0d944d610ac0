"""Cuadratura por paneles sobre coeficientes a trozos."""
from typing import Callable, Iterable, Optional, Union
import logging
import warnings

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from app.config import settings
from app.core.errors import QuadratureError
from app.core.expressions import Coefficient

logger = logging.getLogger(__name__)

Integrand = Union[Coefficient, Callable[[float], float]]


def panel_edges(fn: Integrand, a: float, b: float, extra: Iterable[float] = ()) -> np.ndarray:
    """Bordes de panel: extremos, puntos de quiebre de ``fn`` y los extra."""
    points = [a, b]
    if hasattr(fn, "breakpoints"):
        points.extend(fn.breakpoints(a, b))
    points.extend(x for x in extra if a < x < b)
    return np.unique(np.asarray(points, dtype=float))


def quad(
    fn: Integrand,
    a: float,
    b: float,
    tol: Optional[float] = None,
    extra_breakpoints: Iterable[float] = (),
) -> float:
    """
    Integral de ``fn`` sobre [a, b] con los puntos de quiebre como bordes de panel.

    Args:
        fn: Coeficiente o función escalar
        a: Extremo izquierdo
        b: Extremo derecho (a <= b)
        tol: Tolerancia absoluta total (default settings.QUAD_TOL)
        extra_breakpoints: Bordes de panel adicionales

    Returns:
        Valor de la integral

    Raises:
        QuadratureError: si algún panel agota su presupuesto de subdivisión
    """
    if a > b:
        raise ValueError(f"quad requires a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    tol = settings.QUAD_TOL if tol is None else tol
    edges = panel_edges(fn, a, b, extra_breakpoints)
    panel_tol = tol / (len(edges) - 1)
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            try:
                value, _ = integrate.quad(
                    lambda x: float(fn(x)),
                    lo,
                    hi,
                    epsabs=panel_tol,
                    epsrel=1e-12,
                    limit=settings.QUAD_PANEL_LIMIT,
                )
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"panel [{lo!r}, {hi!r}] did not converge: {exc}") from None
            total += value
    return total


def cumulative_quad(fn: Coefficient, grid: np.ndarray, order: int = 8) -> np.ndarray:
    """
    Integrales acumuladas desde grid[0] hasta cada punto de la grilla.

    Usa Gauss-Legendre de orden fijo en cada celda, evaluando ``fn`` de forma
    vectorizada. La grilla debe contener los puntos de quiebre de ``fn``.
    """
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 2:
        return np.zeros(len(grid))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (grid[1:] + grid[:-1])
    half = 0.5 * (grid[1:] - grid[:-1])
    x = mid[:, None] + half[:, None] * nodes[None, :]
    values = np.asarray(fn(x.ravel()), dtype=float).reshape(x.shape)
    cells = half * (values @ weights)
    return np.concatenate([[0.0], np.cumsum(cells)])


def antiderivative(fn: Integrand, a: float, b: float, step: Optional[float] = None) -> PchipInterpolator:
    """
    Primitiva de ``fn`` anclada en a, interpolada sobre [a, b].

    La malla incluye los puntos de quiebre de ``fn`` para que los saltos del
    integrando caigan en nodos.
    """
    step = settings.GRID_STEP if step is None else step
    n = max(2, int(np.ceil((b - a) / step)) + 1)
    grid = np.unique(np.concatenate([np.linspace(a, b, n), panel_edges(fn, a, b)]))
    values = cumulative_quad(fn, grid)
    return PchipInterpolator(grid, values, extrapolate=True)
