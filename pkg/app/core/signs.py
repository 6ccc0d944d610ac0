"""Detección de intervalos de signo de un coeficiente sobre una grilla."""
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple
import logging

import numpy as np

from app.config import settings
from app.core.expressions import Coefficient

logger = logging.getLogger(__name__)

NONPOSITIVE = "<=0"
NONNEGATIVE = ">=0"


@dataclass(frozen=True)
class SignedInterval:
    """Intervalo [s, t] donde el signo de la función fue confirmado en la grilla."""
    s: float
    t: float
    sign: str
    margin: float  # max |f| en el intervalo

    @property
    def length(self) -> float:
        return self.t - self.s

    def to_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "sign": self.sign, "margin": self.margin}


@dataclass(frozen=True)
class SignPattern:
    """Un intervalo <= 0 seguido de un intervalo >= 0 dentro de una ventana."""
    window: Tuple[float, float]
    intervals: Tuple[SignedInterval, ...] = ()

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0

    @property
    def negative(self) -> Optional[SignedInterval]:
        return self.intervals[0] if self.intervals else None

    @property
    def positive(self) -> Optional[SignedInterval]:
        return self.intervals[1] if len(self.intervals) > 1 else None

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "intervals": [interval.to_dict() for interval in self.intervals],
        }


def sample_grid(a: float, b: float, step: Optional[float] = None) -> np.ndarray:
    """Grilla uniforme que incluye ambos extremos."""
    step = settings.GRID_STEP if step is None else step
    n = max(2, int(np.ceil((b - a) / step - 1e-9)) + 1)
    return np.linspace(a, b, n)


def _bisect_edge(pred: Callable[[float], bool], good: float, bad: float, iterations: int = 60) -> float:
    """Refina la frontera entre un punto que cumple ``pred`` y otro que no."""
    for _ in range(iterations):
        mid = 0.5 * (good + bad)
        if mid == good or mid == bad:
            break
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good


def _runs(mask: np.ndarray) -> List[Tuple[int, int]]:
    """Corridas maximales [i, j] (inclusive) donde ``mask`` es verdadero."""
    padded = np.concatenate([[False], mask, [False]])
    diff = np.diff(padded.astype(int))
    starts = np.flatnonzero(diff == 1)
    ends = np.flatnonzero(diff == -1) - 1
    return list(zip(starts, ends))


def _signed_runs(fn: Coefficient, ts: np.ndarray, values: np.ndarray, sign: str, slack: float) -> List[SignedInterval]:
    if sign == NONPOSITIVE:
        mask = values <= slack

        def pred(x: float) -> bool:
            return fn(x) <= slack
    else:
        mask = values >= -slack

        def pred(x: float) -> bool:
            return fn(x) >= -slack

    found = []
    for i, j in _runs(mask):
        s = ts[i] if i == 0 else _bisect_edge(pred, ts[i], ts[i - 1])
        t = ts[j] if j == len(ts) - 1 else _bisect_edge(pred, ts[j], ts[j + 1])
        margin = float(np.max(np.abs(values[i:j + 1])))
        found.append(SignedInterval(float(s), float(t), sign, margin))
    return found


def find_sign_intervals(
    fn: Coefficient,
    window: Tuple[float, float],
    min_len: Optional[float] = None,
    grid: Optional[float] = None,
    slack: Optional[float] = None,
) -> SignPattern:
    """
    Busca un intervalo donde fn <= 0 seguido de otro donde fn >= 0.

    Args:
        fn: Función a examinar
        window: Ventana [T, W]
        min_len: Longitud mínima de cada intervalo (default un macro-paso)
        grid: Paso de la grilla de muestreo
        slack: Holgura del signo en cada punto

    Returns:
        SignPattern con s1 < t1 <= s2 < t2, o vacío si no existe en la grilla
    """
    T, W = window
    if not T < W:
        raise ValueError(f"empty window [{T}, {W}]")
    min_len = settings.SIGN_MIN_LENGTH if min_len is None else min_len
    if min_len <= 0:
        raise ValueError("min_len must be positive")
    slack = settings.GRID_SLACK if slack is None else slack

    ts = sample_grid(T, W, grid)
    values = np.asarray(fn(ts), dtype=float)
    negatives = [run for run in _signed_runs(fn, ts, values, NONPOSITIVE, slack) if run.length >= min_len]
    positives = _signed_runs(fn, ts, values, NONNEGATIVE, slack)

    for neg in negatives:
        for pos in positives:
            s2 = max(pos.s, neg.t)
            if pos.t - s2 < min_len:
                continue
            if s2 > pos.s:
                inside = (ts >= s2) & (ts <= pos.t)
                margin = float(np.max(np.abs(values[inside]))) if inside.any() else pos.margin
                pos = SignedInterval(s2, pos.t, NONNEGATIVE, margin)
            logger.debug(f"sign pattern [{neg.s:.6g}, {neg.t:.6g}] <= 0, [{pos.s:.6g}, {pos.t:.6g}] >= 0")
            return SignPattern((T, W), (neg, pos))
    return SignPattern((T, W))


def find_sign_patterns(
    fn: Coefficient,
    window: Tuple[float, float],
    min_len: Optional[float] = None,
    repetitions: Optional[int] = None,
    grid: Optional[float] = None,
) -> List[SignPattern]:
    """
    Patrones de signo disjuntos encontrados de izquierda a derecha.

    Cada búsqueda empieza donde terminó el intervalo >= 0 anterior.
    Con ``repetitions`` se detiene al alcanzar esa cantidad.
    """
    T, W = window
    patterns: List[SignPattern] = []
    start = T
    while start < W and (repetitions is None or len(patterns) < repetitions):
        pattern = find_sign_intervals(fn, (start, W), min_len=min_len, grid=grid)
        if pattern.is_empty:
            break
        patterns.append(pattern)
        start = pattern.positive.t
    return patterns
