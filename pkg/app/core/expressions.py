"""Lenguaje de expresiones para coeficientes: parser, AST y funciones a trozos.

Gramática (espacios libres):

    program   :: piecewise | expr
    piecewise :: 'piecewise' ['period' expr] piece (';' piece)*
    piece     :: '[' bound ',' bound (')' | ']') ':' expr
    bound     :: ['+' | '-'] 'inf' | expr            (constante, sin t)
    expr      :: term (('+' | '-') term)*
    term      :: factor (('*' | '/') factor)*
    factor    :: ('-' | '+') factor | power
    power     :: atom ['^' factor]                   (asociativa a derecha)
    atom      :: number ['pi'] | call | 't' | 'pi' | 'π' | 'e' | '(' expr ')'
    call      :: name '(' expr (',' expr)* ')'

Funciones: sin cos tan exp ln sqrt abs min max mod step ind. ``step(x)`` es el
escalón continuo a derecha y ``ind(x, a, b)`` la indicadora de [a, b).

En los puntos de quiebre interiores se usa el valor del trozo de la derecha.
Con ``period P`` los trozos cubren un período [a, a + P) y el trozo se elige
con el argumento reducido; el cuerpo se evalúa en el t original.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Protocol, Sequence, Tuple, Union
import math
import logging

import numpy as np
import pyparsing as pp

from app.core.errors import ExpressionDomainError, ExpressionSyntaxError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _first_bad(t: np.ndarray, bad: np.ndarray) -> Optional[float]:
    """Devuelve el primer t donde ``bad`` es verdadero (o None)."""
    bad = np.broadcast_to(bad, np.broadcast(t, bad).shape)
    if not bad.any():
        return None
    tt = np.broadcast_to(t, bad.shape)
    return float(tt[np.argmax(bad)])


# ---------------------------------------------------------------------------
# Nodos del AST
# ---------------------------------------------------------------------------

class Node:
    """Nodo inmutable del AST de una expresión."""

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def has_var(self) -> bool:
        raise NotImplementedError

    def jumps(self) -> List[float]:
        """Puntos de salto conocidos (indicadoras y escalones en t)."""
        return []


@dataclass(frozen=True)
class Const(Node):
    value: float

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.full(np.shape(t), self.value, dtype=float)

    def to_source(self) -> str:
        text = repr(float(self.value))
        return f"({text})" if self.value < 0 else text

    def has_var(self) -> bool:
        return False


@dataclass(frozen=True)
class Var(Node):
    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(t, dtype=float)

    def to_source(self) -> str:
        return "t"

    def has_var(self) -> bool:
        return True


@dataclass(frozen=True)
class Neg(Node):
    child: Node

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return -self.child.evaluate(t)

    def to_source(self) -> str:
        return f"(-{self.child.to_source()})"

    def has_var(self) -> bool:
        return self.child.has_var()

    def jumps(self) -> List[float]:
        return self.child.jumps()


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        a = self.left.evaluate(t)
        b = self.right.evaluate(t)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            bad = _first_bad(t, b == 0.0)
            if bad is not None:
                raise ExpressionDomainError("division by zero", t=bad)
            return a / b
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            out = np.power(a, b)
        bad = _first_bad(t, ~np.isfinite(out))
        if bad is not None:
            raise ExpressionDomainError("power outside its domain", t=bad)
        return out

    def to_source(self) -> str:
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"

    def has_var(self) -> bool:
        return self.left.has_var() or self.right.has_var()

    def jumps(self) -> List[float]:
        return self.left.jumps() + self.right.jumps()


def _ln(t, x):
    bad = _first_bad(t, x <= 0.0)
    if bad is not None:
        raise ExpressionDomainError("ln of non-positive argument", t=bad)
    return np.log(x)


def _sqrt(t, x):
    bad = _first_bad(t, x < 0.0)
    if bad is not None:
        raise ExpressionDomainError("sqrt of negative argument", t=bad)
    return np.sqrt(x)


def _mod(t, x, m):
    bad = _first_bad(t, m == 0.0)
    if bad is not None:
        raise ExpressionDomainError("mod by zero", t=bad)
    return np.mod(x, m)


def _min(t, *args):
    return np.minimum.reduce(np.broadcast_arrays(*args))


def _max(t, *args):
    return np.maximum.reduce(np.broadcast_arrays(*args))


# nombre -> (aridad mínima, aridad máxima, implementación(t, *args))
FUNCTIONS = {
    "sin": (1, 1, lambda t, x: np.sin(x)),
    "cos": (1, 1, lambda t, x: np.cos(x)),
    "tan": (1, 1, lambda t, x: np.tan(x)),
    "exp": (1, 1, lambda t, x: np.exp(x)),
    "ln": (1, 1, _ln),
    "sqrt": (1, 1, _sqrt),
    "abs": (1, 1, lambda t, x: np.abs(x)),
    "min": (2, 16, _min),
    "max": (2, 16, _max),
    "mod": (2, 2, _mod),
    "step": (1, 1, lambda t, x: np.where(x >= 0.0, 1.0, 0.0)),
    "ind": (3, 3, lambda t, x, a, b: np.where((x >= a) & (x < b), 1.0, 0.0)),
}


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: Tuple[Node, ...]

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        impl = FUNCTIONS[self.name][2]
        values = [arg.evaluate(t) for arg in self.args]
        return np.asarray(impl(t, *values), dtype=float)

    def to_source(self) -> str:
        return f"{self.name}({', '.join(arg.to_source() for arg in self.args)})"

    def has_var(self) -> bool:
        return any(arg.has_var() for arg in self.args)

    def jumps(self) -> List[float]:
        found = [j for arg in self.args for j in arg.jumps()]
        if self.name == "ind" and _is_shifted_var(self.args[0]):
            shift = _shift_of(self.args[0])
            for bound in self.args[1:]:
                if not bound.has_var():
                    found.append(constant_value(bound) - shift)
        elif self.name == "step" and _is_shifted_var(self.args[0]):
            found.append(-_shift_of(self.args[0]))
        return found


def _is_shifted_var(node: Node) -> bool:
    """True para ``t``, ``t + c`` o ``t - c`` con c constante."""
    if isinstance(node, Var):
        return True
    if isinstance(node, BinOp) and node.op in "+-":
        return isinstance(node.left, Var) and not node.right.has_var()
    return False


def _shift_of(node: Node) -> float:
    if isinstance(node, Var):
        return 0.0
    value = constant_value(node.right)
    return value if node.op == "+" else -value


def constant_value(node: Node) -> float:
    """Evalúa un nodo sin variable libre."""
    return float(node.evaluate(np.zeros(1))[0])


# ---------------------------------------------------------------------------
# Funciones a trozos
# ---------------------------------------------------------------------------

class Coefficient(Protocol):
    """Cualquier coeficiente evaluable con puntos de quiebre conocidos."""

    def __call__(self, t: ArrayLike) -> ArrayLike: ...

    def breakpoints(self, a: float, b: float) -> np.ndarray: ...


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    body: Node
    closed_right: bool = False


def _format_bound(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


class PiecewiseFn:
    """Función definida por trozos contiguos, opcionalmente periódica.

    Una expresión simple es una función de un único trozo sobre toda la recta.
    """

    def __init__(self, pieces: Sequence[Piece], period: Optional[float] = None, source: Optional[str] = None):
        if not pieces:
            raise ValueError("a piecewise function needs at least one piece")
        self.pieces: Tuple[Piece, ...] = tuple(pieces)
        self.period = period
        self.source = source
        self._los = np.array([piece.lo for piece in self.pieces])
        self._start = self.pieces[0].lo
        self._end = self.pieces[-1].hi
        self._const = (
            self.pieces[0].body.value
            if len(self.pieces) == 1 and isinstance(self.pieces[0].body, Const)
            and math.isinf(self._start) and math.isinf(self._end)
            else None
        )

    # evaluación -----------------------------------------------------------

    def _reduce(self, t: np.ndarray) -> np.ndarray:
        if self.period is None:
            return t
        u = self._start + np.mod(t - self._start, self.period)
        return np.where(u >= self._end, self._start, u)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if self._const is not None:
            if np.ndim(t) == 0:
                return self._const
            return np.full(np.shape(t), self._const)
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        tt = np.atleast_1d(arr)
        u = self._reduce(tt)
        idx = np.searchsorted(self._los, u, side="right") - 1
        last = self.pieces[-1]
        outside = (idx < 0) | (u > self._end) | ((u == self._end) & (not last.closed_right))
        if self.period is None and outside.any():
            raise ExpressionDomainError("outside the declared domain", t=float(tt[np.argmax(outside)]))
        # en el extremo derecho cerrado se usa el último trozo
        idx = np.minimum(idx, len(self.pieces) - 1)
        if len(self.pieces) == 1:
            out = np.broadcast_to(self.pieces[0].body.evaluate(tt), tt.shape).astype(float)
        else:
            out = np.empty_like(tt)
            for i, piece in enumerate(self.pieces):
                mask = idx == i
                if mask.any():
                    out[mask] = np.broadcast_to(piece.body.evaluate(tt[mask]), (int(mask.sum()),))
        if not np.all(np.isfinite(out)):
            raise ExpressionDomainError("non-finite value", t=float(tt[np.argmax(~np.isfinite(out))]))
        return float(out[0]) if scalar else out

    # estructura -----------------------------------------------------------

    def breakpoints(self, a: float, b: float) -> np.ndarray:
        """Puntos de quiebre en el abierto (a, b), ordenados y sin repetir."""
        if b <= a:
            return np.empty(0)
        edges = [piece.lo for piece in self.pieces[1:]]
        jumps = [j for piece in self.pieces for j in piece.body.jumps()]
        points: List[float] = list(jumps)
        if self.period is None:
            points.extend(edges)
            if not math.isinf(self._start):
                points.append(self._start)
            if not math.isinf(self._end):
                points.append(self._end)
        else:
            offsets = [0.0] + [edge - self._start for edge in edges]
            k_lo = math.floor((a - self._start) / self.period)
            k_hi = math.ceil((b - self._start) / self.period)
            for k in range(k_lo, k_hi + 1):
                base = self._start + k * self.period
                points.extend(base + offset for offset in offsets)
        arr = np.array(sorted(set(points)), dtype=float)
        return arr[(arr > a) & (arr < b)]

    def has_var(self) -> bool:
        return any(piece.body.has_var() for piece in self.pieces)

    def constant(self) -> Optional[float]:
        """Valor constante si la función lo es estructuralmente."""
        if self.has_var():
            return None
        folded = {constant_value(piece.body) for piece in self.pieces}
        return folded.pop() if len(folded) == 1 else None

    def is_identity(self) -> bool:
        """True si la función es exactamente t sobre toda la recta."""
        return (
            len(self.pieces) == 1
            and self.period is None
            and isinstance(self.pieces[0].body, Var)
            and math.isinf(self._start)
            and math.isinf(self._end)
        )

    def to_source(self) -> str:
        if len(self.pieces) == 1 and self.period is None and math.isinf(self._start) and math.isinf(self._end):
            return self.pieces[0].body.to_source()
        parts = []
        for piece in self.pieces:
            closing = "]" if piece.closed_right else ")"
            parts.append(f"[{_format_bound(piece.lo)}, {_format_bound(piece.hi)}{closing}: {piece.body.to_source()}")
        head = "piecewise" if self.period is None else f"piecewise period {self.period!r}"
        return f"{head} " + " ; ".join(parts)

    def __repr__(self) -> str:
        return f"PiecewiseFn({self.source or self.to_source()!r})"


class CallableFn:
    """Envuelve una función calculada (vectorizada) como coeficiente.

    Los puntos de quiebre son los fijos más los de los coeficientes de ``sources``.
    """

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        breakpoints: Iterable[float] = (),
        label: str = "<computed>",
        sources: Sequence["Coefficient"] = (),
    ):
        self.func = func
        self._breakpoints = np.array(sorted(set(float(b) for b in breakpoints)), dtype=float)
        self.label = label
        self.sources = tuple(sources)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        arr = np.asarray(t, dtype=float)
        out = np.asarray(self.func(np.atleast_1d(arr)), dtype=float)
        out = np.broadcast_to(out, np.atleast_1d(arr).shape)
        return float(out[0]) if arr.ndim == 0 else np.array(out)

    def breakpoints(self, a: float, b: float) -> np.ndarray:
        bp = self._breakpoints
        points = [bp[(bp > a) & (bp < b)]] + [src.breakpoints(a, b) for src in self.sources]
        return np.unique(np.concatenate(points))

    def constant(self) -> Optional[float]:
        return None

    def is_identity(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"CallableFn({self.label})"


def constant(value: float) -> PiecewiseFn:
    """Función constante."""
    return PiecewiseFn([Piece(-math.inf, math.inf, Const(float(value)))], source=repr(float(value)))


def as_fn(value: Union[str, float, int, "Coefficient"]) -> "Coefficient":
    """Acepta una fuente, un número o un coeficiente ya construido."""
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float)):
        return constant(float(value))
    return value


def positive_part(fn: "Coefficient") -> "Coefficient":
    """Parte positiva max{0, fn} punto a punto."""
    if isinstance(fn, PiecewiseFn):
        pieces = [
            Piece(piece.lo, piece.hi, Call("max", (Const(0.0), piece.body)), piece.closed_right)
            for piece in fn.pieces
        ]
        return PiecewiseFn(pieces, period=fn.period)
    return CallableFn(lambda t: np.maximum(0.0, fn(t)), label=f"max(0, {fn!r})", sources=(fn,))


def sum_of(fns: Sequence["Coefficient"], label: str = "sum") -> "Coefficient":
    """Suma punto a punto; la suma vacía es la constante cero."""
    if not fns:
        return constant(0.0)
    if len(fns) == 1:
        return fns[0]
    return CallableFn(
        lambda t: np.sum([np.broadcast_to(fn(t), t.shape) for fn in fns], axis=0),
        label=label,
        sources=tuple(fns),
    )


# ---------------------------------------------------------------------------
# Parser (pyparsing)
# ---------------------------------------------------------------------------

_CONSTANTS = {"pi": math.pi, "π": math.pi, "e": math.e}


def _fold(tokens) -> Node:
    items = list(tokens[0]) if isinstance(tokens[0], pp.ParseResults) else list(tokens)
    node = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        node = BinOp(op, node, rhs)
    return node


@lru_cache(maxsize=1)
def _grammar() -> pp.ParserElement:
    """Construye la gramática una sola vez."""
    lpar, rpar, comma = map(pp.Suppress, "(),")
    number = pp.Regex(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?:pi(?![A-Za-z0-9_])|π)?")
    ident = pp.Word(pp.alphas + "π_", pp.alphanums + "_")

    expr = pp.Forward()

    def number_action(s, loc, toks):
        text = toks[0]
        if text.endswith("pi"):
            return Const(float(text[:-2]) * math.pi)
        if text.endswith("π"):
            return Const(float(text[:-1]) * math.pi)
        return Const(float(text))

    number_atom = number.copy().set_parse_action(number_action)

    def call_action(s, loc, toks):
        name = toks[0]
        args = tuple(toks[1])
        if name not in FUNCTIONS:
            raise pp.ParseFatalException(s, loc, f"unknown function '{name}'")
        low, high, _ = FUNCTIONS[name]
        if not low <= len(args) <= high:
            raise pp.ParseFatalException(s, loc, f"function '{name}' takes {low} argument(s), got {len(args)}")
        return Call(name, args)

    call = (ident + lpar + pp.Group(pp.delimited_list(expr)) + rpar).set_parse_action(call_action)

    def ident_action(s, loc, toks):
        name = toks[0]
        if name == "t":
            return Var()
        if name in _CONSTANTS:
            return Const(_CONSTANTS[name])
        raise pp.ParseFatalException(s, loc, f"unknown identifier '{name}'")

    variable = ident.copy().set_parse_action(ident_action)
    atom = number_atom | call | variable | (lpar + expr + rpar)

    factor = pp.Forward()
    power = (atom + pp.Optional(pp.Suppress("^") + factor)).set_parse_action(
        lambda toks: BinOp("^", toks[0], toks[1]) if len(toks) == 2 else toks[0]
    )
    negation = (pp.one_of("- +") + factor).set_parse_action(
        lambda toks: Neg(toks[1]) if toks[0] == "-" else toks[1]
    )
    factor <<= negation | power
    term = (factor + pp.ZeroOrMore(pp.one_of("* /") + factor)).set_parse_action(_fold)
    expr <<= (term + pp.ZeroOrMore(pp.one_of("+ -") + term)).set_parse_action(_fold)

    inf_bound = (pp.Optional(pp.one_of("+ -"), default="+") + pp.Keyword("inf")).set_parse_action(
        lambda toks: Const(-math.inf if toks[0] == "-" else math.inf)
    )
    bound = inf_bound | expr
    here = pp.Empty().set_parse_action(lambda s, loc, toks: [loc])
    closing = pp.one_of(") ]")
    piece = pp.Group(
        pp.Suppress("[") + here + bound + comma + bound + closing + pp.Suppress(":") + expr
    )
    period = pp.Group(pp.Optional(pp.Suppress(pp.Keyword("period")) + expr))
    piecewise = (
        pp.Suppress(pp.Keyword("piecewise")) + period + pp.Group(piece + pp.ZeroOrMore(pp.Suppress(";") + piece))
    ).set_parse_action(_piecewise_action)

    single = pp.Group(expr).set_parse_action(lambda toks: _single_piece(toks[0][0]))
    return (piecewise | single) + pp.StringEnd()


def _single_piece(node: Node) -> PiecewiseFn:
    return PiecewiseFn([Piece(-math.inf, math.inf, node)])


def _bound_value(s: str, loc: int, node: Node) -> float:
    if node.has_var():
        raise pp.ParseFatalException(s, loc, "piece bounds must be constant")
    if isinstance(node, Const):
        return node.value
    return constant_value(node)


def _piecewise_action(s, loc, toks):
    period_tokens, piece_tokens = toks[0], toks[1]
    period = None
    if len(period_tokens):
        period_node = period_tokens[0]
        period = _bound_value(s, loc, period_node)
        if not period > 0 or math.isinf(period):
            raise pp.ParseFatalException(s, loc, "period must be positive and finite")
    pieces: List[Piece] = []
    for start, lo_node, hi_node, closing, body in piece_tokens:
        lo = _bound_value(s, start, lo_node)
        hi = _bound_value(s, start, hi_node)
        if not lo < hi:
            raise pp.ParseFatalException(s, start, f"non-ascending breakpoints [{lo}, {hi}]")
        if pieces:
            prev = pieces[-1].hi
            if abs(lo - prev) > 1e-12 * max(1.0, abs(prev)):
                kind = "overlapping" if lo < prev else "non-contiguous"
                raise pp.ParseFatalException(s, start, f"{kind} pieces at {prev} and {lo}")
            lo = prev
        pieces.append(Piece(lo, hi, body, closing == "]"))
    if period is not None:
        span = pieces[-1].hi - pieces[0].lo
        if math.isinf(span) or abs(span - period) > 1e-9 * max(1.0, period):
            raise pp.ParseFatalException(s, loc, "periodic pieces must cover exactly one period")
    return PiecewiseFn(pieces, period=period)


def parse(src: str) -> PiecewiseFn:
    """
    Parsea una expresión de coeficiente.

    Args:
        src: Texto fuente según la gramática del módulo

    Returns:
        PiecewiseFn evaluable (escalar o vectorizada)

    Raises:
        ExpressionSyntaxError: con posición, línea y columna del error
    """
    try:
        result = _grammar().parse_string(src, parse_all=True)
    except pp.ParseBaseException as exc:
        raise ExpressionSyntaxError(exc.msg, src, exc.loc) from None
    fn = result[0]
    fn.source = src
    logger.debug(f"parsed coefficient {src!r} with {len(fn.pieces)} piece(s)")
    return fn


def parse_constant(value: Union[str, float, int]) -> float:
    """Evalúa una expresión constante (por ejemplo ``"3*pi"``)."""
    if isinstance(value, (int, float)):
        return float(value)
    text = value.strip()
    if text in ("inf", "+inf"):
        return math.inf
    if text == "-inf":
        return -math.inf
    fn = parse(text)
    if fn.has_var() or len(fn.pieces) != 1:
        raise ExpressionSyntaxError("expected a constant expression", text, 0)
    return constant_value(fn.pieces[0].body)
