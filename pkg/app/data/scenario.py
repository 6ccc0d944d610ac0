"""Archivo de escenario: ecuación, historia, análisis y salida (JSON validado con pydantic)."""
from pathlib import Path
from typing import Annotated, List, Optional, Tuple, Union
import hashlib
import json
import logging

from pydantic import BaseModel, BeforeValidator, ConfigDict, ValidationError, field_validator, model_validator

from app.config import settings
from app.core.criteria import Criterion, OscillationStrategy, Witness
from app.core.equation import EquationSpec, HistorySpec
from app.core.errors import ScenarioError
from app.core.expressions import parse, parse_constant
from app.core.interval_oscillation import Partition, partition_family

logger = logging.getLogger(__name__)

PRESETS_DIR = Path(__file__).parent / "presets"


def _source(value: Union[float, int, str]) -> str:
    """Fuente de coeficiente: los números se guardan con repr para que el hash sea estable."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a coefficient")
    if isinstance(value, (int, float)):
        return repr(float(value))
    parse(value)
    return value


def _number(value: Union[float, int, str]) -> float:
    if isinstance(value, bool):
        raise ValueError("boolean is not a number")
    return parse_constant(value)


# Fuente que parsea y número que acepta expresiones constantes ("3*pi")
Source = Annotated[str, BeforeValidator(_source)]
Number = Annotated[float, BeforeValidator(_number)]


def _ordered(pair: Optional[Tuple[float, float]], label: str) -> Optional[Tuple[float, float]]:
    if pair is None:
        return None
    a, b = pair
    if not a < b:
        raise ValueError(f"{label} must satisfy a < b, got [{a!r}, {b!r}]")
    return pair


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TermConfig(_Block):
    r: Source
    alpha: Source = "t"


class EquationConfig(_Block):
    p: Source = "1"
    q: Source = "0"
    f: Source = "0"
    t0: Number = 0.0
    terms: List[TermConfig] = []

    def to_spec(self) -> EquationSpec:
        return EquationSpec.build(
            p=self.p, q=self.q, f=self.f, terms=[(term.r, term.alpha) for term in self.terms], t0=self.t0
        )


class HistoryConfig(_Block):
    t1: Number = 0.0
    theta: Source = "0"
    zeta: Number = 0.0

    def to_spec(self) -> HistorySpec:
        return HistorySpec.build(t1=self.t1, theta=self.theta, zeta=self.zeta)


class WitnessConfig(_Block):
    phi: Source
    psi: Optional[Source] = None
    dpsi: Optional[Source] = None

    def to_witness(self) -> Witness:
        return Witness.build(self.phi, self.psi, self.dpsi)


class PartitionsConfig(_Block):
    """Familia t_i + period * l, l = 0..count-1."""
    base: Tuple[Number, Number, Number, Number]
    period: Number
    count: int = 1

    @model_validator(mode="after")
    def _check(self) -> "PartitionsConfig":
        t1, t2, t3, t4 = self.base
        if not (t1 < t2 <= t3 < t4):
            raise ValueError(f"partition must satisfy t1 < t2 <= t3 < t4, got {list(self.base)}")
        if self.period <= 0 or self.count < 1:
            raise ValueError("period must be positive and count at least 1")
        return self

    def to_partitions(self) -> List[Partition]:
        return partition_family(self.base, self.period, self.count)


class CrossCheckConfig(_Block):
    histories: int = settings.CROSS_CHECK_HISTORIES
    bin_width: Number

    @model_validator(mode="after")
    def _check(self) -> "CrossCheckConfig":
        if self.histories < 1 or self.bin_width <= 0:
            raise ValueError("cross_check needs histories >= 1 and a positive bin_width")
        return self


class IntervalOscConfig(_Block):
    p: Source = "1"
    r: Source
    interval: Tuple[Number, Number]

    @field_validator("interval")
    @classmethod
    def _interval(cls, value):
        return _ordered(value, "interval")


class WongConfig(_Block):
    d: Source = "1"
    r: Source
    g: Source
    window: Tuple[Number, Number]

    @field_validator("window")
    @classmethod
    def _window(cls, value):
        return _ordered(value, "wong.window")


class AnalysisConfig(_Block):
    horizon: Optional[Number] = None
    tol: Optional[Number] = None
    window: Optional[Tuple[Number, Number]] = None
    criterion: Optional[Criterion] = None
    comparison: Optional[List[Source]] = None
    witness: Optional[WitnessConfig] = None
    strategy: OscillationStrategy = OscillationStrategy.INTERVAL_PARTITIONS
    partitions: Optional[PartitionsConfig] = None
    eps0: Optional[Number] = None
    eps_count: Optional[int] = None
    scan_points: Optional[int] = None
    repetitions: Optional[int] = None
    min_len: Optional[Number] = None
    search_histories: Optional[int] = None
    cross_check: Optional[CrossCheckConfig] = None
    interval_osc: Optional[IntervalOscConfig] = None
    wong: Optional[WongConfig] = None

    @field_validator("window")
    @classmethod
    def _window(cls, value):
        return _ordered(value, "window")

    @model_validator(mode="after")
    def _positive(self) -> "AnalysisConfig":
        for name in ("tol", "eps0", "min_len"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        for name in ("eps_count", "scan_points", "repetitions", "search_histories"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be at least 1, got {value!r}")
        return self


class OutputConfig(_Block):
    dir: Optional[str] = None
    trajectory_csv: bool = True
    zeros_json: bool = True
    report_json: bool = True


class ScenarioConfig(_Block):
    """Escenario completo; todo número acepta expresiones constantes ("3*pi")."""
    name: str = "scenario"
    seed: int = settings.DEFAULT_SEED
    equation: EquationConfig
    history: HistoryConfig = HistoryConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _horizon_after_t1(self) -> "ScenarioConfig":
        horizon = self.analysis.horizon
        if horizon is not None and horizon < self.history.t1:
            raise ValueError(f"horizon {horizon!r} is before t1 {self.history.t1!r}")
        return self

    @property
    def window(self) -> Tuple[float, float]:
        """Ventana de análisis; por defecto [t1, horizon]."""
        if self.analysis.window is not None:
            return self.analysis.window
        horizon = self.analysis.horizon
        if horizon is None or horizon <= self.history.t1:
            raise ScenarioError("analysis.window or a horizon beyond t1 is required")
        return (self.history.t1, horizon)

    def resolved(self) -> dict:
        """Configuración resuelta, tal como se embebe en los reportes."""
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        """SHA256 determinístico de la configuración resuelta."""
        content = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(content.encode("utf-8")).hexdigest()

    def with_overrides(
        self,
        horizon: Optional[float] = None,
        tol: Optional[float] = None,
        seed: Optional[int] = None,
        out_dir: Optional[str] = None,
        criterion: Optional[str] = None,
    ) -> "ScenarioConfig":
        """
        Aplica las opciones de línea de comandos y vuelve a validar.

        Raises:
            ScenarioError: si el resultado no es un escenario válido
        """
        data = self.resolved()
        if horizon is not None:
            data["analysis"]["horizon"] = horizon
        if tol is not None:
            data["analysis"]["tol"] = tol
        if criterion is not None:
            data["analysis"]["criterion"] = criterion
        if seed is not None:
            data["seed"] = seed
        if out_dir is not None:
            data["output"]["dir"] = out_dir
        return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """
    Raises:
        ScenarioError: si la validación falla
    """
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from None


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """
    Carga y valida un escenario desde un archivo JSON.

    Raises:
        ScenarioError: archivo ausente, JSON inválido o esquema inválido
    """
    file_path = Path(path)
    if not file_path.exists():
        raise ScenarioError(f"scenario file not found: {file_path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {file_path}: {exc}") from None
    scenario = scenario_from_dict(data)
    logger.info(f"loaded scenario '{scenario.name}' from {file_path}")
    return scenario


def available_presets() -> List[str]:
    return sorted(path.stem for path in PRESETS_DIR.glob("*.json"))


def load_preset(name: str) -> ScenarioConfig:
    """
    Raises:
        ScenarioError: preset desconocido
    """
    path = PRESETS_DIR / f"{name}.json"
    if not path.exists():
        raise ScenarioError(f"unknown preset '{name}'; available: {', '.join(available_presets())}")
    return load_scenario(path)
