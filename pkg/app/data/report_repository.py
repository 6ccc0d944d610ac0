"""Repositorio de reportes basado en archivos CSV y JSON."""
import json
from pathlib import Path
from typing import Any, Optional, Union
import logging
import math

import numpy as np

from app.config import settings
from app.core.integrator import Trajectory
from app.core.verdicts import CriterionReport
from app.data.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """
    Convierte tipos de numpy, tuplas y flotantes no finitos a JSON estándar.

    inf, -inf y nan se escriben como las cadenas "inf", "-inf" y "nan".
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


class ReportRepository:
    """
    Repositorio para trayectorias (CSV), ceros y reportes de criterio (JSON).

    Los JSON embeben la configuración resuelta y su hash SHA256; no se escriben
    timestamps, así que la misma configuración y semilla producen archivos
    idénticos byte a byte.
    """

    def __init__(self, data_dir: Optional[Union[str, Path]] = None):
        self.data_dir = Path(data_dir or settings.OUTPUT_DIR)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _get_file_path(self, name: str, kind: str) -> Path:
        """Obtiene la ruta del archivo <name>.<kind>."""
        return self.data_dir / f"{name}.{kind}"

    def _write_json(self, file_path: Path, data: dict) -> Path:
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(to_jsonable(data), f, indent=2, ensure_ascii=False, allow_nan=False)
            f.write("\n")
        logger.info(f"wrote {file_path}")
        return file_path

    @staticmethod
    def _envelope(scenario: Optional[ScenarioConfig]) -> dict:
        if scenario is None:
            return {"config": None, "config_hash": None}
        return {"config": scenario.resolved(), "config_hash": scenario.config_hash()}

    def save_trajectory(self, name: str, traj: Trajectory) -> Path:
        """
        Guarda la tabla (t, phi, psi) con 17 dígitos significativos.

        Returns:
            Ruta del CSV
        """
        file_path = self._get_file_path(name, "trajectory.csv")
        traj.sample().to_csv(file_path, index=False, float_format="%.17g")
        logger.info(f"wrote {file_path}")
        return file_path

    def save_zeros(self, name: str, traj: Trajectory, scenario: Optional[ScenarioConfig] = None) -> Path:
        data = self._envelope(scenario)
        data.update(traj.zeros_report())
        data["reached"] = traj.reached
        data["max_residual"] = traj.max_residual
        data["residual_ok"] = traj.residual_ok
        return self._write_json(self._get_file_path(name, "zeros.json"), data)

    def save_report(self, name: str, report: CriterionReport, scenario: Optional[ScenarioConfig] = None) -> Path:
        """
        Guarda un CriterionReport como <name>.<criterion>.report.json.

        Returns:
            Ruta del JSON
        """
        data = self._envelope(scenario)
        data.update(report.to_dict())
        return self._write_json(self._get_file_path(name, f"{report.criterion}.report.json"), data)

    def save_result(self, name: str, kind: str, payload: dict, scenario: Optional[ScenarioConfig] = None) -> Path:
        """Guarda un resultado arbitrario como <name>.<kind>.json."""
        data = self._envelope(scenario)
        data.update(payload)
        return self._write_json(self._get_file_path(name, f"{kind}.json"), data)

    def save_bundle(self, bundle_id: str, payload: dict, scenario: Optional[ScenarioConfig] = None) -> Path:
        """Guarda el resultado de un ``reproduce`` completo."""
        return self.save_result(bundle_id, "bundle", {"id": bundle_id, **payload}, scenario)

    def load(self, name: str, kind: str) -> Optional[dict]:
        """
        Carga un JSON guardado.

        Returns:
            Dict con el contenido o None si no existe o está corrupto
        """
        file_path = self._get_file_path(name, kind)
        if not file_path.exists():
            return None
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            logger.warning(f"cannot read {file_path}: {exc}")
            return None
