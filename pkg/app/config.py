"""Configuración de la aplicación."""
from typing import Tuple

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Configuración de fdelab (valores por defecto de los análisis numéricos)."""

    # Integrador (método de pasos)
    INTEGRATOR_TOL: float = 1e-9
    INTEGRATOR_METHOD: str = "DOP853"  # par Runge-Kutta embebido con salida densa
    MACRO_STEP: float = 1.0  # longitud máxima de un macro-intervalo
    MIN_MACRO_STEP: float = 1e-3  # piso cuando el retardo mínimo es muy chico
    DISCONTINUITY_ORDER: int = 3  # orden de propagación de discontinuidades
    BREAKPOINT_SCAN_STEP: float = 1e-2
    ZERO_TOL: float = 1e-10  # se escala por max(1, |phi| máximo)
    RESIDUAL_TOL: float = 1e-6
    ZERO_SAMPLES_PER_STEP: int = 4

    # Expresiones y cuadratura
    QUAD_TOL: float = 1e-10
    QUAD_PANEL_LIMIT: int = 200

    # Grillas de verificación de hipótesis
    GRID_STEP: float = 1e-2
    GRID_SLACK: float = 1e-12
    SIGN_MIN_LENGTH: float = 1.0  # un macro-paso del integrador
    SIGN_REPETITIONS: int = 3
    INTERVAL_MATCH_TOL: float = 1e-6  # tolerancia al contener un intervalo en otro

    # Riccati
    RICCATI_Y_MAX: float = 1e8
    RICCATI_MIN_STEP: float = 1e-10  # un paso aceptado menor, ante una falla, se trata como explosión
    RICCATI_FALLBACK_Y: float = 1e4  # fallo del integrador con |y| mayor se trata como explosión
    SCALAR_COMPARISON_GRID: int = 256

    # Criterios
    CONJUGATE_SCAN_POINTS: int = 64
    EPS0: float = 1.0
    EPS_COUNT: int = 9
    WONG_HAT_PEAKS: Tuple[float, ...] = (0.25, 0.5, 0.75)
    WITNESS_RESIDUAL_TOL: float = 1e-10
    WITNESS_FD_RESIDUAL_TOL: float = 1e-5
    WITNESS_GRID_POINTS: int = 10_000
    WITNESS_SEARCH_HISTORIES: int = 5

    # Reportes
    OUTPUT_DIR: str = "./out"
    CROSS_CHECK_HISTORIES: int = 20
    DEFAULT_SEED: int = 0
    LOG_LEVEL: str = "INFO"

    class Config:
        env_file = ".env"
        case_sensitive = False


settings = Settings()
