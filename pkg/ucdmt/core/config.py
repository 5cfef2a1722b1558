# ucdmt/core/config.py

from __future__ import annotations
import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dpath import new as dpath_new
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ucdmt.core.errors import ConfigError
from ucdmt.schemas.config_schemas import TrainConfig


class Settings(BaseSettings):
    """
    Define la configuración del proceso, cargando valores desde variables
    de entorno y un archivo .env.
    """
    # Semilla global: si está definida, sustituye a la semilla del TrainConfig
    UCDMT_SEED: Optional[int] = Field(None)

    # Hilos intra-op de torch; 1 garantiza determinismo bit a bit
    UCDMT_WORKERS: int = Field(1, ge=1)
    UCDMT_LOG_LEVEL: str = Field("INFO")

    # Pipeline YAML por defecto para el subcomando 'pipeline'
    UCDMT_PIPELINE_CONFIG: str = Field("config/pipeline.yml")

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore"
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Retorna una instancia cacheada de la configuración.
    """
    return Settings()


def _format_loc(loc: tuple) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def validate_config(raw: Dict[str, Any], seed_override: Optional[int] = None) -> TrainConfig:
    """
    Valida un diccionario de configuración ya parseado. Las claves ausentes
    toman los valores por defecto; las desconocidas se rechazan.
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "la configuración debe ser un objeto JSON")

    try:
        config = TrainConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(_format_loc(first["loc"]), first["msg"]) from e

    if seed_override is not None:
        config = config.model_copy(update={"seed": seed_override})
    return config


def apply_overrides(raw: Dict[str, Any], overrides: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """
    Aplica sobre el diccionario crudo los valores indicados por ruta
    ('weights/disen_off' -> True), creando los niveles que falten.
    Los valores None se ignoran.
    """
    for path, value in (overrides or {}).items():
        if value is None:
            continue
        dpath_new(raw, path, value)
    return raw


def load_config(
    path: Optional[Union[str, Path]],
    seed_override: Optional[int] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> TrainConfig:
    """
    Carga un TrainConfig desde un archivo JSON (UTF-8).

    `seed_override` corresponde a la variable de entorno UCDMT_SEED y, si se
    indica, sustituye a la semilla declarada en el archivo.
    """
    if path is None:
        return validate_config(apply_overrides({}, overrides), seed_override=seed_override)

    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError("<file>", f"archivo de configuración no encontrado: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"JSON inválido en {path}: {e}") from e

    if isinstance(raw, dict):
        raw = apply_overrides(raw, overrides)
    return validate_config(raw, seed_override=seed_override)
