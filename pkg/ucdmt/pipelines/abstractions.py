# ucdmt/pipelines/abstractions.py

from __future__ import annotations
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Optional

from ucdmt.core.errors import StageError
from ucdmt.schemas.pipeline_schemas import PipelineRun

logger = logging.getLogger("ucdmt.pipelines")


class BaseStage(ABC):
    """Clase base abstracta para todas las etapas del pipeline."""

    def __init__(self, stage_name: str, params: Dict[str, Any], ctx: Dict[str, Any]):
        self.stage_name = stage_name
        self.params = params
        self.ctx = ctx
        self.logger = logger

    @abstractmethod
    def execute(self, run: PipelineRun) -> PipelineRun:
        """
        Ejecuta la etapa y devuelve la ejecución con sus artefactos
        actualizados. Un fallo se señala lanzando una excepción; el runner
        marca entonces la ejecución como FATAL.
        """
        raise NotImplementedError

    def param(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def require(self, run: PipelineRun, key: str, param_name: Optional[str] = None) -> Any:
        """
        Busca un valor primero en los parámetros de la etapa y luego en los
        artefactos publicados por etapas anteriores.
        """
        value = self.params.get(param_name or key)
        if value is None:
            value = run.artifacts.get(key)
        if value is None:
            raise StageError(
                f"La etapa '{self.stage_name}' necesita '{param_name or key}' y ninguna etapa anterior lo publicó."
            )
        return value

    def workdir(self, run: PipelineRun) -> Path:
        """Directorio base de la ejecución (parámetro 'workdir' del contexto)."""
        return Path(self.ctx.get("workdir", "runs")) / str(self.ctx.get("run_name", run.run_id))
