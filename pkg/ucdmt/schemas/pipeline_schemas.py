# ucdmt/schemas/pipeline_schemas.py

from __future__ import annotations
import uuid
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from .enums import StageStatus


def _now() -> datetime:
    return datetime.now(timezone.utc)


class ProcessLogEntry(BaseModel):
    timestamp: datetime = Field(default_factory=_now)
    stage_name: str
    status: StageStatus
    comment: Optional[str] = None
    duration_ms: Optional[int] = None


class PipelineRun(BaseModel):
    """
    Estado de una ejecución del pipeline. Es el objeto que se pasa entre
    etapas: cada una lee los artefactos de las anteriores y añade los suyos.
    """
    # --- Identificadores ---
    run_id: uuid.UUID = Field(default_factory=uuid.uuid4)

    # --- Estado ---
    status: StageStatus = StageStatus.PENDING
    status_comment: Optional[str] = None

    # --- Artefactos ---
    # Rutas y resultados publicados por las etapas ('data_dir', 'checkpoint', 'report', ...)
    artifacts: Dict[str, Any] = Field(default_factory=dict)

    # --- Historial ---
    process_log: List[ProcessLogEntry] = Field(default_factory=list)
