# ucdmt/pipelines/utils/stage_helpers.py

from __future__ import annotations
import logging
import time
from contextlib import contextmanager
from typing import Iterator, List, Optional

from ucdmt.schemas.enums import StageStatus
from ucdmt.schemas.pipeline_schemas import PipelineRun, ProcessLogEntry

logger = logging.getLogger("ucdmt.pipelines")


def add_process_log_entry(
    run: PipelineRun,
    stage_name: str,
    status: StageStatus,
    comment: str,
    duration_ms: Optional[int] = None,
) -> None:
    """
    Función centralizada para actualizar el estado de la ejecución y añadir
    una entrada a su 'process_log'.
    """
    run.process_log.append(
        ProcessLogEntry(stage_name=stage_name, status=status, comment=comment, duration_ms=duration_ms)
    )
    run.status = status
    run.status_comment = f"[{stage_name}]: {status.value}"

    log_message = f"Ejecución {run.run_id}: {status.value} en '{stage_name}'. Detalle: {comment}"
    if status == StageStatus.FATAL:
        logger.error(log_message)
    else:
        logger.info(log_message)


@contextmanager
def stage_timer() -> Iterator[List[int]]:
    """Mide la duración de una etapa en milisegundos (disponible en holder[0] al salir)."""
    holder = [0]
    start = time.perf_counter()
    try:
        yield holder
    finally:
        holder[0] = int((time.perf_counter() - start) * 1000)
