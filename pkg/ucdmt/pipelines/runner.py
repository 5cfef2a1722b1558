# ucdmt/pipelines/runner.py

from __future__ import annotations
import logging
from typing import Any, Dict, Optional

import yaml

from ucdmt.core.errors import ConfigError
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import get_stage
from ucdmt.pipelines.utils.stage_helpers import add_process_log_entry, stage_timer
from ucdmt.schemas.enums import StageStatus
from ucdmt.schemas.pipeline_schemas import PipelineRun

logger = logging.getLogger("ucdmt.pipelines")


def load_pipeline_config(pipeline_config_path: str) -> Dict[str, Any]:
    try:
        with open(pipeline_config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError("<pipeline>", f"no se pudo cargar '{pipeline_config_path}': {e}") from e
    if not isinstance(config, dict) or not isinstance(config.get("stages", []), list):
        raise ConfigError("stages", "se esperaba una lista de etapas")
    return config


def run(
    pipeline_config_path: str,
    ctx: Optional[Dict[str, Any]] = None,
    pipeline_run: Optional[PipelineRun] = None,
) -> PipelineRun:
    """
    Orquesta la ejecución del pipeline declarado en el YAML: cada etapa se
    busca en el registro por nombre y recibe la ejecución con los artefactos
    de las anteriores. Si una etapa falla, la ejecución queda FATAL y las
    etapas restantes se marcan SKIPPED.
    """
    config = load_pipeline_config(pipeline_config_path)

    ctx = dict(ctx or {})
    for key in ("workdir", "run_name"):
        if key in config and key not in ctx:
            ctx[key] = config[key]

    stages = config.get("stages", [])
    pipeline_run = pipeline_run or PipelineRun()
    pipeline_run.status = StageStatus.RUNNING
    logger.info(f"--- Iniciando ejecución del pipeline {pipeline_run.run_id} ({len(stages)} etapas) ---")

    for i, stage_config in enumerate(stages):
        stage_name = stage_config.get("name", f"<etapa {i}>")

        if pipeline_run.status == StageStatus.FATAL:
            add_process_log_entry(pipeline_run, stage_name, StageStatus.SKIPPED, "Omitida por un fallo anterior.")
            pipeline_run.status = StageStatus.FATAL
            continue

        with stage_timer() as elapsed:
            try:
                stage_class = get_stage(stage_name)
                stage_instance: BaseStage = stage_class(stage_name, stage_config.get("params", {}) or {}, ctx)

                logger.info(f"Ejecutando etapa {i + 1}/{len(stages)}: '{stage_name}'.")
                pipeline_run = stage_instance.execute(pipeline_run)
                failure = None
            except Exception as e:
                logger.error(f"Error durante la etapa '{stage_name}': {e}", exc_info=True)
                failure = e

        if failure is None:
            add_process_log_entry(pipeline_run, stage_name, StageStatus.SUCCESS, "Etapa completada.", elapsed[0])
        else:
            add_process_log_entry(
                pipeline_run, stage_name, StageStatus.FATAL,
                f"Error fatal no manejado en la etapa '{stage_name}': {failure}", elapsed[0],
            )

    logger.info(f"--- Pipeline {pipeline_run.run_id} finalizado: {pipeline_run.status.value} ---")
    return pipeline_run
