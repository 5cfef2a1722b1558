# ucdmt/pipelines/stages/train.py

from __future__ import annotations
import json
from pathlib import Path
from typing import Any, Dict, Optional

from ucdmt.core.config import load_config, validate_config, apply_overrides
from ucdmt.data.io import load_manifest, write_json
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import register
from ucdmt.schemas.config_schemas import TrainConfig
from ucdmt.schemas.pipeline_schemas import PipelineRun
from ucdmt.training.checkpoint import load_checkpoint
from ucdmt.training.trainer import FINAL_CHECKPOINT, LAST_CHECKPOINT, run_training

EFFECTIVE_CONFIG_NAME = "config.json"


def resolve_train_config(
    params: Dict[str, Any],
    seed_override: Optional[int] = None,
) -> TrainConfig:
    """
    TrainConfig efectivo de una etapa: archivo 'config' (o 'train_config'
    en línea) más los interruptores 'disen_off' y 'gan_mode'.
    """
    overrides = {
        "weights/disen_off": True if params.get("disen_off") else None,
        "weights/gan_mode": params.get("gan_mode"),
        "epochs": params.get("epochs"),
    }
    inline = params.get("train_config")
    if inline is not None:
        raw = apply_overrides(json.loads(json.dumps(inline)), overrides)
        return validate_config(raw, seed_override=seed_override)
    return load_config(params.get("config"), seed_override=seed_override, overrides=overrides)


@register("train")
class TrainStage(BaseStage):
    """
    Entrena Enc/Dec/Dis sobre la partición train_translator y publica
    'checkpoint' y 'run_dir'.

    Parámetros: config | train_config, data, out, disen_off, gan_mode,
    resume, max_steps.
    """

    def execute(self, run: PipelineRun) -> PipelineRun:
        data_dir = self.require(run, "data_dir", "data")
        out_dir = Path(self.param("out") or self.workdir(run) / "train")

        config = resolve_train_config(self.params, seed_override=self.ctx.get("seed_override"))
        manifest = load_manifest(data_dir)

        state = None
        resume = self.param("resume")
        if resume:
            state = load_checkpoint(resume)
            # el checkpoint fija la arquitectura; se conserva su configuración
            config = state.config
            self.logger.info(f"Reanudando desde {resume} en el paso {state.step}.")

        write_json(out_dir / EFFECTIVE_CONFIG_NAME, config.model_dump(mode="json"))
        state, _ = run_training(
            config,
            manifest,
            out_dir=out_dir,
            state=state,
            max_steps=self.param("max_steps"),
            workers=self.ctx.get("workers", 1),
        )

        completed = state.epoch >= config.epochs
        checkpoint = out_dir / (FINAL_CHECKPOINT if completed else LAST_CHECKPOINT)
        run.artifacts["checkpoint"] = str(checkpoint)
        run.artifacts["run_dir"] = str(out_dir)
        run.artifacts["train_config"] = config.model_dump(mode="json")
        return run
