# ucdmt/pipelines/stages/translate.py

from __future__ import annotations
from pathlib import Path
from typing import List

from ucdmt.data.io import load_manifest
from ucdmt.inference.translator import complementary_modalities, translate_volume
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import register
from ucdmt.schemas.enums import Modality
from ucdmt.schemas.pipeline_schemas import PipelineRun
from ucdmt.training.checkpoint import load_bundle

ALL_TARGETS = "all"


@register("translate")
class TranslateStage(BaseStage):
    """
    Traduce los cortes de un sujeto de 'from' a 'to' ('all' = las M−1
    modalidades complementarias) y publica 'translations'.

    Parámetros: checkpoint, input, subject, from, to, out, grid.
    """

    def execute(self, run: PipelineRun) -> PipelineRun:
        checkpoint = self.require(run, "checkpoint")
        data_dir = self.require(run, "data_dir", "input")
        subject = self.require(run, "subject")
        source = Modality(self.require(run, "from"))
        target = self.param("to", ALL_TARGETS)
        out_dir = Path(self.param("out") or self.workdir(run) / "translations")
        with_grid = bool(self.param("grid", False))

        bundle, checkpoint_hash = load_bundle(checkpoint)
        manifest = load_manifest(data_dir)
        M = bundle.config.num_modalities

        targets = complementary_modalities(source, M) if target == ALL_TARGETS else [Modality(target)]
        outputs: List[str] = []
        for m_y in targets:
            grid_path = out_dir / subject / f"{source.value}_to_{m_y.value}.png" if with_grid else None
            path = translate_volume(
                bundle, manifest, subject, source, m_y, out_dir,
                checkpoint_hash=checkpoint_hash, grid_path=grid_path,
            )
            outputs.append(str(path))

        run.artifacts["translations"] = outputs
        return run
