# ucdmt/pipelines/stages/phantom.py

from __future__ import annotations

from ucdmt.data.phantom import generate_phantom_dataset
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import register
from ucdmt.schemas.data_schemas import PhantomSpec
from ucdmt.schemas.pipeline_schemas import PipelineRun


@register("phantom")
class PhantomStage(BaseStage):
    """
    Genera el dataset sintético multimodal y publica 'data_dir'.

    Parámetros: subjects, size, slices, seed, lesion_probability,
    noise_sigma, train_fraction, out.
    """

    def execute(self, run: PipelineRun) -> PipelineRun:
        spec = PhantomSpec(
            n_subjects=self.param("subjects", 10),
            image_size=self.param("size", 64),
            slices_per_subject=self.param("slices", 8),
            seed=self.param("seed", 7),
            lesion_probability=self.param("lesion_probability", 0.5),
            noise_sigma=self.param("noise_sigma", 0.02),
            train_fraction=self.param("train_fraction", 0.7),
        )
        out_dir = self.param("out") or str(self.workdir(run) / "data")

        manifest = generate_phantom_dataset(spec, out_dir)
        run.artifacts["data_dir"] = str(out_dir)
        run.artifacts["phantom_spec"] = spec.model_dump()
        self.logger.info(f"Etapa '{self.stage_name}': {len(manifest.subjects)} sujetos en {out_dir}.")
        return run
