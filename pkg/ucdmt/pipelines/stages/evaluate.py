# ucdmt/pipelines/stages/evaluate.py

from __future__ import annotations
from pathlib import Path

from ucdmt.data.io import load_manifest
from ucdmt.metrics.evaluation import evaluate_dataset
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import register
from ucdmt.schemas.enums import Split
from ucdmt.schemas.pipeline_schemas import PipelineRun
from ucdmt.training.checkpoint import load_checkpoint, file_hash


@register("evaluate")
class EvaluateStage(BaseStage):
    """
    Evalúa un checkpoint sobre una partición y publica 'report'
    (ruta del JSON) y 'metrics' (agregado y diagnósticos).

    Parámetros: checkpoint, data, split, report, include_self, grid_dir, is_splits.
    """

    def execute(self, run: PipelineRun) -> PipelineRun:
        checkpoint = self.require(run, "checkpoint")
        data_dir = self.require(run, "data_dir", "data")
        split = Split(self.param("split", Split.TEST.value))
        report_path = Path(self.param("report") or self.workdir(run) / "report.json")

        state = load_checkpoint(checkpoint)
        bundle = state.bundle.eval()
        manifest = load_manifest(data_dir)

        report = evaluate_dataset(
            bundle,
            manifest,
            split,
            report_path,
            include_self=bool(self.param("include_self", False)),
            checkpoint_hash=file_hash(checkpoint),
            grid_dir=self.param("grid_dir"),
            config_echo=state.config.model_dump(mode="json"),
            is_splits=self.param("is_splits", 1),
        )

        run.artifacts["report"] = str(report_path)
        run.artifacts["metrics"] = {
            "aggregate": report.aggregate.model_dump(mode="json", by_alias=True),
            "baseline": report.baseline.model_dump(mode="json", by_alias=True),
            "diagnostics": report.diagnostics.model_dump(mode="json"),
        }
        return run
