# ucdmt/pipelines/stages/acceptance.py

from __future__ import annotations
import json
from pathlib import Path
from typing import Any, Dict, Optional

from ucdmt.core.errors import StageError
from ucdmt.data.io import write_json
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import register
from ucdmt.schemas.pipeline_schemas import PipelineRun
from ucdmt.schemas.report_schemas import MetricsReport

ACCEPTANCE_NAME = "acceptance.json"
MIN_SSIM_GAIN = 0.10
MIN_SELF_SSIM = 0.90


def check_report(
    report: MetricsReport,
    min_ssim_gain: float = MIN_SSIM_GAIN,
    min_self_ssim: float = MIN_SELF_SSIM,
    ablation: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Umbrales de escala de escritorio sobre un reporte de evaluación."""
    gain = report.aggregate.ssim.mean - report.baseline.ssim.mean
    diagnostics = report.diagnostics
    checks = {
        "ssim_gain": {"value": gain, "threshold": min_ssim_gain, "passed": gain >= min_ssim_gain},
        "self_ssim": {
            "value": diagnostics.self_ssim,
            "threshold": min_self_ssim,
            "passed": diagnostics.self_ssim is not None and diagnostics.self_ssim >= min_self_ssim,
        },
        "cycle_below_translation": {
            "value": [diagnostics.cycle_l1, diagnostics.translation_l1],
            "passed": diagnostics.cycle_l1 < diagnostics.translation_l1,
        },
    }
    if ablation is not None:
        checks["ablation"] = {
            "value": ablation.get("means"),
            "passed": bool(ablation.get("disen_distance_lower")) and bool(ablation.get("ssim_not_worse")),
        }
    return {"passed": all(c["passed"] for c in checks.values()), "checks": checks}


@register("acceptance")
class AcceptanceStage(BaseStage):
    """
    Lee el reporte de evaluación (y el de ablación, si existe) y registra
    PASS/FAIL. Con 'strict: true' un FAIL detiene el pipeline.

    Parámetros: report, ablation_report, min_ssim_gain, min_self_ssim, strict, out.
    """

    def execute(self, run: PipelineRun) -> PipelineRun:
        report_path = self.require(run, "report")
        with open(report_path, "r", encoding="utf-8") as f:
            report = MetricsReport.model_validate(json.load(f))

        ablation = None
        ablation_path = self.param("ablation_report") or run.artifacts.get("ablation_report")
        if ablation_path:
            with open(ablation_path, "r", encoding="utf-8") as f:
                ablation = json.load(f)

        verdict = check_report(
            report,
            min_ssim_gain=self.param("min_ssim_gain", MIN_SSIM_GAIN),
            min_self_ssim=self.param("min_self_ssim", MIN_SELF_SSIM),
            ablation=ablation,
        )
        out_path = Path(self.param("out") or Path(report_path).parent / ACCEPTANCE_NAME)
        write_json(out_path, verdict)

        label = "PASS" if verdict["passed"] else "FAIL"
        for name, check in verdict["checks"].items():
            self.logger.info(f"Aceptación '{name}': {'PASS' if check['passed'] else 'FAIL'} ({check['value']}).")
        self.logger.info(f"Aceptación global: {label}.")

        run.artifacts["acceptance"] = {"passed": verdict["passed"], "path": str(out_path)}
        if self.param("strict", False) and not verdict["passed"]:
            raise StageError(f"Criterios de aceptación no superados (ver {out_path}).")
        return run
