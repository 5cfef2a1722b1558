# ucdmt/pipelines/stages/ablation.py

from __future__ import annotations
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from ucdmt.data.dataset import build_paired_index
from ucdmt.data.io import load_manifest, write_json
from ucdmt.metrics.evaluation import evaluate_dataset
from ucdmt.metrics.inception import train_modality_classifier
from ucdmt.pipelines.abstractions import BaseStage
from ucdmt.pipelines.registry import register
from ucdmt.pipelines.stages.train import resolve_train_config
from ucdmt.schemas.enums import Split
from ucdmt.schemas.pipeline_schemas import PipelineRun
from ucdmt.training.trainer import run_training

ABLATION_REPORT_NAME = "ablation.json"
# nombre de la variante -> disen_off
VARIANTS = {"with_disen": False, "without_disen": True}
SSIM_TOLERANCE = 0.01


def summarize_ablation(results: Dict[str, List[Dict[str, float]]], ssim_tolerance: float = SSIM_TOLERANCE) -> Dict[str, Any]:
    """
    Compara ambas variantes sobre todas las semillas: la distancia de
    desenredo media debe bajar con el término activo y el SSIM cruzado medio
    no puede empeorar más de `ssim_tolerance`.
    """
    means = {
        name: {
            "disen_distance": float(np.mean([r["disen_distance"] for r in runs])),
            "ssim": float(np.mean([r["ssim"] for r in runs])),
        }
        for name, runs in results.items()
    }
    with_term, without_term = means["with_disen"], means["without_disen"]
    return {
        "runs": results,
        "means": means,
        "disen_distance_lower": with_term["disen_distance"] < without_term["disen_distance"],
        "ssim_not_worse": with_term["ssim"] >= without_term["ssim"] - ssim_tolerance,
    }


@register("ablation")
class AblationStage(BaseStage):
    """
    Entrena con y sin el término de desenredo para cada semilla, evalúa
    sobre la partición de prueba y publica 'ablation_report'.

    Parámetros: seeds, config | train_config, data, out, epochs.
    """

    def execute(self, run: PipelineRun) -> PipelineRun:
        data_dir = self.require(run, "data_dir", "data")
        seeds = self.param("seeds", [7, 8, 9])
        out_dir = Path(self.param("out") or self.workdir(run) / "ablation")
        manifest = load_manifest(data_dir)

        base_config = resolve_train_config(self.params)
        # un solo clasificador de IS para que las variantes sean comparables
        classifier = train_modality_classifier(
            build_paired_index(manifest.select(Split.TRAIN_TRANSLATOR)), base_config.model
        )

        results: Dict[str, List[Dict[str, float]]] = {name: [] for name in VARIANTS}
        for seed in seeds:
            for name, disen_off in VARIANTS.items():
                config = resolve_train_config({**self.params, "disen_off": disen_off}, seed_override=seed)
                run_dir = out_dir / name / f"seed_{seed}"
                self.logger.info(f"Ablación: variante '{name}', semilla {seed}.")

                state, _ = run_training(config, manifest, out_dir=run_dir, workers=self.ctx.get("workers", 1))
                report = evaluate_dataset(
                    state.bundle, manifest, Split.TEST, run_dir / "report.json",
                    classifier=classifier, config_echo=config.model_dump(mode="json"),
                )
                results[name].append({
                    "seed": seed,
                    "disen_distance": report.diagnostics.disen_distance,
                    "ssim": report.aggregate.ssim.mean,
                })

        summary = summarize_ablation(results)
        write_json(out_dir / ABLATION_REPORT_NAME, summary)
        self.logger.info(
            f"Ablación: distancia de desenredo {summary['means']['with_disen']['disen_distance']:.4f} (con término) vs "
            f"{summary['means']['without_disen']['disen_distance']:.4f} (sin término)."
        )

        run.artifacts["ablation_report"] = str(out_dir / ABLATION_REPORT_NAME)
        run.artifacts["ablation"] = {k: summary[k] for k in ("means", "disen_distance_lower", "ssim_not_worse")}
        return run
