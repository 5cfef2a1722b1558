# tests/test_acceptance.py
"""
Experimentos de aceptación a escala de escritorio con el preset config/desk.json.
Tardan de 20 a 90 minutos en CPU: `pytest -m slow`.
"""

from pathlib import Path

import pytest

from ucdmt.core.config import load_config
from ucdmt.data.phantom import generate_phantom_dataset
from ucdmt.metrics.evaluation import evaluate_dataset
from ucdmt.pipelines.stages.ablation import AblationStage
from ucdmt.pipelines.stages.acceptance import MIN_SELF_SSIM, MIN_SSIM_GAIN, check_report
from ucdmt.schemas.data_schemas import PhantomSpec
from ucdmt.schemas.enums import Split
from ucdmt.schemas.pipeline_schemas import PipelineRun
from ucdmt.training.trainer import run_training

pytestmark = pytest.mark.slow

DESK_CONFIG = Path(__file__).resolve().parents[1] / "config" / "desk.json"


@pytest.fixture(scope="module")
def desk_phantom(tmp_path_factory):
    # 14 sujetos con train_fraction 0.7 -> 10 de entrenamiento y 4 de prueba
    spec = PhantomSpec(n_subjects=14, image_size=64, slices_per_subject=8, seed=7)
    return generate_phantom_dataset(spec, tmp_path_factory.mktemp("desk_phantom"))


@pytest.fixture(scope="module")
def desk_report(desk_phantom, tmp_path_factory):
    config = load_config(DESK_CONFIG)
    assert (config.batch_size, config.epochs, config.seed) == (16, 60, 7)
    state, _ = run_training(config, desk_phantom, out_dir=tmp_path_factory.mktemp("desk_run"))
    return evaluate_dataset(state.bundle, desk_phantom, Split.TEST, include_self=True)


def test_desk_preset_beats_copy_baseline(desk_report):
    gain = desk_report.aggregate.ssim.mean - desk_report.baseline.ssim.mean
    assert gain >= MIN_SSIM_GAIN
    assert desk_report.diagnostics.self_ssim >= MIN_SELF_SSIM


def test_cycle_constraint_binds_on_trained_model(desk_report):
    assert desk_report.diagnostics.cycle_l1 < desk_report.diagnostics.translation_l1


def test_desk_report_passes_acceptance(desk_report):
    verdict = check_report(desk_report)
    assert verdict["passed"], verdict["checks"]


def test_disentanglement_term_lowers_latent_distance(desk_phantom, tmp_path):
    stage = AblationStage("ablation", {"config": str(DESK_CONFIG), "seeds": [7, 8, 9], "out": str(tmp_path)}, {})
    run = stage.execute(PipelineRun(artifacts={"data_dir": desk_phantom.root_path}))
    summary = run.artifacts["ablation"]
    assert summary["disen_distance_lower"], summary["means"]
    assert summary["ssim_not_worse"], summary["means"]
