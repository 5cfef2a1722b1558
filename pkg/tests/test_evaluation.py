# tests/test_evaluation.py

import json

import numpy as np
import pytest
import torch

from conftest import IdentityDecoder, IdentityEncoder
from ucdmt.data.dataset import build_paired_index
from ucdmt.metrics.evaluation import evaluate_dataset, summarize
from ucdmt.metrics.quality import PSNR_CAP_DB
from ucdmt.models.bundle import ModelBundle
from ucdmt.schemas.enums import Split


def uniform_classifier(images):
    return np.full((images.shape[0], 4), 0.25)


@pytest.fixture
def identity_bundle(tiny_model_config):
    return ModelBundle(tiny_model_config, encoder=IdentityEncoder(), decoder=IdentityDecoder())


def test_cross_directions_only_by_default(tiny_state, phantom_manifest):
    report = evaluate_dataset(tiny_state.bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier)
    assert len(report.directions) == 12
    assert "t1→t1" not in report.directions
    assert report.split == "test"


def test_include_self_adds_four_directions(tiny_state, phantom_manifest):
    report = evaluate_dataset(
        tiny_state.bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier, include_self=True
    )
    assert len(report.directions) == 16
    assert {"t1→t1", "t1ce→t1ce", "t2→t2", "flair→flair"} <= set(report.directions)


def test_identity_translator_reproduces_copy_baseline(identity_bundle, phantom_manifest):
    report = evaluate_dataset(
        identity_bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier, include_self=True
    )
    for name in ("t1", "t2"):
        own = report.directions[f"{name}→{name}"]
        assert own.l1.mean == 0.0
        assert own.ssim.mean == pytest.approx(1.0)
        assert own.psnr.mean == PSNR_CAP_DB

    assert report.aggregate.l1.mean == pytest.approx(report.baseline.l1.mean)
    assert report.aggregate.ssim.mean == pytest.approx(report.baseline.ssim.mean)
    assert report.diagnostics.cycle_l1 == 0.0
    assert report.diagnostics.disen_distance == 0.0
    assert report.diagnostics.self_ssim == pytest.approx(1.0)
    assert report.aggregate.is_score.mean == pytest.approx(1.0)


def test_translation_l1_diagnostic_is_unit_scale(tiny_state, phantom_manifest):
    report = evaluate_dataset(tiny_state.bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier)
    assert report.diagnostics.translation_l1 == pytest.approx(report.aggregate.l1.mean / 255.0)


def test_evaluation_is_deterministic(tiny_state, phantom_manifest):
    a = evaluate_dataset(tiny_state.bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier)
    b = evaluate_dataset(tiny_state.bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier)
    assert a.to_json_dict() == b.to_json_dict()


def test_report_file_and_grids(tiny_state, phantom_manifest, tmp_path):
    report_path = tmp_path / "report.json"
    evaluate_dataset(
        tiny_state.bundle, phantom_manifest, Split.TEST, report_path=report_path,
        classifier=uniform_classifier, checkpoint_hash="abc", grid_dir=tmp_path / "grids",
    )
    data = json.loads(report_path.read_text(encoding="utf-8"))
    assert set(data["aggregate"]) == {"l1", "ssim", "psnr", "is", "n"}
    assert data["checkpoint_hash"] == "abc"
    assert data["n_samples"] > 0
    assert len(list((tmp_path / "grids").glob("*_to_*.png"))) == 12


def test_default_classifier_is_trained_when_none_given(tiny_state, phantom_manifest):
    report = evaluate_dataset(tiny_state.bundle, phantom_manifest, Split.TEST)
    assert 1.0 <= report.aggregate.is_score.mean <= 4.0


def test_summarize_mean_and_standard_error():
    summary = summarize([1.0, 2.0, 3.0, 4.0])
    assert summary.mean == 2.5
    assert summary.sem == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
    assert summarize([7.0]).sem == 0.0


class LookupEncoder(torch.nn.Module):
    """Reconoce cada imagen real del índice y devuelve las M modalidades de su corte."""

    def __init__(self, index):
        super().__init__()
        self.lookup = {img.tobytes(): k for k, s in enumerate(index) for img in s.images}
        self.slices = torch.from_numpy(np.stack([s.images for s in index]))

    def forward(self, x):
        rows = [self.lookup[img.numpy().tobytes()] for img in x[:, 0]]
        return self.slices[rows]


class SelectDecoder(torch.nn.Module):
    def forward(self, z, codes):
        return z[torch.arange(z.shape[0]), codes.argmax(dim=1)].unsqueeze(1)


def test_ground_truth_translator_scores_perfectly(tiny_model_config, phantom_manifest):
    index = build_paired_index(phantom_manifest.select(Split.TEST))
    bundle = ModelBundle(tiny_model_config, encoder=LookupEncoder(index), decoder=SelectDecoder())
    report = evaluate_dataset(bundle, phantom_manifest, Split.TEST, classifier=uniform_classifier)

    assert len(report.directions) == 12
    for metrics in report.directions.values():
        assert metrics.l1.mean == 0.0
        assert metrics.ssim.mean == pytest.approx(1.0)
        assert metrics.psnr.mean == PSNR_CAP_DB
    assert report.diagnostics.cycle_l1 == 0.0
    assert report.diagnostics.translation_l1 == 0.0
