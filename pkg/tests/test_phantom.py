# tests/test_phantom.py

import hashlib

import numpy as np
import pytest

from ucdmt.core.errors import IoFailureError
from ucdmt.data.dataset import build_paired_index
from ucdmt.data.io import read_raw_volume, subject_file
from ucdmt.data.phantom import apply_transfer, generate_phantom_dataset, scaled_slice_threshold
from ucdmt.schemas.data_schemas import PhantomSpec
from ucdmt.schemas.enums import Split


def _hashes(root):
    return {
        p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_inversion_transfer_at_midpoint():
    anatomy = np.array([[0.5]])
    assert apply_transfer(anatomy, np.zeros_like(anatomy), 2)[0, 0] == 0.0


def test_transfers_stay_in_range():
    anatomy = np.linspace(0, 1, 11).reshape(1, 11)
    lesion = np.ones_like(anatomy)
    for m in range(4):
        out = apply_transfer(anatomy, lesion, m)
        assert out.min() >= -1.0 and out.max() <= 1.0


def test_desk_spec_counts(tmp_path):
    spec = PhantomSpec(n_subjects=10, image_size=64, slices_per_subject=8, seed=7)
    manifest = generate_phantom_dataset(spec, tmp_path)
    assert len(manifest.subjects) == 10
    assert all(len(s.files) == 4 and s.shape == [64, 64, 8] for s in manifest.subjects)
    assert len(list(tmp_path.rglob("*.raw"))) == 40
    assert manifest.slice_threshold == scaled_slice_threshold(64) == 142
    assert [s.split for s in manifest.subjects].count(Split.TRAIN_TRANSLATOR) == 7


def test_regeneration_is_byte_identical(tmp_path, phantom_spec):
    generate_phantom_dataset(phantom_spec, tmp_path / "a")
    generate_phantom_dataset(phantom_spec, tmp_path / "b")
    assert _hashes(tmp_path / "a") == _hashes(tmp_path / "b")


def test_different_seed_changes_data(tmp_path, phantom_spec):
    generate_phantom_dataset(phantom_spec, tmp_path / "a")
    generate_phantom_dataset(phantom_spec.model_copy(update={"seed": 8}), tmp_path / "b")
    assert _hashes(tmp_path / "a") != _hashes(tmp_path / "b")


def test_every_pixel_in_range(phantom_manifest):
    index = build_paired_index(phantom_manifest)
    assert index
    for s in index:
        assert s.images.min() >= -1.0 and s.images.max() <= 1.0
        assert s.brain_pixel_count >= phantom_manifest.slice_threshold


def test_unwritable_output(tmp_path, phantom_spec):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailureError):
        generate_phantom_dataset(phantom_spec, blocker / "sub")


def test_reference_background_is_zero_on_disk(phantom_manifest):
    record = phantom_manifest.subjects[0]
    t1 = read_raw_volume(subject_file(phantom_manifest, record, "t1"), record.shape)
    assert t1.min() == 0.0
    kept = {s.slice_index: s for s in build_paired_index(phantom_manifest) if s.subject_id == record.subject_id}
    for k, s in kept.items():
        # brain = cabeza: el T1 escalado vale -1 exactamente donde el crudo es 0
        assert s.brain_pixel_count == int(np.count_nonzero(t1[:, :, k]))
        assert s.brain_pixel_count == int(np.count_nonzero(s.images[0] > -1.0))
