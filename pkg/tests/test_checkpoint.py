# tests/test_checkpoint.py

import numpy as np
import pytest
import torch

from ucdmt.core.errors import CorruptCheckpointError, IoFailureError
from ucdmt.data.dataset import build_paired_index
from ucdmt.data.sampling import sample_training_batch
from ucdmt.inference.translator import TranslationRequest, translate
from ucdmt.schemas.models import ModalityCode
from ucdmt.training.checkpoint import MAGIC, load_bundle, load_checkpoint, save_checkpoint
from ucdmt.training.trainer import train_discriminator_step, train_generator_step


@pytest.fixture
def trained_state(tiny_state, phantom_manifest):
    index = build_paired_index(phantom_manifest)
    for _ in range(2):
        batch = sample_training_batch(index, 4, tiny_state.rng)
        train_discriminator_step(tiny_state, batch)
        train_generator_step(tiny_state, batch)
        tiny_state.step += 1
    return tiny_state


def test_round_trip_is_lossless(trained_state, tmp_path):
    path = save_checkpoint(trained_state, tmp_path / "c.ucdmt")
    loaded = load_checkpoint(path)

    original, restored = trained_state.bundle.named_tensors(), loaded.bundle.named_tensors()
    assert original.keys() == restored.keys()
    assert all(torch.equal(original[k], restored[k]) for k in original)

    for a, b in ((trained_state.opt_gen, loaded.opt_gen), (trained_state.opt_dis, loaded.opt_dis)):
        sa, sb = a.state_dict()["state"], b.state_dict()["state"]
        assert sa.keys() == sb.keys()
        for pid in sa:
            for key in sa[pid]:
                assert torch.equal(torch.as_tensor(sa[pid][key]), torch.as_tensor(sb[pid][key]))

    assert loaded.step == trained_state.step
    assert loaded.config == trained_state.config
    assert loaded.rng.bit_generator.state == trained_state.rng.bit_generator.state


def test_file_starts_with_magic(trained_state, tmp_path):
    path = save_checkpoint(trained_state, tmp_path / "c.ucdmt")
    assert path.read_bytes().startswith(MAGIC)


def test_wrong_magic(tmp_path):
    path = tmp_path / "bad.ucdmt"
    path.write_bytes(b"NOTUCD" + b"\x00" * 32)
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(path)


def test_truncated_file(trained_state, tmp_path):
    data = save_checkpoint(trained_state, tmp_path / "c.ucdmt").read_bytes()
    truncated = tmp_path / "t.ucdmt"
    truncated.write_bytes(data[: len(data) - 100])
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(truncated)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailureError):
        load_checkpoint(tmp_path / "missing.ucdmt")


def test_translations_identical_after_reload(trained_state, tmp_path):
    path = save_checkpoint(trained_state, tmp_path / "c.ucdmt")
    bundle, digest = load_bundle(path)
    request = TranslationRequest(x=torch.rand(3, 1, 16, 16) * 2 - 1, m_y=ModalityCode.from_index(2))
    assert torch.equal(translate(trained_state.bundle, request), translate(bundle, request))
    assert len(digest) == 64


def test_loading_leaves_global_torch_rng_alone(trained_state, tmp_path):
    path = save_checkpoint(trained_state, tmp_path / "c.ucdmt")
    saved = torch.get_rng_state()
    torch.manual_seed(1234)
    before = torch.get_rng_state()

    loaded = load_checkpoint(path)
    load_bundle(path)
    assert torch.equal(torch.get_rng_state(), before)
    assert torch.equal(loaded.torch_rng_state, saved)
