# tests/test_training.py

import json

import numpy as np
import pytest
import torch

from conftest import IdentityDecoder, IdentityEncoder
from ucdmt.core.errors import NonFiniteLossError
from ucdmt.data.dataset import build_paired_index
from ucdmt.data.sampling import sample_training_batch
from ucdmt.losses.objectives import cycle_reconstruction_loss
from ucdmt.models.bundle import ModelBundle
from ucdmt.schemas.config_schemas import LossWeights
from ucdmt.schemas.enums import DisenVariant, Split
from ucdmt.schemas.models import one_hot_batch
from ucdmt.training import trainer
from ucdmt.training.checkpoint import file_hash, load_checkpoint
from ucdmt.training.state import ADAM_EPS, TrainState
from ucdmt.training.trainer import (
    ABORT_CHECKPOINT,
    FINAL_CHECKPOINT,
    METRICS_LOG_NAME,
    forward_cycle,
    run_training,
    train_discriminator_step,
    train_generator_step,
)


def _snapshot(module):
    return {k: v.detach().clone() for k, v in module.state_dict().items()}


def _same(a, b):
    return all(torch.equal(a[k], b[k]) for k in a)


@pytest.fixture
def batch(phantom_manifest):
    index = build_paired_index(phantom_manifest.select(Split.TRAIN_TRANSLATOR))
    return sample_training_batch(index, 4, np.random.default_rng(0))


def test_identity_autoencoder_cycle(tiny_model_config):
    bundle = ModelBundle(tiny_model_config, encoder=IdentityEncoder(), decoder=IdentityDecoder())
    x = torch.rand(4, 1, 16, 16) * 2 - 1
    m_x, m_y = one_hot_batch([0, 1, 2, 3], 4), one_hot_batch([1, 1, 3, 3], 4)
    out = forward_cycle(bundle, x, m_x, m_y)
    assert torch.equal(out.x_translated, x) and torch.equal(out.x_cycled, x)
    assert cycle_reconstruction_loss(out.x_cycled, x).item() == 0.0


def test_cycle_recalls_the_same_autoencoder(tiny_state):
    calls = {"enc": 0, "dec": 0}
    bundle = tiny_state.bundle
    bundle.encoder.register_forward_hook(lambda *a: calls.__setitem__("enc", calls["enc"] + 1))
    bundle.decoder.register_forward_hook(lambda *a: calls.__setitem__("dec", calls["dec"] + 1))
    x = torch.rand(2, 1, 16, 16) * 2 - 1
    out = forward_cycle(bundle, x, one_hot_batch([0, 2], 4), one_hot_batch([0, 2], 4))
    assert calls == {"enc": 2, "dec": 2}
    for t in out:
        assert torch.all(torch.isfinite(t))
    assert out.x_translated.abs().max() <= 1 and out.x_cycled.abs().max() <= 1


def test_discriminator_step_leaves_generator_untouched(tiny_state, batch):
    enc, dec = _snapshot(tiny_state.bundle.encoder), _snapshot(tiny_state.bundle.decoder)
    dis = _snapshot(tiny_state.bundle.discriminator)
    train_discriminator_step(tiny_state, batch)
    assert _same(enc, _snapshot(tiny_state.bundle.encoder))
    assert _same(dec, _snapshot(tiny_state.bundle.decoder))
    assert not _same(dis, _snapshot(tiny_state.bundle.discriminator))
    assert all(p.grad is None for p in tiny_state.bundle.generator_parameters())


def test_generator_step_leaves_discriminator_untouched(tiny_state, batch):
    dis = _snapshot(tiny_state.bundle.discriminator)
    enc = _snapshot(tiny_state.bundle.encoder)
    train_generator_step(tiny_state, batch)
    assert _same(dis, _snapshot(tiny_state.bundle.discriminator))
    assert not _same(enc, _snapshot(tiny_state.bundle.encoder))
    assert all(p.requires_grad for p in tiny_state.bundle.discriminator.parameters())


def test_discriminator_objective_decreases_on_fixed_batch(tiny_state, batch):
    totals = [train_discriminator_step(tiny_state, batch)[1].total_d for _ in range(12)]
    assert totals[-1] < totals[0]


def test_generator_update_matches_adam_closed_form(tiny_state, batch):
    before = [p.detach().clone() for p in tiny_state.bundle.generator_parameters()]
    train_generator_step(tiny_state, batch)
    lr = tiny_state.config.lr_gen
    for p0, p in zip(before, tiny_state.bundle.generator_parameters()):
        g = p.grad
        # primer paso de Adam: m̂ = g, v̂ = g²
        expected = p0 - lr * g / (g.abs() + ADAM_EPS)
        assert torch.allclose(p.detach(), expected, atol=1e-6, rtol=0)


def test_overfit_one_batch_on_translation_l1(tiny_train_config, batch):
    weights = LossWeights(alpha=0.0, beta=0.0, lambda1=0.0, w_disen=0.0)
    state = TrainState.initialize(tiny_train_config.model_copy(update={"weights": weights}))
    losses = [train_generator_step(state, batch)[1].l1_translation.item() for _ in range(100)]
    assert losses[-1] < 0.8 * losses[0]


def test_disen_off_reports_but_excludes_term(tiny_train_config, batch):
    config = tiny_train_config.model_copy(update={"weights": LossWeights(disen_off=True)})
    state = TrainState.initialize(config)
    _, breakdown = train_generator_step(state, batch)
    values = breakdown.as_floats()
    w = config.weights
    expected = values["l1_translation"] + w.alpha * values["l1_cycle"] + w.beta * values["adv"] + w.lambda1 * values["mc"]
    assert values["disen"] > 0
    assert values["total"] == pytest.approx(expected, rel=1e-6)


def test_steps_alternate_d_then_g(tiny_train_config, phantom_manifest, monkeypatch):
    order = []
    real_d, real_g = trainer.train_discriminator_step, trainer.train_generator_step

    def d_step(state, b):
        order.append("D")
        return real_d(state, b)

    def g_step(state, b):
        order.append("G")
        return real_g(state, b)

    monkeypatch.setattr(trainer, "train_discriminator_step", d_step)
    monkeypatch.setattr(trainer, "train_generator_step", g_step)
    state, _ = run_training(tiny_train_config, phantom_manifest, max_steps=3)
    assert order == ["D", "G"] * 3
    assert state.step == 3


def test_same_seed_runs_give_identical_checkpoints(tiny_train_config, phantom_manifest, tmp_path):
    run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path / "a")
    run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path / "b")
    assert file_hash(tmp_path / "a" / FINAL_CHECKPOINT) == file_hash(tmp_path / "b" / FINAL_CHECKPOINT)


def test_resume_matches_uninterrupted_run(tiny_train_config, phantom_manifest, tmp_path):
    full, _ = run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path / "full")

    partial, _ = run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path / "part", max_steps=4)
    resumed_from = load_checkpoint(tmp_path / "part" / "last.ucdmt")
    assert resumed_from.step == 4
    resumed, _ = run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path / "part", state=resumed_from)

    assert resumed.step == full.step
    full_tensors, resumed_tensors = full.bundle.named_tensors(), resumed.bundle.named_tensors()
    assert all(torch.equal(full_tensors[k], resumed_tensors[k]) for k in full_tensors)


def test_metrics_log_schema(tiny_train_config, phantom_manifest, tmp_path):
    _, log = run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path)
    lines = (tmp_path / METRICS_LOG_NAME).read_text(encoding="utf-8").splitlines()
    assert len(lines) == len(log)
    record = json.loads(lines[0])
    assert set(record) == {"step", "l1", "cycle", "adv_g", "adv_d", "mc_g", "mc_d", "disen", "total_g", "total_d"}


def test_non_finite_loss_aborts_with_checkpoint(tiny_train_config, phantom_manifest, tmp_path):
    state = TrainState.initialize(tiny_train_config)
    with torch.no_grad():
        next(state.bundle.decoder.parameters()).fill_(float("nan"))
    with pytest.raises(NonFiniteLossError) as info:
        run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path, state=state)
    assert info.value.step == 0
    assert (tmp_path / ABORT_CHECKPOINT).exists()


def test_reconstructed_disen_variant(tiny_train_config, batch):
    weights = LossWeights(disen_variant=DisenVariant.RECONSTRUCTED)
    state = TrainState.initialize(tiny_train_config.model_copy(update={"weights": weights}))
    _, breakdown = train_generator_step(state, batch)
    assert breakdown.is_finite()
    assert breakdown.as_floats()["disen"] >= 0.0


def test_resume_restores_saved_torch_rng(tiny_train_config, phantom_manifest, tmp_path):
    run_training(tiny_train_config, phantom_manifest, out_dir=tmp_path, max_steps=2)
    loaded = load_checkpoint(tmp_path / "last.ucdmt")
    saved = loaded.torch_rng_state.clone()

    # sin pasos pendientes: solo se aplica el estado guardado
    run_training(tiny_train_config, phantom_manifest, state=loaded, max_steps=loaded.step)
    assert torch.equal(torch.get_rng_state(), saved)
    assert loaded.torch_rng_state is None
