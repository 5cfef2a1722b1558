# tests/test_networks.py

import inspect

import pytest
import torch

from ucdmt.core.errors import InvalidCodeError, ShapeMismatchError
from ucdmt.models.bundle import ModelBundle, decode, discriminate, encode
from ucdmt.models.networks import Encoder, replicate_and_concat
from ucdmt.schemas.config_schemas import ModelConfig
from ucdmt.schemas.models import ModalityCode


@pytest.fixture(scope="module")
def desk_bundle():
    return ModelBundle.build(ModelConfig(), seed=0).eval()


def test_encoder_shape_contract(desk_bundle):
    z = encode(desk_bundle, torch.rand(1, 64, 64) * 2 - 1)
    assert z.shape == (64, 16, 16)


def test_encoder_is_deterministic_in_eval(desk_bundle):
    x = torch.rand(1, 64, 64) * 2 - 1
    assert torch.equal(encode(desk_bundle, x), encode(desk_bundle, x))


def test_encoder_rejects_indivisible_input(desk_bundle):
    with pytest.raises(ShapeMismatchError):
        encode(desk_bundle, torch.zeros(1, 63, 63))


def test_encoder_signature_takes_no_code():
    params = list(inspect.signature(Encoder.forward).parameters)
    assert params == ["self", "x"]


def test_replicate_and_concat_channels():
    z = torch.randn(64, 16, 16)
    out = replicate_and_concat(z, ModalityCode((0, 1, 0, 0)).to_tensor())
    assert out.shape == (68, 16, 16)
    assert torch.equal(out[:64], z)
    assert torch.all(out[65] == 1)
    for k in (64, 66, 67):
        assert torch.all(out[k] == 0)


def test_replicate_rejects_soft_code():
    with pytest.raises(InvalidCodeError):
        replicate_and_concat(torch.zeros(64, 16, 16), torch.tensor([0.5, 0.5, 0.0, 0.0]))


def test_modality_code_rejects_two_hot():
    with pytest.raises(InvalidCodeError):
        ModalityCode((1, 1, 0, 0))


def test_decoder_output_shape_and_range(desk_bundle):
    z = encode(desk_bundle, torch.rand(1, 64, 64) * 2 - 1)
    for m in range(4):
        out = decode(desk_bundle, z, ModalityCode.from_index(m))
        assert out.shape == (1, 64, 64)
        assert out.min() >= -1 and out.max() <= 1


def test_decoder_bounded_with_extreme_weights(tiny_model_config):
    bundle = ModelBundle.build(tiny_model_config, seed=1).eval()
    with torch.no_grad():
        for p in bundle.decoder.parameters():
            p.mul_(50.0)
    out = decode(bundle, torch.randn(8, 4, 4) * 10, ModalityCode.from_index(3))
    assert torch.all(out.abs() <= 1.0)


def test_decoder_rejects_wrong_code_length(desk_bundle):
    with pytest.raises(InvalidCodeError):
        decode(desk_bundle, torch.zeros(64, 16, 16), torch.tensor([1.0, 0.0, 0.0]))


def test_discriminator_shapes(desk_bundle):
    out = discriminate(desk_bundle, torch.zeros(1, 64, 64))
    assert out.adv_map.shape == (8, 8)
    assert out.modality_logits.shape == (4,)
    assert torch.softmax(out.modality_logits, dim=0).sum().item() == pytest.approx(1.0, abs=1e-6)


def test_discriminator_deterministic(desk_bundle):
    x = torch.rand(1, 64, 64)
    a, b = discriminate(desk_bundle, x), discriminate(desk_bundle, x)
    assert torch.equal(a.adv_map, b.adv_map) and torch.equal(a.modality_logits, b.modality_logits)


def test_one_bundle_serves_every_direction(tiny_model_config):
    bundle = ModelBundle.build(tiny_model_config, seed=0).eval()
    before = bundle.parameter_count()
    x = torch.rand(1, 16, 16) * 2 - 1
    for m in range(4):
        decode(bundle, encode(bundle, x), ModalityCode.from_index(m))
    assert bundle.parameter_count() == before
    assert bundle.decoder.model[0].block[0].in_channels == tiny_model_config.latent_channels + 4


def test_image_size_must_be_multiple_of_eight():
    with pytest.raises(ValueError):
        ModelConfig(image_size=20)


def test_bundle_has_no_device_placement():
    # solo CPU
    assert not hasattr(ModelBundle, "to")
