# tests/conftest.py

import numpy as np
import pytest
import torch

from ucdmt.data.phantom import generate_phantom_dataset
from ucdmt.schemas.config_schemas import LossWeights, ModelConfig, TrainConfig
from ucdmt.schemas.data_schemas import PhantomSpec
from ucdmt.schemas.models import Volume, ModalityCode
from ucdmt.training.state import TrainState


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    # 16x16: el mínimo que admiten Enc (/4), Dis (/8) y la ventana SSIM (11)
    return ModelConfig(
        num_modalities=4,
        image_size=16,
        base_channels=4,
        latent_channels=8,
        n_res_blocks=1,
        dis_channels=4,
    )


@pytest.fixture
def tiny_train_config(tiny_model_config) -> TrainConfig:
    return TrainConfig(
        model=tiny_model_config,
        batch_size=4,
        epochs=1,
        seed=3,
        log_every=1,
        checkpoint_every=2,
    )


@pytest.fixture
def tiny_state(tiny_train_config) -> TrainState:
    return TrainState.initialize(tiny_train_config)


@pytest.fixture(scope="session")
def phantom_spec() -> PhantomSpec:
    # 4 sujetos -> round(2.8) = 3 de entrenamiento y 1 de prueba
    return PhantomSpec(n_subjects=4, image_size=16, slices_per_subject=3, seed=7)


@pytest.fixture(scope="session")
def phantom_dir(tmp_path_factory, phantom_spec):
    out = tmp_path_factory.mktemp("phantom")
    generate_phantom_dataset(phantom_spec, out)
    return out


@pytest.fixture
def phantom_manifest(phantom_dir):
    from ucdmt.data.io import load_manifest
    return load_manifest(phantom_dir)


def make_volume(voxels, subject_id="s0", modality_index=0, M=4) -> Volume:
    return Volume(
        voxels=np.asarray(voxels, dtype=np.float32),
        subject_id=subject_id,
        modality=ModalityCode.from_index(modality_index, M),
    )


class IdentityEncoder(torch.nn.Module):
    def forward(self, x):
        return x


class IdentityDecoder(torch.nn.Module):
    """Devuelve z sin usar el código: junto a IdentityEncoder forma el autoencoder identidad."""

    def forward(self, z, codes):
        return z
