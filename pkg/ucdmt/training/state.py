# ucdmt/training/state.py

from __future__ import annotations
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from ucdmt.models.bundle import ModelBundle
from ucdmt.schemas.config_schemas import TrainConfig

ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def set_seeds(seed: int, workers: int = 1) -> None:
    """Semillas globales y modo determinista de torch."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.set_num_threads(workers)
    torch.use_deterministic_algorithms(True, warn_only=True)


def build_optimizer(params, lr: float, beta1: float) -> torch.optim.Adam:
    # Sin decaimiento del lr ni recorte de gradiente
    return torch.optim.Adam(params, lr=lr, betas=(beta1, ADAM_BETA2), eps=ADAM_EPS, foreach=False)


@dataclass
class TrainState:
    """Estado completo del entrenamiento; restaurable bit a bit desde un checkpoint."""
    bundle: ModelBundle
    opt_gen: torch.optim.Adam
    opt_dis: torch.optim.Adam
    config: TrainConfig
    rng: np.random.Generator
    step: int = 0
    epoch: int = 0
    # RNG global de torch guardado en el checkpoint; run_training lo aplica al reanudar
    torch_rng_state: Optional[torch.Tensor] = None

    @classmethod
    def initialize(cls, config: TrainConfig, seed: Optional[int] = None) -> "TrainState":
        seed = config.seed if seed is None else seed
        bundle = ModelBundle.build(config.model, seed=seed)
        return cls(
            bundle=bundle,
            opt_gen=build_optimizer(bundle.generator_parameters(), config.lr_gen, config.momentum_beta1),
            opt_dis=build_optimizer(bundle.discriminator_parameters(), config.lr_dis, config.momentum_beta1),
            config=config,
            rng=np.random.default_rng(seed),
        )
