# ucdmt/data/sampling.py

from __future__ import annotations
import math
from typing import Sequence

import numpy as np
import torch

from ucdmt.core.errors import EmptyDatasetError, IndivisibleBatchError
from ucdmt.schemas.models import PairedSlice, TrainingBatch, one_hot_batch


def steps_per_epoch(n_slices: int, M: int, batch_size: int) -> int:
    """Una época recorre en promedio cada par (corte, modalidad de entrada) una vez."""
    return max(1, math.ceil(n_slices * M / batch_size))


def sample_training_batch(
    index: Sequence[PairedSlice],
    batch_size: int,
    rng: np.random.Generator,
) -> TrainingBatch:
    """
    Lote balanceado: exactamente batch_size/M muestras por modalidad de entrada.
    La modalidad objetivo se elige uniforme sobre las M (incluida la propia,
    i.e. auto-reconstrucción). Determinista dado el estado de `rng`.
    """
    if not index:
        raise EmptyDatasetError("No hay cortes para muestrear.")

    M = index[0].M
    if batch_size % M != 0:
        raise IndivisibleBatchError(f"batch_size={batch_size} no es divisible entre M={M}.")
    per_modality = batch_size // M

    source_idx = np.repeat(np.arange(M), per_modality)
    slice_idx = rng.integers(0, len(index), size=batch_size)
    target_idx = rng.integers(0, M, size=batch_size)

    x = np.stack([index[s].images[m] for s, m in zip(slice_idx, source_idx)])
    x_y = np.stack([index[s].images[m] for s, m in zip(slice_idx, target_idx)])

    return TrainingBatch(
        x=torch.from_numpy(x).unsqueeze(1),
        m_x=one_hot_batch(source_idx.tolist(), M),
        x_y=torch.from_numpy(x_y).unsqueeze(1),
        m_y=one_hot_batch(target_idx.tolist(), M),
    )
