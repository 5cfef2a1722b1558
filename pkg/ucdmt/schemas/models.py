# ucdmt/schemas/models.py

from __future__ import annotations
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Tuple, Union

import numpy as np
import torch

from ucdmt.core.errors import InvalidCodeError, InvalidVolumeError
from .enums import Modality


@dataclass(frozen=True)
class ModalityCode:
    """
    Vector one-hot de longitud M que identifica una modalidad (m_x, m_y).
    Condiciona al decodificador; nunca al codificador.
    """
    bits: Tuple[int, ...]

    def __post_init__(self):
        validate_one_hot(self.bits)

    @property
    def M(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        return self.bits.index(1)

    @classmethod
    def from_index(cls, index: int, M: int = 4) -> "ModalityCode":
        if not 0 <= index < M:
            raise InvalidCodeError(f"Índice de modalidad {index} fuera de rango para M={M}")
        return cls(tuple(1 if k == index else 0 for k in range(M)))

    @classmethod
    def from_modality(cls, modality: Union[Modality, str], M: int = 4) -> "ModalityCode":
        return cls.from_index(Modality(modality).index, M)

    def to_tensor(self, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        return torch.tensor(self.bits, dtype=dtype)


def validate_one_hot(bits: Sequence[float]) -> None:
    """Exactamente un elemento igual a 1 y el resto 0."""
    values = list(bits)
    if not values:
        raise InvalidCodeError("El código de modalidad está vacío.")
    if any(v not in (0, 1) for v in values) or sum(values) != 1:
        raise InvalidCodeError(f"El código {values} no es one-hot.")


def one_hot_batch(indices: Sequence[int], M: int) -> torch.Tensor:
    """Matriz (N, M) de códigos one-hot a partir de índices de modalidad."""
    idx = torch.as_tensor(list(indices), dtype=torch.long)
    return torch.nn.functional.one_hot(idx, num_classes=M).to(torch.float32)


@dataclass
class Volume:
    """Volumen 3-D (alto × ancho × profundidad) de una modalidad de un sujeto."""
    voxels: np.ndarray
    subject_id: str
    modality: ModalityCode

    def __post_init__(self):
        if self.voxels.ndim != 3 or min(self.voxels.shape) < 1:
            raise InvalidVolumeError(
                f"Volumen inválido para {self.subject_id}: forma {self.voxels.shape}"
            )
        if not np.all(np.isfinite(self.voxels)):
            raise InvalidVolumeError(f"El volumen de {self.subject_id} contiene NaN/Inf.")

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.voxels.shape)


@dataclass
class PairedSlice:
    """
    Un corte axial de un sujeto con sus M imágenes co-registradas en [-1, 1].
    `images` tiene forma (M, alto, ancho).
    """
    subject_id: str
    slice_index: int
    images: np.ndarray
    brain_pixel_count: int
    valid: Tuple[bool, ...] = field(default=())

    @property
    def M(self) -> int:
        return self.images.shape[0]

    def image(self, modality_index: int) -> np.ndarray:
        return self.images[modality_index]


class TrainingBatch(NamedTuple):
    """Lote balanceado: x (N,1,H,W), m_x (N,M), x_y (N,1,H,W), m_y (N,M)."""
    x: torch.Tensor
    m_x: torch.Tensor
    x_y: torch.Tensor
    m_y: torch.Tensor
