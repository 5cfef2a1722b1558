# ucdmt/schemas/enums.py

from enum import Enum
from typing import List


class Modality(str, Enum):
    """
    Modalidades de RM en el orden fijo de indexación one-hot.
    El orden de declaración ES el índice: t1=0, t1ce=1, t2=2, flair=3.
    """
    T1 = "t1"
    T1CE = "t1ce"
    T2 = "t2"
    FLAIR = "flair"

    @property
    def index(self) -> int:
        return MODALITY_ORDER.index(self)

    @classmethod
    def from_index(cls, index: int) -> "Modality":
        return MODALITY_ORDER[index]


MODALITY_ORDER: List[Modality] = list(Modality)


class Split(str, Enum):
    """Particiones a nivel de sujeto."""
    TRAIN_TRANSLATOR = "train_translator"
    TEST = "test"
    TRAIN_SEGMENTOR = "train_segmentor"


class GanMode(str, Enum):
    NONSATURATING = "nonsaturating"
    MINIMAX = "minimax"


class DisenVariant(str, Enum):
    # |Enc(x̃_y) − Enc(x)|
    TRANSLATED = "translated"
    # |Enc(x̃_x) − Enc(x)|, solo como experimento
    RECONSTRUCTED = "reconstructed"


class MetricScale(str, Enum):
    UNIT = "unit"
    BYTE = "byte"


class StageStatus(str, Enum):
    """Define los posibles estados de una ejecución del pipeline."""

    PENDING = "pending"
    RUNNING = "running"
    SUCCESS = "success"
    FATAL = "fatal"
    SKIPPED = "skipped"
