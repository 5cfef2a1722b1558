# ucdmt/schemas/data_schemas.py

from __future__ import annotations
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import MODALITY_ORDER, Split

DEFAULT_SLICE_THRESHOLD = 2000


class SubjectRecord(BaseModel):
    subject_id: str
    # nombre de modalidad -> ruta relativa a la raíz del dataset
    files: Dict[str, str]
    # (alto, ancho, profundidad)
    shape: List[int] = Field(min_length=3, max_length=3)
    split: Split = Split.TRAIN_TRANSLATOR

    @model_validator(mode="after")
    def _check_shape(self) -> "SubjectRecord":
        if any(d < 1 for d in self.shape):
            raise ValueError(f"Dimensiones inválidas para el sujeto {self.subject_id}: {self.shape}")
        return self


class DatasetManifest(BaseModel):
    """
    Índice de un dataset en disco: `<root>/<subject_id>/<modalidad>.raw` más
    `<root>/manifest.json`. `root_path` no se serializa: se rellena al cargar.
    """
    root_path: str = Field("", exclude=True)
    M: int = Field(4, ge=1)
    modalities: List[str] = Field(default_factory=lambda: [m.value for m in MODALITY_ORDER])
    subjects: List[SubjectRecord] = Field(default_factory=list)
    # Partición activa; None = todas
    split: Optional[Split] = Field(None, exclude=True)
    seed: Optional[int] = None
    slice_threshold: int = Field(DEFAULT_SLICE_THRESHOLD, ge=0)

    @model_validator(mode="after")
    def _check_modalities(self) -> "DatasetManifest":
        if len(self.modalities) != self.M:
            raise ValueError(f"El manifiesto declara M={self.M} pero lista {len(self.modalities)} modalidades.")
        return self

    def select(self, split: Optional[Split]) -> "DatasetManifest":
        """Devuelve una vista del manifiesto restringida a una partición."""
        if split is None:
            return self.model_copy(update={"split": None})
        subjects = [s for s in self.subjects if s.split == split]
        return self.model_copy(update={"subjects": subjects, "split": split})

    def get_subject(self, subject_id: str) -> Optional[SubjectRecord]:
        return next((s for s in self.subjects if s.subject_id == subject_id), None)


class PhantomSpec(BaseModel):
    """Parámetros del generador determinista de fantomas multimodales."""
    n_subjects: int = Field(10, ge=1)
    image_size: int = Field(64, ge=16)
    slices_per_subject: int = Field(8, ge=1)
    lesion_probability: float = Field(0.5, ge=0, le=1)
    noise_sigma: float = Field(0.02, ge=0)
    seed: int = 7
    train_fraction: float = Field(0.7, ge=0, le=1)
