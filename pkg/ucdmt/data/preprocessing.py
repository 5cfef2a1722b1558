# ucdmt/data/preprocessing.py

from __future__ import annotations
from dataclasses import replace
from typing import List, Sequence

import numpy as np

from ucdmt.core.errors import ShapeMismatchError
from ucdmt.schemas.data_schemas import DEFAULT_SLICE_THRESHOLD
from ucdmt.schemas.models import PairedSlice, Volume

# Modalidad de referencia para contar píxeles de cerebro (T1, índice 0)
REFERENCE_MODALITY = 0


def scale_intensities(volume: Volume) -> Volume:
    """
    Escala lineal por volumen a [-1, 1]: 2·(v − min)/(max − min) − 1.
    Un volumen constante se mapea a ceros.
    """
    voxels = volume.voxels.astype(np.float64)
    vmin = voxels.min()
    vmax = voxels.max()

    if vmax == vmin:
        scaled = np.zeros_like(voxels)
    else:
        scaled = 2.0 * (voxels - vmin) / (vmax - vmin) - 1.0
        # el redondeo puede dejar -1 - eps
        scaled = np.clip(scaled, -1.0, 1.0)

    return replace(volume, voxels=scaled.astype(np.float32))


def brain_pixel_counts(reference: np.ndarray) -> np.ndarray:
    """
    Píxeles de cerebro por corte axial: vóxeles no nulos del volumen de
    referencia antes de escalar (volúmenes con el cráneo retirado, fondo 0).
    """
    return np.count_nonzero(reference != 0, axis=(0, 1))


def extract_valid_slices(
    volumes: Sequence[Volume],
    threshold: int = DEFAULT_SLICE_THRESHOLD,
) -> List[PairedSlice]:
    """
    Conserva los cortes axiales (tercera dimensión) cuyo conteo de píxeles de
    cerebro en la modalidad de referencia es >= threshold. Los cortes
    conservados llevan las M modalidades escaladas a [-1, 1].
    """
    if not volumes:
        return []

    shape = volumes[0].shape
    subject_id = volumes[0].subject_id
    for v in volumes[1:]:
        if v.shape != shape:
            raise ShapeMismatchError(
                f"Los volúmenes del sujeto {subject_id} no comparten forma: {shape} vs {v.shape}"
            )
        if v.subject_id != subject_id:
            raise ShapeMismatchError(
                f"Volúmenes de sujetos distintos en un mismo grupo: {subject_id} vs {v.subject_id}"
            )

    counts = brain_pixel_counts(volumes[REFERENCE_MODALITY].voxels)
    scaled = np.stack([scale_intensities(v).voxels for v in volumes], axis=0)

    slices: List[PairedSlice] = []
    for k in np.flatnonzero(counts >= threshold):
        slices.append(
            PairedSlice(
                subject_id=subject_id,
                slice_index=int(k),
                images=np.ascontiguousarray(scaled[:, :, :, k]),
                brain_pixel_count=int(counts[k]),
                valid=tuple(True for _ in volumes),
            )
        )
    return slices
