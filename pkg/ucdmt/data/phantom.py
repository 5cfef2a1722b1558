# ucdmt/data/phantom.py
"""
Generador determinista de fantomas multimodales a escala de escritorio.

Cada sujeto comparte un campo de "anatomía" a ∈ [0, 1] (elipses aleatorias
suavizadas sobre fondo, con lesión opcional) y cada modalidad se obtiene con
una función de transferencia fija sobre ese campo.
"""

from __future__ import annotations
import logging
import math
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from scipy.ndimage import gaussian_filter

from ucdmt.core.log import log_time
from ucdmt.data.io import save_manifest, write_raw_volume
from ucdmt.schemas.data_schemas import DEFAULT_SLICE_THRESHOLD, DatasetManifest, PhantomSpec, SubjectRecord
from ucdmt.schemas.enums import MODALITY_ORDER, Split

logger = logging.getLogger(__name__)

# Tamaño de referencia sobre el que se definió el umbral de 2000 píxeles
REFERENCE_IMAGE_SIZE = 240

TISSUE_BASE = 0.35
LESION_ENHANCEMENT = 0.6

# Los volúmenes se guardan en "unidades físicas" no negativas: [-1, 1] -> [0, 1000].
# El fondo de T1 (-1) queda en 0 exacto, como en un volumen sin cráneo.
RAW_UNITS_SCALE = 500.0


def apply_transfer(anatomy: np.ndarray, lesion: np.ndarray, modality_index: int) -> np.ndarray:
    """Funciones de transferencia por modalidad sobre la anatomía a ∈ [0, 1]."""
    if modality_index == 0:
        return 2.0 * anatomy - 1.0
    if modality_index == 1:
        return np.clip(2.0 * anatomy - 1.0 + LESION_ENHANCEMENT * lesion, -1.0, 1.0)
    if modality_index == 2:
        return 1.0 - 2.0 * anatomy
    if modality_index == 3:
        return 2.0 * anatomy ** 2 - 1.0
    raise ValueError(f"No hay función de transferencia para la modalidad {modality_index}")


def scaled_slice_threshold(image_size: int) -> int:
    """Umbral de cortes proporcional al área de la imagen."""
    return int(round(DEFAULT_SLICE_THRESHOLD * (image_size / REFERENCE_IMAGE_SIZE) ** 2))


def _ellipse(yy: np.ndarray, xx: np.ndarray, cy: float, cx: float, ry: float, rx: float, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    dy, dx = yy - cy, xx - cx
    u = (c * dx + s * dy) / rx
    v = (-s * dx + c * dy) / ry
    return u * u + v * v <= 1.0


def _render_subject(spec: PhantomSpec, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Devuelve (anatomía, lesión, máscara de cabeza), cada uno (alto, ancho, prof.)."""
    size, depth = spec.image_size, spec.slices_per_subject
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    center = size / 2.0

    head_cy = center + rng.uniform(-0.03, 0.03) * size
    head_cx = center + rng.uniform(-0.03, 0.03) * size
    head_ry = rng.uniform(0.36, 0.44) * size
    head_rx = rng.uniform(0.30, 0.38) * size

    n_inner = int(rng.integers(3, 6))
    inner = []
    for _ in range(n_inner):
        inner.append((
            rng.uniform(-0.45, 0.45),   # centro relativo (y)
            rng.uniform(-0.45, 0.45),   # centro relativo (x)
            rng.uniform(0.10, 0.35),    # semieje relativo (y)
            rng.uniform(0.10, 0.35),    # semieje relativo (x)
            rng.uniform(0.0, math.pi),
            rng.uniform(0.55, 1.0),     # intensidad del tejido
        ))

    has_lesion = bool(rng.random() < spec.lesion_probability)
    lesion_params = (
        rng.uniform(-0.35, 0.35),
        rng.uniform(-0.35, 0.35),
        rng.uniform(0.06, 0.12) * size,
        rng.uniform(0.3, 0.7) * (depth - 1) if depth > 1 else 0.0,
    )

    anatomy = np.zeros((size, size, depth), dtype=np.float64)
    lesion = np.zeros_like(anatomy)
    mask = np.zeros(anatomy.shape, dtype=bool)

    for k in range(depth):
        # la cabeza se encoge hacia los extremos del volumen
        scale = 0.65 + 0.35 * math.sin(math.pi * (k + 1) / (depth + 1))
        ry, rx = head_ry * scale, head_rx * scale
        head = _ellipse(yy, xx, head_cy, head_cx, ry, rx, 0.0)

        field = np.full((size, size), TISSUE_BASE)
        for rel_cy, rel_cx, rel_ry, rel_rx, theta, intensity in inner:
            region = _ellipse(
                yy, xx, head_cy + rel_cy * ry, head_cx + rel_cx * rx, rel_ry * ry, rel_rx * rx, theta
            )
            field = np.where(region, intensity, field)

        blob = np.zeros((size, size))
        if has_lesion:
            rel_cy, rel_cx, radius, slice_center = lesion_params
            falloff = max(0.0, 1.0 - abs(k - slice_center) / max(depth / 2.0, 1.0))
            if falloff > 0:
                r = radius * falloff
                d2 = (yy - head_cy - rel_cy * ry) ** 2 + (xx - head_cx - rel_cx * rx) ** 2
                blob = np.exp(-d2 / (2.0 * r * r)) * (d2 <= (2.0 * r) ** 2)
            field = field + 0.3 * blob

        smoothed = np.clip(gaussian_filter(field, sigma=1.0, mode="nearest"), 0.0, 1.0)
        anatomy[:, :, k] = np.where(head, smoothed, 0.0)
        lesion[:, :, k] = np.where(head, blob, 0.0)
        mask[:, :, k] = head

    return anatomy, lesion, mask


def generate_phantom_dataset(spec: PhantomSpec, output_dir: Union[str, Path]) -> DatasetManifest:
    """
    Genera el dataset sintético en `output_dir` y devuelve su manifiesto.
    Es una función pura de `spec`: dos ejecuciones producen archivos idénticos byte a byte.
    """
    output_dir = Path(output_dir)
    modalities = [m.value for m in MODALITY_ORDER]
    n_train = int(round(spec.train_fraction * spec.n_subjects))

    subjects: List[SubjectRecord] = []
    with log_time(f"generación de {spec.n_subjects} fantomas de {spec.image_size}x{spec.image_size}"):
        for n in range(spec.n_subjects):
            subject_id = f"phantom_{n:03d}"
            rng = np.random.default_rng([spec.seed, n])
            anatomy, lesion, mask = _render_subject(spec, rng)

            files = {}
            for index, modality in enumerate(modalities):
                image = apply_transfer(anatomy, lesion, index)
                if spec.noise_sigma > 0:
                    noise = rng.normal(0.0, spec.noise_sigma, size=image.shape)
                    # el fondo queda exacto: solo hay ruido dentro de la cabeza
                    image = image + np.where(mask, noise, 0.0)
                image = np.clip(image, -1.0, 1.0)
                raw = (RAW_UNITS_SCALE * (image + 1.0)).astype(np.float32)

                relative = f"{subject_id}/{modality}.raw"
                write_raw_volume(output_dir / relative, raw)
                files[modality] = relative

            subjects.append(
                SubjectRecord(
                    subject_id=subject_id,
                    files=files,
                    shape=[spec.image_size, spec.image_size, spec.slices_per_subject],
                    split=Split.TRAIN_TRANSLATOR if n < n_train else Split.TEST,
                )
            )

    manifest = DatasetManifest(
        M=len(modalities),
        modalities=modalities,
        subjects=subjects,
        seed=spec.seed,
        slice_threshold=scaled_slice_threshold(spec.image_size),
    )
    save_manifest(manifest, output_dir)
    manifest.root_path = str(output_dir.resolve())
    logger.info(
        f"Fantomas escritos en {output_dir}: {n_train} sujetos de entrenamiento, "
        f"{spec.n_subjects - n_train} de prueba."
    )
    return manifest
