# ucdmt/data/io.py
"""
Lectura y escritura del formato externo del dataset:
`<root>/<subject_id>/<modalidad>.raw` (float32 little-endian, fila mayor,
cortes en la dimensión más externa) y `<root>/manifest.json`.
"""

from __future__ import annotations
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from pydantic import ValidationError

from ucdmt.core.errors import IoFailureError, MissingModalityError, ShapeMismatchError
from ucdmt.core.retry import make_retry
from ucdmt.schemas.data_schemas import DatasetManifest, SubjectRecord

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
RAW_DTYPE = np.dtype("<f4")

_retry_io = make_retry()


@_retry_io
def _write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(data)


def write_bytes(path: Union[str, Path], data: bytes) -> None:
    """Escritura con reintentos ante errores transitorios; el resto se reporta como IoFailure."""
    path = Path(path)
    try:
        _write_bytes(path, data)
    except OSError as e:
        raise IoFailureError(f"No se pudo escribir '{path}': {e}") from e


def write_json(path: Union[str, Path], payload: Any) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    write_bytes(path, text.encode("utf-8"))


def write_raw_volume(path: Union[str, Path], voxels: np.ndarray) -> None:
    """Escribe un volumen (alto, ancho, prof.) con los cortes como dimensión externa."""
    if voxels.ndim != 3:
        raise ShapeMismatchError(f"Se esperaba un volumen 3-D, se recibió {voxels.shape}")
    on_disk = np.ascontiguousarray(np.transpose(voxels, (2, 0, 1)), dtype=RAW_DTYPE)
    write_bytes(path, on_disk.tobytes(order="C"))


def read_raw_volume(path: Union[str, Path], shape) -> np.ndarray:
    """Lee un volumen escrito por `write_raw_volume` y lo devuelve como (alto, ancho, prof.)."""
    path = Path(path)
    height, width, depth = (int(d) for d in shape)
    try:
        flat = np.fromfile(path, dtype=RAW_DTYPE)
    except FileNotFoundError as e:
        raise MissingModalityError(f"Archivo de modalidad no encontrado: {path}") from e
    except OSError as e:
        raise IoFailureError(f"No se pudo leer '{path}': {e}") from e

    expected = height * width * depth
    if flat.size != expected:
        raise ShapeMismatchError(
            f"'{path}' contiene {flat.size} valores; se esperaban {expected} para {shape}"
        )
    return np.transpose(flat.reshape(depth, height, width), (1, 2, 0)).astype(np.float32)


def save_manifest(manifest: DatasetManifest, root: Union[str, Path]) -> Path:
    path = Path(root) / MANIFEST_NAME
    write_json(path, manifest.model_dump(mode="json"))
    return path


def load_manifest(root: Union[str, Path]) -> DatasetManifest:
    """Carga `<root>/manifest.json` y rellena `root_path`."""
    root = Path(root)
    path = root / MANIFEST_NAME
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw: Dict[str, Any] = json.load(f)
    except FileNotFoundError as e:
        raise IoFailureError(f"Manifiesto no encontrado en '{path}'") from e
    except json.JSONDecodeError as e:
        raise IoFailureError(f"Manifiesto ilegible en '{path}': {e}") from e

    try:
        manifest = DatasetManifest.model_validate(raw)
    except ValidationError as e:
        raise IoFailureError(f"Manifiesto inválido en '{path}': {e}") from e

    manifest.root_path = str(root.resolve())
    logger.debug(f"Manifiesto cargado desde {path}: {len(manifest.subjects)} sujetos.")
    return manifest


def subject_file(manifest: DatasetManifest, record: SubjectRecord, modality: str) -> Path:
    if modality not in record.files:
        raise MissingModalityError(
            f"El sujeto '{record.subject_id}' no declara la modalidad '{modality}'."
        )
    return Path(manifest.root_path) / record.files[modality]
