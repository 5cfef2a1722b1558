# ucdmt/data/dataset.py

from __future__ import annotations
import logging
from typing import List

from ucdmt.core.errors import MissingModalityError, MissingSubjectError, ShapeMismatchError
from ucdmt.data.io import read_raw_volume, subject_file
from ucdmt.data.preprocessing import extract_valid_slices
from ucdmt.schemas.data_schemas import DatasetManifest, SubjectRecord
from ucdmt.schemas.models import ModalityCode, PairedSlice, Volume

logger = logging.getLogger(__name__)


def load_subject_volumes(manifest: DatasetManifest, record: SubjectRecord) -> List[Volume]:
    """Carga los M volúmenes de un sujeto en el orden de modalidades del manifiesto."""
    missing = [m for m in manifest.modalities if m not in record.files]
    if missing:
        raise MissingModalityError(
            f"Al sujeto '{record.subject_id}' le faltan las modalidades {missing}."
        )

    volumes: List[Volume] = []
    for index, modality in enumerate(manifest.modalities):
        path = subject_file(manifest, record, modality)
        if not path.is_file():
            raise MissingModalityError(
                f"Archivo '{path}' de la modalidad '{modality}' no existe (sujeto '{record.subject_id}')."
            )
        voxels = read_raw_volume(path, record.shape)
        volumes.append(
            Volume(voxels=voxels, subject_id=record.subject_id, modality=ModalityCode.from_index(index, manifest.M))
        )

    shapes = {v.shape for v in volumes}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"Formas inconsistentes en el sujeto '{record.subject_id}': {shapes}")
    return volumes


def load_subject_slices(manifest: DatasetManifest, subject_id: str) -> List[PairedSlice]:
    record = manifest.get_subject(subject_id)
    if record is None:
        raise MissingSubjectError(f"El sujeto '{subject_id}' no está en el manifiesto.")
    volumes = load_subject_volumes(manifest, record)
    return extract_valid_slices(volumes, threshold=manifest.slice_threshold)


def build_paired_index(manifest: DatasetManifest) -> List[PairedSlice]:
    """
    Índice de cortes emparejados: cada corte conservado aparece una vez y
    expone sus M imágenes, de modo que cualquier par (m_x, m_y) es muestreable.
    """
    index: List[PairedSlice] = []
    for record in manifest.subjects:
        volumes = load_subject_volumes(manifest, record)
        slices = extract_valid_slices(volumes, threshold=manifest.slice_threshold)
        logger.debug(f"Sujeto {record.subject_id}: {len(slices)} cortes válidos de {record.shape[2]}.")
        index.extend(slices)

    logger.info(
        f"Índice emparejado construido: {len(index)} cortes de {len(manifest.subjects)} sujetos "
        f"(partición: {manifest.split.value if manifest.split else 'todas'})."
    )
    return index
