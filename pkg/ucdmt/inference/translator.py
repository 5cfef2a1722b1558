# ucdmt/inference/translator.py

from __future__ import annotations
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import numpy as np
import torch

from ucdmt.core.errors import MissingSubjectError, ShapeMismatchError
from ucdmt.data.dataset import load_subject_slices
from ucdmt.data.io import write_json, write_raw_volume
from ucdmt.metrics.evaluation import write_triplet_grid
from ucdmt.models.bundle import ModelBundle, decode, encode
from ucdmt.schemas.data_schemas import DatasetManifest
from ucdmt.schemas.enums import MODALITY_ORDER, Modality
from ucdmt.schemas.models import ModalityCode

logger = logging.getLogger(__name__)

PROVENANCE_NAME = "provenance.json"


@dataclass
class TranslationRequest:
    """
    x en [-1, 1] con forma (1, H, W) o (N, 1, H, W); la salida conserva la
    forma de la entrada. m_x solo es informativo.
    """
    x: torch.Tensor
    m_y: ModalityCode
    m_x: Optional[ModalityCode] = None


class SynthesizedImage(NamedTuple):
    modality: Modality
    image: torch.Tensor


def translate(bundle: ModelBundle, request: TranslationRequest) -> torch.Tensor:
    """
    x̃_y = Dec(Enc(x), m_y). Solo se ensamblan Enc y Dec; la modalidad de
    entrada nunca interviene en el cálculo. No cambia el modo (train/eval)
    del bundle: quien llama decide, `load_bundle` ya lo entrega en eval.
    """
    if request.x.dim() not in (3, 4):
        raise ShapeMismatchError(f"Entrada de traducción con forma {tuple(request.x.shape)}")
    with torch.no_grad():
        z = encode(bundle, request.x)
        return decode(bundle, z, request.m_y)


def complementary_modalities(m_x: Union[Modality, str], M: int) -> List[Modality]:
    """Las M−1 modalidades distintas de m_x, en el orden fijo de indexación."""
    source = Modality(m_x)
    return [m for m in MODALITY_ORDER[:M] if m != source]


def synthesize_complementary(
    bundle: ModelBundle,
    x: torch.Tensor,
    m_x: Union[Modality, str],
) -> List[SynthesizedImage]:
    """Las M−1 modalidades complementarias de x, en el orden fijo [t1, t1ce, t2, flair] sin m_x."""
    source = Modality(m_x)
    M = bundle.config.num_modalities
    outputs: List[SynthesizedImage] = []
    for target in complementary_modalities(source, M):
        request = TranslationRequest(
            x=x,
            m_y=ModalityCode.from_index(target.index, M),
            m_x=ModalityCode.from_index(source.index, M),
        )
        outputs.append(SynthesizedImage(target, translate(bundle, request)))
    return outputs


def translate_volume(
    bundle: ModelBundle,
    manifest: DatasetManifest,
    subject: str,
    m_x: Union[Modality, str],
    m_y: Union[Modality, str],
    out_dir: Union[str, Path],
    checkpoint_hash: Optional[str] = None,
    grid_path: Optional[Union[str, Path]] = None,
) -> Path:
    """
    Traduce cada corte conservado del sujeto y escribe el volumen resultante
    en el formato externo (`<out>/<subject>/<m_y>.raw`) junto con un JSON de
    procedencia (hash del checkpoint, m_x, m_y). Con `grid_path` escribe
    además la rejilla (entrada, traducción, verdad de referencia).
    """
    if manifest.get_subject(subject) is None:
        raise MissingSubjectError(f"El sujeto '{subject}' no está en el manifiesto.")
    source, target = Modality(m_x), Modality(m_y)
    M = bundle.config.num_modalities

    slices = load_subject_slices(manifest, subject)
    if not slices:
        raise ShapeMismatchError(f"El sujeto '{subject}' no tiene cortes válidos.")

    x = torch.from_numpy(np.stack([s.images[source.index] for s in slices])).unsqueeze(1)
    request = TranslationRequest(
        x=x,
        m_y=ModalityCode.from_index(target.index, M),
        m_x=ModalityCode.from_index(source.index, M),
    )
    translated_batch = translate(bundle, request)
    translated = translated_batch.squeeze(1).numpy()

    if grid_path is not None:
        gt = torch.from_numpy(np.stack([s.images[target.index] for s in slices])).unsqueeze(1)
        write_triplet_grid(x, translated_batch, gt, grid_path)

    out_dir = Path(out_dir)
    volume_path = out_dir / subject / f"{target.value}.raw"
    write_raw_volume(volume_path, np.transpose(translated, (1, 2, 0)))

    height, width = translated.shape[1:]
    provenance = {
        "subject_id": subject,
        "checkpoint_hash": checkpoint_hash,
        "m_x": source.value,
        "m_y": target.value,
        "slice_indices": [s.slice_index for s in slices],
        "shape": [int(height), int(width), len(slices)],
    }
    write_json(out_dir / subject / f"{target.value}.{PROVENANCE_NAME}", provenance)
    logger.info(f"Volumen traducido {subject}: {source.value}→{target.value}, {len(slices)} cortes en {volume_path}.")
    return volume_path
