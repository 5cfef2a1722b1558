# ucdmt/metrics/evaluation.py
"""
Evaluación de un checkpoint sobre una partición completa.

Un único ModelBundle sirve todas las direcciones m_x→m_y: aquí se recorren
las M(M-1) cruzadas (y opcionalmente las M de auto-reconstrucción), se
agregan L1, SSIM, PSNR e IS y se compara con la línea base que copia la
entrada (x̃ := x).
"""

from __future__ import annotations
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import torch
from torchvision.utils import save_image

from ucdmt.core.errors import EmptyDatasetError, ShapeMismatchError
from ucdmt.core.log import log_time
from ucdmt.data.dataset import build_paired_index
from ucdmt.data.io import write_json
from ucdmt.metrics.inception import (
    ModalityClassifier,
    ProbabilityModel,
    inception_score,
    train_modality_classifier,
)
from ucdmt.metrics.quality import metric_l1, metric_psnr, metric_ssim, to_unit
from ucdmt.models.bundle import ModelBundle
from ucdmt.schemas.data_schemas import DatasetManifest
from ucdmt.schemas.enums import MetricScale, Split
from ucdmt.schemas.models import PairedSlice, one_hot_batch
from ucdmt.schemas.report_schemas import (
    DirectionMetrics,
    EvaluationDiagnostics,
    MetricSummary,
    MetricsReport,
    direction_key,
)

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 64
GRID_ROWS = 8


@dataclass
class _Accumulator:
    """Valores por imagen de una dirección (o de un agregado)."""
    l1: List[float] = field(default_factory=list)
    ssim: List[float] = field(default_factory=list)
    psnr: List[float] = field(default_factory=list)
    images: List[torch.Tensor] = field(default_factory=list)

    def add(self, fake: np.ndarray, real: np.ndarray) -> None:
        self.l1.append(metric_l1(fake, real, MetricScale.BYTE))
        self.ssim.append(metric_ssim(to_unit(fake), to_unit(real)))
        self.psnr.append(metric_psnr(to_unit(fake), to_unit(real)))

    def extend(self, other: "_Accumulator") -> None:
        self.l1.extend(other.l1)
        self.ssim.extend(other.ssim)
        self.psnr.extend(other.psnr)
        self.images.extend(other.images)

    def summarize(self, classifier: ProbabilityModel, is_splits: int) -> DirectionMetrics:
        batch = torch.cat(self.images)
        splits = min(is_splits, batch.shape[0])
        is_mean, is_std = inception_score(batch, classifier, splits=splits)
        return DirectionMetrics(
            l1=summarize(self.l1),
            ssim=summarize(self.ssim),
            psnr=summarize(self.psnr),
            is_score=MetricSummary(mean=is_mean, sem=is_std),
            n=len(self.l1),
        )


def summarize(values: Sequence[float]) -> MetricSummary:
    """Media ± error estándar (0 si hay una sola muestra)."""
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        raise EmptyDatasetError("No hay valores que resumir.")
    sem = float(array.std(ddof=1) / np.sqrt(array.size)) if array.size > 1 else 0.0
    return MetricSummary(mean=float(array.mean()), sem=sem)


def write_triplet_grid(
    x: torch.Tensor,
    x_translated: torch.Tensor,
    x_gt: torch.Tensor,
    path: Union[str, Path],
    max_rows: int = GRID_ROWS,
) -> Path:
    """
    Rejilla PNG con una fila por corte: (entrada, traducción, verdad de
    referencia). Las imágenes se mapean de [-1, 1] a [0, 1].
    """
    if not (x.shape == x_translated.shape == x_gt.shape):
        raise ShapeMismatchError(
            f"Triplete con formas distintas: {tuple(x.shape)}, {tuple(x_translated.shape)}, {tuple(x_gt.shape)}"
        )
    rows = min(max_rows, x.shape[0])
    tiles = torch.stack([x[:rows], x_translated[:rows], x_gt[:rows]], dim=1).flatten(0, 1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_image((tiles.clamp(-1, 1) + 1) / 2, path, nrow=3, padding=2)
    return path


def _stack_modality(index: Sequence[PairedSlice], modality_index: int) -> torch.Tensor:
    return torch.from_numpy(np.stack([s.images[modality_index] for s in index])).unsqueeze(1)


@torch.no_grad()
def _run_direction(bundle: ModelBundle, x: torch.Tensor, source: int, target: int):
    """Traduce por lotes y devuelve (x̃_y, x̃_x, Enc(x), Enc(x̃_y))."""
    M = bundle.config.num_modalities
    translated, cycled, distances = [], [], []
    for start in range(0, x.shape[0], EVAL_BATCH_SIZE):
        chunk = x[start:start + EVAL_BATCH_SIZE]
        n = chunk.shape[0]
        m_y = one_hot_batch([target] * n, M)
        m_x = one_hot_batch([source] * n, M)
        z_real = bundle.encoder(chunk)
        x_y = bundle.decoder(z_real, m_y)
        z_fake = bundle.encoder(x_y)
        translated.append(x_y)
        cycled.append(bundle.decoder(z_fake, m_x))
        distances.append((z_fake - z_real).abs().flatten(1).mean(dim=1))
    return torch.cat(translated), torch.cat(cycled), torch.cat(distances)


def _default_classifier(bundle: ModelBundle, manifest: DatasetManifest, fallback: List[PairedSlice]) -> ModalityClassifier:
    train_index = build_paired_index(manifest.select(Split.TRAIN_TRANSLATOR))
    if not train_index:
        logger.warning("Sin cortes de entrenamiento: el clasificador de IS se entrena con la partición evaluada.")
        train_index = fallback
    return train_modality_classifier(train_index, bundle.config)


def evaluate_dataset(
    bundle: ModelBundle,
    manifest: DatasetManifest,
    split: Union[Split, str],
    report_path: Optional[Union[str, Path]] = None,
    classifier: Optional[Union[ModalityClassifier, ProbabilityModel]] = None,
    include_self: bool = False,
    checkpoint_hash: Optional[str] = None,
    grid_dir: Optional[Union[str, Path]] = None,
    config_echo: Optional[Dict[str, Any]] = None,
    is_splits: int = 1,
) -> MetricsReport:
    """
    Traduce cada corte de la partición en todas las direcciones cruzadas
    (y las de auto-reconstrucción si `include_self`) con el mismo checkpoint
    y escribe el reporte JSON en `report_path`.

    El bloque `diagnostics` resume, sobre las direcciones cruzadas, el L1 de
    ciclo, el L1 de traducción (escala unitaria) y la distancia |Enc(x̃_y) − Enc(x)|;
    `self_ssim` es el SSIM medio de las M auto-reconstrucciones.
    """
    split = Split(split)
    index = build_paired_index(manifest.select(split))
    if not index:
        raise EmptyDatasetError(f"La partición '{split.value}' no tiene cortes válidos.")

    M = bundle.config.num_modalities
    if index[0].M != M:
        raise ShapeMismatchError(f"El dataset tiene M={index[0].M} y el modelo M={M}")
    names = manifest.modalities

    if classifier is None:
        classifier = _default_classifier(bundle, manifest, index)
    probability_model = classifier.predict_proba if isinstance(classifier, ModalityClassifier) else classifier

    bundle.eval()
    directions: Dict[str, DirectionMetrics] = {}
    pooled, baseline = _Accumulator(), _Accumulator()
    cycle_l1, translation_l1, disen, self_ssim = [], [], [], []

    with log_time(f"evaluación de {len(index)} cortes ({split.value})"):
        for source in range(M):
            x = _stack_modality(index, source)
            for target in range(M):
                gt = _stack_modality(index, target)
                translated, cycled, distance = _run_direction(bundle, x, source, target)

                acc = _Accumulator(images=[translated])
                for fake, real in zip(translated.squeeze(1).numpy(), gt.squeeze(1).numpy()):
                    acc.add(fake, real)

                if source == target:
                    self_ssim.extend(acc.ssim)
                    if include_self:
                        directions[direction_key(names[source], names[target])] = acc.summarize(probability_model, is_splits)
                    continue

                key = direction_key(names[source], names[target])
                directions[key] = acc.summarize(probability_model, is_splits)
                pooled.extend(acc)

                copy = _Accumulator(images=[x])
                for real_x, real in zip(x.squeeze(1).numpy(), gt.squeeze(1).numpy()):
                    copy.add(real_x, real)
                baseline.extend(copy)

                cycle_l1.extend((cycled - x).abs().flatten(1).mean(dim=1).div(2).tolist())
                translation_l1.extend(np.asarray(acc.l1) / 255.0)
                disen.extend(distance.tolist())

                if grid_dir is not None:
                    write_triplet_grid(x, translated, gt, Path(grid_dir) / f"{names[source]}_to_{names[target]}.png")

                logger.info(
                    f"{key}: L1={directions[key].l1.mean:.2f} SSIM={directions[key].ssim.mean:.4f} "
                    f"PSNR={directions[key].psnr.mean:.2f} IS={directions[key].is_score.mean:.3f}"
                )

        report = MetricsReport(
            directions=directions,
            aggregate=pooled.summarize(probability_model, is_splits),
            baseline=baseline.summarize(probability_model, is_splits),
            diagnostics=EvaluationDiagnostics(
                cycle_l1=float(np.mean(cycle_l1)),
                translation_l1=float(np.mean(translation_l1)),
                disen_distance=float(np.mean(disen)),
                self_ssim=float(np.mean(self_ssim)),
            ),
            n_samples=len(index),
            checkpoint_hash=checkpoint_hash,
            split=split.value,
            config=config_echo if config_echo is not None else {"model": bundle.config.model_dump(mode="json")},
        )

    if report_path is not None:
        write_json(report_path, report.to_json_dict())
        logger.info(f"Reporte de evaluación escrito en {report_path}.")
    return report
