# ucdmt/metrics/inception.py
"""
Inception score con clasificador inyectable.

La red Inception canónica está pensada para imágenes naturales; aquí el
clasificador por defecto es un clasificador de modalidad pequeño (mismo
tronco que Dis + softmax) entrenado con imágenes reales. Por eso el IS
reportado NO es comparable con el IS calculado con Inception sobre imágenes naturales.

En los fantomas T1 y T1ce solo difieren dentro de la lesión, así que incluso
las imágenes reales quedan por debajo de M: sin lesiones el techo es 2√2 ≈ 2.83.
"""

from __future__ import annotations
import copy
import logging
from typing import Callable, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from scipy.stats import entropy

from ucdmt.core.errors import EmptySetError, InvalidDistributionError
from ucdmt.core.log import log_time
from ucdmt.models.networks import DiscriminatorTrunk, ModalityHead, init_weights
from ucdmt.schemas.config_schemas import ModelConfig
from ucdmt.schemas.models import PairedSlice

logger = logging.getLogger(__name__)

DISTRIBUTION_TOLERANCE = 1e-5

# Parada temprana del clasificador de IS sobre la entropía cruzada en reserva
CLASSIFIER_PATIENCE = 8
CLASSIFIER_HOLDOUT_FRACTION = 0.2

# imágenes (N, 1, H, W) -> probabilidades (N, M)
ProbabilityModel = Callable[[torch.Tensor], np.ndarray]


def _validate_probabilities(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise EmptySetError(f"Se esperaba una tabla (N, M) no vacía, se recibió {probs.shape}")
    if np.any(probs < 0) or not np.allclose(probs.sum(axis=1), 1.0, atol=DISTRIBUTION_TOLERANCE, rtol=0):
        raise InvalidDistributionError("Alguna p(y|x) no es una distribución de probabilidad válida.")
    return probs


def inception_score_from_probs(probs: np.ndarray, splits: int = 1) -> Tuple[float, float]:
    """
    exp(E_x KL(p(y|x) ‖ p(y))) por split, promediado: (media, desviación).
    """
    probs = _validate_probabilities(probs)
    if splits < 1 or splits > probs.shape[0]:
        raise ValueError(f"splits={splits} inválido para {probs.shape[0]} imágenes")

    scores = []
    for part in np.array_split(probs, splits):
        marginal = part.mean(axis=0)
        kl = [entropy(p, marginal) for p in part]
        scores.append(float(np.exp(np.mean(kl))))

    score, spread = float(np.mean(scores)), float(np.std(scores))
    M = probs.shape[1]
    # IS ∈ [1, M]
    assert 1.0 - 1e-6 <= score <= M + 1e-6, f"IS fuera de rango: {score}"
    return score, spread


def inception_score(
    images: Union[torch.Tensor, Sequence[torch.Tensor]],
    classifier: ProbabilityModel,
    splits: int = 1,
) -> Tuple[float, float]:
    if isinstance(images, (list, tuple)):
        if not images:
            raise EmptySetError("No hay imágenes para calcular el IS.")
        images = torch.stack([img if img.dim() == 3 else img.unsqueeze(0) for img in images])
    if images.shape[0] == 0:
        raise EmptySetError("No hay imágenes para calcular el IS.")
    return inception_score_from_probs(classifier(images), splits=splits)


class ModalityClassifier(nn.Module):
    """Tronco idéntico al del discriminador + cabeza de modalidad + softmax."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.trunk = DiscriminatorTrunk(config)
        self.head = ModalityHead(self.trunk.out_channels, config.num_modalities)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(x))

    @torch.no_grad()
    def predict_proba(self, x: torch.Tensor) -> np.ndarray:
        """p(y|x) en float64, forma (N, M)."""
        self.eval()
        return F.softmax(self(x).double(), dim=1).numpy()


def _labelled_images(index: Sequence[PairedSlice], M: int) -> Tuple[np.ndarray, np.ndarray]:
    images = np.concatenate([s.images for s in index])          # (n·M, H, W)
    labels = np.tile(np.arange(M), len(index))
    return images, labels


@torch.no_grad()
def _holdout_scores(model: ModalityClassifier, images: np.ndarray, labels: np.ndarray) -> Tuple[float, float]:
    """(pérdida de entropía cruzada, exactitud) sobre un conjunto fijo."""
    model.eval()
    logits = model(torch.from_numpy(images).unsqueeze(1))
    y = torch.from_numpy(labels).long()
    loss = F.cross_entropy(logits, y).item()
    accuracy = (logits.argmax(dim=1) == y).double().mean().item()
    return loss, accuracy


def train_modality_classifier(
    index: Sequence[PairedSlice],
    config: ModelConfig,
    max_epochs: int = 60,
    batch_size: int = 32,
    lr: float = 1e-3,
    seed: int = 0,
    patience: int = CLASSIFIER_PATIENCE,
    holdout_fraction: float = CLASSIFIER_HOLDOUT_FRACTION,
) -> ModalityClassifier:
    """
    Entrena el clasificador de modalidad con las imágenes reales del índice.

    Una fracción de los cortes (todas sus modalidades) queda en reserva. Se
    conservan los pesos con menor entropía cruzada en reserva y se detiene
    tras `patience` épocas sin mejora. Con muy pocos cortes la reserva es el
    propio conjunto de entrenamiento.
    """
    if not index:
        raise EmptySetError("No hay cortes para entrenar el clasificador de modalidad.")
    if max_epochs < 1:
        raise ValueError(f"max_epochs debe ser >= 1, se recibió {max_epochs}")

    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    model = ModalityClassifier(config)
    model.apply(init_weights)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr, betas=(0.5, 0.999))

    M = config.num_modalities
    slice_order = rng.permutation(len(index))
    n_holdout = int(len(index) * holdout_fraction)
    train_slices = [index[i] for i in slice_order[n_holdout:]]
    holdout_slices = [index[i] for i in slice_order[:n_holdout]] or train_slices
    images, labels = _labelled_images(train_slices, M)
    holdout_images, holdout_labels = _labelled_images(holdout_slices, M)

    best_loss, best_accuracy, best_epoch = float("inf"), 0.0, 0
    best_state = copy.deepcopy(model.state_dict())
    with log_time(f"entrenamiento del clasificador de modalidad ({len(images)} imágenes)"):
        for epoch in range(1, max_epochs + 1):
            model.train()
            order = rng.permutation(len(images))
            for start in range(0, len(order), batch_size):
                chunk = order[start:start + batch_size]
                x = torch.from_numpy(images[chunk]).unsqueeze(1)
                y = torch.from_numpy(labels[chunk]).long()
                loss = F.cross_entropy(model(x), y)
                optimizer.zero_grad(set_to_none=True)
                loss.backward()
                optimizer.step()

            holdout_loss, holdout_accuracy = _holdout_scores(model, holdout_images, holdout_labels)
            logger.debug(
                f"Clasificador de modalidad, época {epoch}/{max_epochs}: pérdida {loss.item():.4f}, "
                f"reserva {holdout_loss:.4f} (exactitud {holdout_accuracy:.3f})"
            )
            if holdout_loss < best_loss:
                best_loss, best_accuracy, best_epoch = holdout_loss, holdout_accuracy, epoch
                best_state = copy.deepcopy(model.state_dict())
            elif epoch - best_epoch >= patience:
                break

    model.load_state_dict(best_state)
    logger.info(
        f"Clasificador de modalidad: mejor época {best_epoch}/{epoch}, pérdida en reserva {best_loss:.4f}, "
        f"exactitud {best_accuracy:.3f} sobre {len(holdout_images)} imágenes."
    )
    return model.eval()
