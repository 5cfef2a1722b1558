# ucdmt/losses/objectives.py
"""
Objetivos de entrenamiento: L1 de traducción, adversarial (D y G),
clasificación de modalidad, reconstrucción cíclica, desenredo y los
objetivos compuestos del generador y del discriminador.

Todas las reducciones L1 son medias sobre píxeles y lote.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Dict, Union

import torch
import torch.nn.functional as F

from ucdmt.core.errors import InvalidCodeError, ShapeMismatchError
from ucdmt.models.networks import validate_codes
from ucdmt.schemas.config_schemas import LossWeights
from ucdmt.schemas.enums import GanMode
from ucdmt.schemas.models import ModalityCode


def _check_same_shape(a: torch.Tensor, b: torch.Tensor, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{what}: formas distintas {tuple(a.shape)} vs {tuple(b.shape)}")


def translation_l1(x_fake: torch.Tensor, x_real: torch.Tensor) -> torch.Tensor:
    """|x̃_y − x_y| promediado."""
    _check_same_shape(x_fake, x_real, "translation_l1")
    return torch.mean(torch.abs(x_fake - x_real))


def cycle_reconstruction_loss(x_cycled: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
    """|x̃_x − x| con x̃_x = Dec(Enc(x̃_y), m_x), misma fórmula que translation_l1."""
    _check_same_shape(x_cycled, x, "cycle_reconstruction_loss")
    return torch.mean(torch.abs(x_cycled - x))


def disentanglement_loss(z_fake: torch.Tensor, z_real: torch.Tensor) -> torch.Tensor:
    """|Enc(x̃_y) − Enc(x)| sobre todos los elementos; el gradiente fluye por ambos argumentos."""
    _check_same_shape(z_fake, z_real, "disentanglement_loss")
    return torch.mean(torch.abs(z_fake - z_real))


def adversarial_loss_d(real_scores: torch.Tensor, fake_scores: torch.Tensor) -> torch.Tensor:
    """
    −[E log σ(real) + E log(1 − σ(fake))], con el objetivo real x_y en el
    primer término. Se evalúa en forma log-sum-exp estable.
    """
    _check_same_shape(real_scores, fake_scores, "adversarial_loss_d")
    real_term = F.binary_cross_entropy_with_logits(real_scores, torch.ones_like(real_scores))
    fake_term = F.binary_cross_entropy_with_logits(fake_scores, torch.zeros_like(fake_scores))
    return real_term + fake_term


def adversarial_loss_g(
    fake_scores: torch.Tensor,
    mode: Union[GanMode, str] = GanMode.NONSATURATING,
) -> torch.Tensor:
    """
    nonsaturating: −E log σ(fake)
    minimax:       +E log(1 − σ(fake))
    """
    mode = GanMode(mode)
    if mode == GanMode.NONSATURATING:
        return F.binary_cross_entropy_with_logits(fake_scores, torch.ones_like(fake_scores))
    # log(1 − σ(s)) = −softplus(s)
    return torch.mean(-F.softplus(fake_scores))


def modality_classification_loss(
    logits: torch.Tensor,
    target: Union[ModalityCode, torch.Tensor],
) -> torch.Tensor:
    """Entropía cruzada −log softmax(logits)[argmax(target)], promediada en el lote."""
    if isinstance(target, ModalityCode):
        target = target.to_tensor()
    squeeze = logits.dim() == 1
    if squeeze:
        logits = logits.unsqueeze(0)
    M = logits.shape[-1]
    if target.shape[-1] != M:
        raise InvalidCodeError(f"Código de longitud {target.shape[-1]} para {M} clases.")
    target = validate_codes(target, M)
    if target.shape[0] != logits.shape[0]:
        raise ShapeMismatchError(f"{target.shape[0]} códigos para {logits.shape[0]} vectores de logits")
    return F.cross_entropy(logits, target.argmax(dim=1))


@dataclass
class LossBreakdown:
    """Desglose del objetivo del generador; `total` es el único que se retropropaga."""
    l1_translation: torch.Tensor
    l1_cycle: torch.Tensor
    adv: torch.Tensor
    mc: torch.Tensor
    disen: torch.Tensor
    total: torch.Tensor

    def as_floats(self) -> Dict[str, float]:
        return {
            "l1_translation": float(self.l1_translation.detach()),
            "l1_cycle": float(self.l1_cycle.detach()),
            "adv": float(self.adv.detach()),
            "mc": float(self.mc.detach()),
            "disen": float(self.disen.detach()),
            "total": float(self.total.detach()),
        }

    def is_finite(self) -> bool:
        return all(torch.isfinite(v.detach()).all() for v in vars(self).values())


def generator_objective(
    l1_translation: torch.Tensor,
    l1_cycle: torch.Tensor,
    adv: torch.Tensor,
    mc: torch.Tensor,
    disen: torch.Tensor,
    w: LossWeights,
) -> LossBreakdown:
    """
    total = L1 + α·L1_ciclo + β·adv + λ1·mc + w_disen·disen.
    Con `disen_off` el término de desenredo se reporta pero queda fuera del total.
    """
    total = l1_translation + w.alpha * l1_cycle + w.beta * adv + w.lambda1 * mc
    if not w.disen_off:
        total = total + w.w_disen * disen
    return LossBreakdown(
        l1_translation=l1_translation,
        l1_cycle=l1_cycle,
        adv=adv,
        mc=mc,
        disen=disen,
        total=total,
    )


def discriminator_objective(adv_d: torch.Tensor, mc_real_fake: torch.Tensor, w: LossWeights) -> torch.Tensor:
    """adv_d + λ2·mc; adv_d ya lleva el signo de minimización."""
    return adv_d + w.lambda2 * mc_real_fake
