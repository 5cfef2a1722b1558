# ucdmt/models/bundle.py

from __future__ import annotations
import logging
from typing import Dict, Iterator, Optional, Union

import torch
import torch.nn as nn

from ucdmt.core.errors import ShapeMismatchError
from ucdmt.models.networks import Decoder, Discriminator, DiscriminatorOutput, Encoder, init_weights
from ucdmt.schemas.config_schemas import ModelConfig
from ucdmt.schemas.models import ModalityCode

logger = logging.getLogger(__name__)

CodeLike = Union[ModalityCode, torch.Tensor]


class ModelBundle:
    """
    Parámetros de Enc, Dec y Dis. Un único conjunto Enc-Dec sirve a las
    M(M-1) direcciones cruzadas y a las M de auto-reconstrucción.
    """

    def __init__(
        self,
        config: ModelConfig,
        encoder: Optional[nn.Module] = None,
        decoder: Optional[nn.Module] = None,
        discriminator: Optional[nn.Module] = None,
    ):
        self.config = config
        self.encoder = encoder if encoder is not None else Encoder(config)
        self.decoder = decoder if decoder is not None else Decoder(config)
        self.discriminator = discriminator if discriminator is not None else Discriminator(config)
        self.train_mode = True
        # instrumentación: número de evaluaciones del discriminador
        self.dis_calls = 0
        self.discriminator.register_forward_pre_hook(self._count_dis_call)

    def _count_dis_call(self, module, inputs) -> None:
        self.dis_calls += 1

    @classmethod
    def build(cls, config: ModelConfig, seed: Optional[int] = None) -> "ModelBundle":
        """Construye e inicializa las tres redes (normal(0, 0.02), sesgos a cero)."""
        if seed is not None:
            torch.manual_seed(seed)
        bundle = cls(config)
        for module in bundle.modules().values():
            module.apply(init_weights)
        logger.debug(f"ModelBundle inicializado: {bundle.parameter_count()} parámetros.")
        return bundle

    def modules(self) -> Dict[str, nn.Module]:
        return {"enc": self.encoder, "dec": self.decoder, "dis": self.discriminator}

    def generator_parameters(self) -> Iterator[nn.Parameter]:
        yield from self.encoder.parameters()
        yield from self.decoder.parameters()

    def discriminator_parameters(self) -> Iterator[nn.Parameter]:
        yield from self.discriminator.parameters()

    def named_tensors(self) -> Dict[str, torch.Tensor]:
        """Parámetros y buffers con nombre calificado ('enc/model.0.weight', ...)."""
        tensors: Dict[str, torch.Tensor] = {}
        for prefix, module in self.modules().items():
            for name, tensor in module.state_dict().items():
                tensors[f"{prefix}/{name}"] = tensor
        return tensors

    def parameter_count(self) -> int:
        return sum(p.numel() for m in self.modules().values() for p in m.parameters())

    def train(self) -> "ModelBundle":
        for module in self.modules().values():
            module.train()
        self.train_mode = True
        return self

    def eval(self) -> "ModelBundle":
        for module in self.modules().values():
            module.eval()
        self.train_mode = False
        return self


def _as_code_tensor(code: CodeLike) -> torch.Tensor:
    if isinstance(code, ModalityCode):
        return code.to_tensor()
    return code


def _as_batch(x: torch.Tensor, expected_dims: int = 4):
    """Acepta (C, H, W) o (N, C, H, W); devuelve el lote y si hay que quitar el eje N."""
    if x.dim() == expected_dims - 1:
        return x.unsqueeze(0), True
    if x.dim() == expected_dims:
        return x, False
    raise ShapeMismatchError(f"Dimensión de entrada no soportada: {tuple(x.shape)}")


def encode(bundle: ModelBundle, x: torch.Tensor) -> torch.Tensor:
    """z = Enc(x). Entrada (1, H, W) -> (C_z, H/4, W/4); también acepta lotes."""
    batch, squeeze = _as_batch(x)
    z = bundle.encoder(batch)
    return z.squeeze(0) if squeeze else z


def decode(bundle: ModelBundle, z: torch.Tensor, m_y: CodeLike) -> torch.Tensor:
    """x̃ = Dec(z, m_y), acotada a [-1, 1] por la tanh final."""
    batch, squeeze = _as_batch(z)
    out = bundle.decoder(batch, _as_code_tensor(m_y))
    return out.squeeze(0) if squeeze else out


def discriminate(bundle: ModelBundle, x: torch.Tensor) -> DiscriminatorOutput:
    """Salida del discriminador: mapa de realismo por parches y logits de modalidad."""
    batch, squeeze = _as_batch(x)
    out = bundle.discriminator(batch)
    if squeeze:
        return DiscriminatorOutput(out.adv_map.squeeze(0), out.modality_logits.squeeze(0))
    return out
