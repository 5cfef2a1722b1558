# ucdmt/models/networks.py

from __future__ import annotations
from typing import NamedTuple

import torch
import torch.nn as nn

from ucdmt.core.errors import InvalidCodeError, ShapeMismatchError
from ucdmt.schemas.config_schemas import ModelConfig

ENCODER_DOWNSAMPLING = 4
DISCRIMINATOR_DOWNSAMPLING = 8


def init_weights(module: nn.Module) -> None:
    """normal(0, 0.02) para pesos de convoluciones y lineales; sesgos a cero."""
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)


def check_image_batch(x: torch.Tensor, divisor: int, who: str) -> None:
    if x.dim() != 4 or x.shape[1] != 1:
        raise ShapeMismatchError(f"{who}: se esperaba (N, 1, H, W), se recibió {tuple(x.shape)}")
    height, width = x.shape[-2:]
    if height % divisor or width % divisor:
        raise ShapeMismatchError(
            f"{who}: H y W deben ser múltiplos de {divisor}, se recibió {height}x{width}"
        )


def validate_codes(codes: torch.Tensor, M: int) -> torch.Tensor:
    """Normaliza a (N, M) y verifica que cada fila sea one-hot."""
    if codes.dim() == 1:
        codes = codes.unsqueeze(0)
    if codes.dim() != 2 or codes.shape[1] != M:
        raise InvalidCodeError(f"Se esperaban códigos de longitud {M}, se recibió {tuple(codes.shape)}")
    is_binary = torch.all((codes == 0) | (codes == 1))
    if not bool(is_binary) or not bool(torch.all(codes.sum(dim=1) == 1)):
        raise InvalidCodeError(f"Código de modalidad no one-hot: {codes.tolist()}")
    return codes


def replicate_and_concat(z: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
    """
    Replica espacialmente el código de modalidad y lo concatena como canales
    extra al mapa de características: (N, C_z, h, w) -> (N, C_z + M, h, w).
    El canal C_z + k vale codes[k] en toda la imagen.
    """
    squeeze = z.dim() == 3
    if squeeze:
        z = z.unsqueeze(0)
    codes = validate_codes(codes, codes.shape[-1]).to(dtype=z.dtype, device=z.device)
    if codes.shape[0] == 1 and z.shape[0] > 1:
        codes = codes.expand(z.shape[0], -1)
    if codes.shape[0] != z.shape[0]:
        raise ShapeMismatchError(f"{codes.shape[0]} códigos para {z.shape[0]} mapas de características")

    planes = codes[:, :, None, None].expand(-1, -1, z.shape[2], z.shape[3])
    out = torch.cat([z, planes], dim=1)
    return out.squeeze(0) if squeeze else out


class ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv2d(channels, channels, kernel_size=3, padding=1),
            nn.InstanceNorm2d(channels, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, channels, kernel_size=3, padding=1),
            nn.InstanceNorm2d(channels, affine=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.block(x)


class Encoder(nn.Module):
    """
    Codificador agnóstico a la modalidad: su firma NO recibe código de
    modalidad. Salida (N, C_z, H/4, W/4).
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        c = config.base_channels
        layers = [
            nn.Conv2d(1, c, kernel_size=7, padding=3),
            nn.InstanceNorm2d(c, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(c, 2 * c, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(2 * c, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(2 * c, config.latent_channels, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(config.latent_channels, affine=True),
            nn.ReLU(inplace=True),
        ]
        layers += [ResidualBlock(config.latent_channels) for _ in range(config.n_res_blocks)]
        self.model = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        check_image_batch(x, ENCODER_DOWNSAMPLING, "Enc")
        return self.model(x)


class Decoder(nn.Module):
    """Decodificador condicionado: concatena el código replicado y reconstruye en [-1, 1]."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.num_modalities = config.num_modalities
        self.latent_channels = config.latent_channels
        c_in = config.latent_channels + config.num_modalities
        c = config.base_channels

        layers = [ResidualBlock(c_in) for _ in range(config.n_res_blocks)]
        layers += [
            nn.ConvTranspose2d(c_in, c, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(c, affine=True),
            nn.ReLU(inplace=True),
            nn.ConvTranspose2d(c, c // 2, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(c // 2, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(c // 2, 1, kernel_size=7, padding=3),
            nn.Tanh(),
        ]
        self.model = nn.Sequential(*layers)

    def forward(self, z: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
        if z.dim() != 4 or z.shape[1] != self.latent_channels:
            raise ShapeMismatchError(
                f"Dec: se esperaba (N, {self.latent_channels}, h, w), se recibió {tuple(z.shape)}"
            )
        if codes.shape[-1] != self.num_modalities:
            raise InvalidCodeError(
                f"Dec: el código tiene longitud {codes.shape[-1]}, se esperaba {self.num_modalities}"
            )
        return self.model(replicate_and_concat(z, codes))


class DiscriminatorOutput(NamedTuple):
    # puntuaciones de realismo sin sigmoide, (N, h, w)
    adv_map: torch.Tensor
    # (N, M)
    modality_logits: torch.Tensor


class DiscriminatorTrunk(nn.Module):
    """Pila PatchGAN de convoluciones 4x4 con stride 2 (1→c→2c→4c)."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        c = config.dis_channels
        self.out_channels = 4 * c
        self.model = nn.Sequential(
            nn.Conv2d(1, c, kernel_size=4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(c, 2 * c, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(2 * c, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(2 * c, 4 * c, kernel_size=4, stride=2, padding=1),
            nn.InstanceNorm2d(4 * c, affine=True),
            nn.LeakyReLU(0.2, inplace=True),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        check_image_batch(x, DISCRIMINATOR_DOWNSAMPLING, "Dis")
        return self.model(x)


class ModalityHead(nn.Module):
    """Pooling promedio global -> lineal a M logits."""

    def __init__(self, in_channels: int, num_modalities: int):
        super().__init__()
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.fc = nn.Linear(in_channels, num_modalities)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return self.fc(self.pool(features).flatten(1))


class Discriminator(nn.Module):
    """Un tronco compartido y dos cabezas: realismo por parches y clasificador de modalidad."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.trunk = DiscriminatorTrunk(config)
        self.adv_head = nn.Conv2d(self.trunk.out_channels, 1, kernel_size=1)
        self.mc_head = ModalityHead(self.trunk.out_channels, config.num_modalities)

    def forward(self, x: torch.Tensor) -> DiscriminatorOutput:
        features = self.trunk(x)
        return DiscriminatorOutput(
            adv_map=self.adv_head(features).squeeze(1),
            modality_logits=self.mc_head(features),
        )
