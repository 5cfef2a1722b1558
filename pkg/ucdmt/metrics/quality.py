# ucdmt/metrics/quality.py
"""
Métricas de calidad por imagen: L1 medio, SSIM y PSNR.

SSIM y PSNR reciben imágenes ya mapeadas a [0, 1]; `metric_l1` recibe
imágenes en [-1, 1] y las reescala según `scale`.
"""

from __future__ import annotations
from typing import Union

import numpy as np
import torch
from skimage.metrics import structural_similarity

from ucdmt.core.errors import ImageTooSmallError, ShapeMismatchError
from ucdmt.schemas.enums import MetricScale

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
PSNR_CAP_DB = 100.0
PSNR_MIN_MSE = 1e-10

ArrayLike = Union[np.ndarray, torch.Tensor]


def _as_2d(image: ArrayLike) -> np.ndarray:
    if isinstance(image, torch.Tensor):
        image = image.detach().cpu().numpy()
    array = np.asarray(image, dtype=np.float64)
    array = np.squeeze(array)
    if array.ndim != 2:
        raise ShapeMismatchError(f"Se esperaba una imagen 2-D, se recibió forma {array.shape}")
    return array


def _pair(a: ArrayLike, b: ArrayLike):
    a2, b2 = _as_2d(a), _as_2d(b)
    if a2.shape != b2.shape:
        raise ShapeMismatchError(f"Formas distintas: {a2.shape} vs {b2.shape}")
    return a2, b2


def to_unit(image: ArrayLike) -> np.ndarray:
    """[-1, 1] -> [0, 1]."""
    return (_as_2d(image) + 1.0) / 2.0


def metric_l1(
    x_fake: ArrayLike,
    x_gt: ArrayLike,
    scale: Union[MetricScale, str] = MetricScale.BYTE,
) -> float:
    """Error L1 medio tras reescalar de [-1, 1] a [0, 1] (unit) o [0, 255] (byte)."""
    a, b = _pair(x_fake, x_gt)
    factor = 255.0 if MetricScale(scale) == MetricScale.BYTE else 1.0
    return float(np.mean(np.abs(a - b)) / 2.0 * factor)


def metric_ssim(a: ArrayLike, b: ArrayLike, data_range: float = 1.0) -> float:
    """
    SSIM de escala única: ventana gaussiana 11x11 (σ=1.5), K1=0.01, K2=0.03,
    promedio sobre las ventanas completamente contenidas en la imagen.
    """
    x, y = _pair(a, b)
    if min(x.shape) < SSIM_WINDOW:
        raise ImageTooSmallError(f"La imagen {x.shape} es menor que la ventana SSIM de {SSIM_WINDOW}")
    # truncate=3.5 con σ=1.5 da radio 5: ventana de 11; skimage recorta el borde antes de promediar
    return float(
        structural_similarity(
            x, y,
            data_range=data_range,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            use_sample_covariance=False,
            K1=SSIM_K1,
            K2=SSIM_K2,
        )
    )


def metric_psnr(a: ArrayLike, b: ArrayLike, data_range: float = 1.0) -> float:
    """10·log10(R²/MSE) en dB, con tope de 100 dB si MSE < 1e-10."""
    x, y = _pair(a, b)
    mse = float(np.mean((x - y) ** 2))
    if mse < PSNR_MIN_MSE:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 10.0 * np.log10(data_range ** 2 / mse)))
