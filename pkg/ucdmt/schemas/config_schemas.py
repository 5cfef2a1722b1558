# ucdmt/schemas/config_schemas.py

from __future__ import annotations
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import DisenVariant, GanMode


class LossWeights(BaseModel):
    """
    Pesos del objetivo compuesto. Por defecto: alpha=1, beta=0.5, lambda1=1, lambda2=1.
    """
    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(1.0, ge=0, description="Peso del L1 de reconstrucción cíclica.")
    beta: float = Field(0.5, ge=0, description="Peso adversarial del generador.")
    lambda1: float = Field(1.0, ge=0, description="Peso de clasificación de modalidad (generador).")
    lambda2: float = Field(1.0, ge=0, description="Peso de clasificación de modalidad (discriminador).")
    w_disen: float = Field(1.0, ge=0, description="Peso del término de desenredo.")

    # Ablación "sin desenredo": el término se reporta pero no entra al total
    disen_off: bool = False
    disen_variant: DisenVariant = DisenVariant.TRANSLATED
    gan_mode: GanMode = GanMode.NONSATURATING

    # True: el discriminador también clasifica las imágenes sintéticas con m_y
    dmc_on_fakes: bool = True


class ModelConfig(BaseModel):
    """Hiperparámetros de arquitectura de Enc, Dec y Dis."""
    model_config = ConfigDict(extra="forbid")

    num_modalities: int = Field(4, ge=1)
    image_size: int = Field(64, ge=16)
    base_channels: int = Field(32, ge=1)
    latent_channels: int = Field(64, ge=1)
    n_res_blocks: int = Field(2, ge=0)
    dis_channels: int = Field(32, ge=1)

    @model_validator(mode="after")
    def _check_image_size(self) -> "ModelConfig":
        # Enc reduce /4 y Dis /8
        if self.image_size % 8 != 0:
            raise ValueError(f"image_size debe ser múltiplo de 8, se recibió {self.image_size}")
        return self


class TrainConfig(BaseModel):
    """
    Configuración completa de un entrenamiento. Las claves desconocidas se
    rechazan en todos los niveles.
    """
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    weights: LossWeights = Field(default_factory=LossWeights)
    model: ModelConfig = Field(default_factory=ModelConfig)
    lr_gen: float = Field(1e-3, gt=0)
    lr_dis: float = Field(1e-4, gt=0)
    momentum_beta1: float = Field(0.5, ge=0, lt=1)
    batch_size: int = Field(16, gt=0)
    epochs: int = Field(60, gt=0)
    seed: int = 0
    log_every: int = Field(10, gt=0)
    checkpoint_every: int = Field(200, gt=0)

    @model_validator(mode="after")
    def _check_batch_divisibility(self) -> "TrainConfig":
        if self.batch_size % self.model.num_modalities != 0:
            raise ValueError(
                f"batch_size={self.batch_size} no es divisible entre M={self.model.num_modalities}"
            )
        return self
