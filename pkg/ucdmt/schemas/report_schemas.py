# ucdmt/schemas/report_schemas.py

from __future__ import annotations
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class MetricSummary(BaseModel):
    """Media ± dispersión (error estándar; desviación entre splits para IS)."""
    mean: float
    sem: float = 0.0


class DirectionMetrics(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    l1: MetricSummary
    ssim: MetricSummary
    psnr: MetricSummary
    # 'is' es palabra reservada en Python
    is_score: MetricSummary = Field(alias="is")
    n: int


class EvaluationDiagnostics(BaseModel):
    """Magnitudes auxiliares sobre las direcciones cruzadas."""
    cycle_l1: float
    translation_l1: float
    disen_distance: float
    self_ssim: Optional[float] = None


class MetricsReport(BaseModel):
    """
    Reporte de evaluación: L1, SSIM, PSNR e IS por
    dirección y agregados, más la línea base de copia de la entrada.
    """
    model_config = ConfigDict(populate_by_name=True)

    directions: Dict[str, DirectionMetrics]
    aggregate: DirectionMetrics
    baseline: DirectionMetrics
    diagnostics: EvaluationDiagnostics
    n_samples: int
    checkpoint_hash: Optional[str] = None
    split: str
    config: Dict[str, Any] = Field(default_factory=dict)

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def direction_key(source: str, target: str) -> str:
    return f"{source}→{target}"
