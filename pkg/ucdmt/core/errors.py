# ucdmt/core/errors.py

from typing import Any, Dict, Optional


class UcdmtError(Exception):
    """Excepción base de todo el paquete."""
    pass


class ShapeMismatchError(UcdmtError, ValueError):
    """Dimensiones incompatibles entre tensores, volúmenes o configuración."""
    pass


class InvalidCodeError(UcdmtError, ValueError):
    """El código de modalidad no es un vector one-hot válido."""
    pass


class IndivisibleBatchError(UcdmtError, ValueError):
    """El tamaño de lote no es divisible entre el número de modalidades."""
    pass


class MissingModalityError(UcdmtError):
    """Un sujeto del manifiesto no tiene alguno de los M archivos de modalidad."""
    pass


class MissingSubjectError(UcdmtError):
    pass


class EmptyDatasetError(UcdmtError):
    """No hay cortes válidos en la partición solicitada."""
    pass


class InvalidVolumeError(UcdmtError, ValueError):
    """Volumen vacío o con valores no finitos."""
    pass


class IoFailureError(UcdmtError, OSError):
    pass


class CorruptCheckpointError(UcdmtError):
    """Firma incorrecta, cabecera ilegible o archivo truncado."""
    pass


class ImageTooSmallError(UcdmtError, ValueError):
    pass


class InvalidDistributionError(UcdmtError, ValueError):
    pass


class EmptySetError(UcdmtError, ValueError):
    pass


class StageError(UcdmtError):
    """Fallo de una etapa del pipeline."""
    pass


class ConfigError(UcdmtError):
    """Configuración inválida. `key_path` indica la clave culpable (ej. 'weights.alpha')."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        self.message = message
        super().__init__(f"{key_path}: {message}")


class NonFiniteLossError(UcdmtError):
    """
    Una pérdida dejó de ser finita. Se conserva el paso y el desglose para el
    volcado de diagnóstico.
    """

    def __init__(self, step: int, losses: Dict[str, Any], phase: Optional[str] = None):
        self.step = step
        self.losses = losses
        self.phase = phase
        super().__init__(f"Pérdida no finita en el paso {step} ({phase or 'desconocido'}): {losses}")


class CliUsageError(UcdmtError):
    """Invocación inválida de la línea de comandos (flag desconocido, valor inválido)."""
    pass
