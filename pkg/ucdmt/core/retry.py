# ucdmt/core/retry.py

from tenacity import retry, stop_after_attempt, wait_exponential, retry_if_exception_type
from typing import Tuple, Type

# Errores de E/S que suelen resolverse solos (disco de red ocupado, señales).
# PermissionError y FileNotFoundError NO están aquí: reintentar no los arregla.
TRANSIENT_IO_ERRORS: Tuple[Type[Exception], ...] = (
    BlockingIOError,
    InterruptedError,
    TimeoutError,
)


def make_retry(
    exc_types: Tuple[Type[Exception], ...] = TRANSIENT_IO_ERRORS,
    max_retries: int = 3
):
    """
    Construye un decorador de reintentos para la librería Tenacity, parametrizado
    por los tipos de excepción que deben provocar un reintento y el número
    máximo de intentos.
    """
    return retry(
        reraise=True,  # Vuelve a lanzar la excepción original si todos los reintentos fallan
        stop=stop_after_attempt(max_retries),
        wait=wait_exponential(multiplier=0.1, min=0.1, max=2),
        retry=retry_if_exception_type(exc_types),
    )
