# ucdmt/core/log.py

import logging
import time
from contextlib import contextmanager

logger = logging.getLogger("ucdmt")
logger.setLevel(logging.INFO)
handler = logging.StreamHandler()
formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
handler.setFormatter(formatter)
logger.addHandler(handler)


def set_log_level(level: str) -> None:
    """Ajusta el nivel del logger del paquete (ej. 'DEBUG', 'INFO')."""
    logger.setLevel(level.upper())


@contextmanager
def log_time(task_name: str):
    start = time.time()
    logger.info(f"Iniciando: {task_name}")
    try:
        yield
    finally:
        elapsed = time.time() - start
        logger.info(f"Completado: {task_name} en {elapsed:.2f}s")
