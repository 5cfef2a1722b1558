# ucdmt/pipelines/builtins.py
# Importa todas las etapas del pipeline para asegurar su registro al arrancar.

from .stages import (
    ablation,
    acceptance,
    evaluate,
    phantom,
    train,
    translate,
)
