# ucdmt/pipelines/registry.py

from typing import Dict, Type

from ucdmt.pipelines.abstractions import BaseStage

# nombre de etapa (pipeline.yml / subcomando de la CLI) -> clase
_stage_registry: Dict[str, Type[BaseStage]] = {}


def register(stage_name: str):
    """
    Registra una clase de etapa bajo `stage_name`. El mismo nombre sirve en
    pipeline.yml y como subcomando:

        @register("evaluate")
        class EvaluateStage(BaseStage):
            ...
    """
    def decorator(cls: Type[BaseStage]):
        if stage_name in _stage_registry:
            raise ValueError(f"La etapa '{stage_name}' ya ha sido registrada.")
        _stage_registry[stage_name] = cls
        return cls
    return decorator


def get_stage(stage_name: str) -> Type[BaseStage]:
    try:
        return _stage_registry[stage_name]
    except KeyError:
        known = ", ".join(sorted(_stage_registry)) or "ninguna"
        raise KeyError(f"La etapa '{stage_name}' no se encuentra en el registro (disponibles: {known}).") from None


def get_full_registry() -> Dict[str, Type[BaseStage]]:
    return _stage_registry.copy()
