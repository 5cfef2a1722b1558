# ucdmt/main.py
"""
Punto de entrada de la línea de comandos.

Cada subcomando (phantom, train, translate, evaluate) es una etapa
registrada del pipeline; `pipeline` ejecuta una secuencia de etapas
declarada en YAML. Códigos de salida: 0 éxito, 1 error de validación,
2 error en tiempo de ejecución.
"""

from __future__ import annotations
import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from ucdmt.core.config import get_settings
from ucdmt.core.errors import CliUsageError, ConfigError, UcdmtError
from ucdmt.core.log import logger, set_log_level

# --- IMPORTACIÓN POR EFECTO SECUNDARIO ---
# Registra todas las etapas antes de que se busquen por nombre.
from ucdmt.pipelines import builtins  # noqa: F401
from ucdmt.pipelines import runner
from ucdmt.pipelines.registry import get_stage
from ucdmt.pipelines.stages.train import resolve_train_config
from ucdmt.schemas.enums import MODALITY_ORDER, GanMode, Split, StageStatus
from ucdmt.schemas.pipeline_schemas import PipelineRun

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

MODALITY_CHOICES = [m.value for m in MODALITY_ORDER]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser que lanza CliUsageError en lugar de terminar el proceso."""

    def error(self, message: str):
        raise CliUsageError(message)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    fmt = argparse.ArgumentDefaultsHelpFormatter

    common = _Parser(add_help=False)
    common.add_argument("--workers", type=int, default=settings.UCDMT_WORKERS,
                        help="Hilos de cómputo (1 = determinista)")
    common.add_argument("--log-level", default=settings.UCDMT_LOG_LEVEL, help="Nivel de logging")

    parser = _Parser(prog="ucdmt", description="Traducción multimodal condicional unificada.", formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom", parents=[common], formatter_class=fmt, help="Genera el dataset sintético")
    p.add_argument("--subjects", type=int, default=10, help="Número de sujetos")
    p.add_argument("--size", type=int, default=64, help="Lado de la imagen en píxeles")
    p.add_argument("--slices", type=int, default=8, help="Cortes por sujeto")
    p.add_argument("--seed", type=int, default=7, help="Semilla del generador")
    p.add_argument("--lesion-probability", type=float, default=0.5, help="Probabilidad de lesión por sujeto")
    p.add_argument("--noise-sigma", type=float, default=0.02, help="Desviación del ruido dentro de la cabeza")
    p.add_argument("--train-fraction", type=float, default=0.7, help="Fracción de sujetos de entrenamiento")
    p.add_argument("--out", required=True, help="Directorio de salida del dataset")

    p = sub.add_parser("train", parents=[common], formatter_class=fmt, help="Entrena Enc/Dec/Dis")
    p.add_argument("--config", default=None, help="TrainConfig JSON (ausente = valores por defecto)")
    p.add_argument("--data", required=True, help="Directorio del dataset (con manifest.json)")
    p.add_argument("--out", required=True, help="Directorio de la ejecución")
    p.add_argument("--disen-off", action="store_true", help="Ablación sin término de desenredo")
    p.add_argument("--gan-mode", choices=[g.value for g in GanMode], default=None,
                   help="Pérdida adversarial del generador (por defecto, la del config)")
    p.add_argument("--resume", default=None, help="Checkpoint desde el que continuar")
    p.add_argument("--max-steps", type=int, default=None, help="Detiene el entrenamiento en este paso")

    p = sub.add_parser("translate", parents=[common], formatter_class=fmt, help="Traduce un sujeto")
    p.add_argument("--checkpoint", required=True, help="Checkpoint UCDMT1")
    p.add_argument("--input", required=True, help="Directorio del dataset de entrada")
    p.add_argument("--subject", required=True, help="Identificador del sujeto")
    p.add_argument("--from", dest="source", required=True, choices=MODALITY_CHOICES, help="Modalidad de entrada")
    p.add_argument("--to", dest="target", default="all", choices=MODALITY_CHOICES + ["all"],
                   help="Modalidad objetivo ('all' = complementarias)")
    p.add_argument("--out", required=True, help="Directorio de salida")
    p.add_argument("--grid", action="store_true", help="Escribe rejillas PNG (entrada, salida, referencia)")

    p = sub.add_parser("evaluate", parents=[common], formatter_class=fmt, help="Evalúa un checkpoint")
    p.add_argument("--checkpoint", required=True, help="Checkpoint UCDMT1")
    p.add_argument("--data", required=True, help="Directorio del dataset")
    p.add_argument("--split", default=Split.TEST.value, choices=[s.value for s in Split], help="Partición")
    p.add_argument("--report", required=True, help="Ruta del reporte JSON")
    p.add_argument("--include-self", action="store_true", help="Incluye las direcciones de auto-reconstrucción")
    p.add_argument("--grid-dir", default=None, help="Directorio para las rejillas PNG por dirección")

    p = sub.add_parser("pipeline", parents=[common], formatter_class=fmt, help="Ejecuta un pipeline YAML")
    p.add_argument("--config", default=settings.UCDMT_PIPELINE_CONFIG, help="Archivo pipeline.yml")
    p.add_argument("--workdir", default=None, help="Directorio base de la ejecución")

    return parser


def _stage_params(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "phantom":
        return {
            "subjects": args.subjects, "size": args.size, "slices": args.slices, "seed": args.seed,
            "lesion_probability": args.lesion_probability, "noise_sigma": args.noise_sigma,
            "train_fraction": args.train_fraction, "out": args.out,
        }
    if args.command == "train":
        return {
            "config": args.config, "data": args.data, "out": args.out, "disen_off": args.disen_off,
            "gan_mode": args.gan_mode, "resume": args.resume, "max_steps": args.max_steps,
        }
    if args.command == "translate":
        return {
            "checkpoint": args.checkpoint, "input": args.input, "subject": args.subject,
            "from": args.source, "to": args.target, "out": args.out, "grid": args.grid,
        }
    return {
        "checkpoint": args.checkpoint, "data": args.data, "split": args.split, "report": args.report,
        "include_self": args.include_self, "grid_dir": args.grid_dir,
    }


def _echo(command: str, effective: Dict[str, Any]) -> None:
    print(json.dumps({"command": command, "effective_config": effective}, sort_keys=True, default=str))


def _run_stage(args: argparse.Namespace, ctx: Dict[str, Any]) -> int:
    params = _stage_params(args)
    effective: Dict[str, Any] = dict(params)
    if args.command == "train" and not args.resume:
        # se valida antes de tocar el disco: un config inválido sale con código 1
        effective["train_config"] = resolve_train_config(params, ctx.get("seed_override")).model_dump(mode="json")
    _echo(args.command, effective)

    stage_class = get_stage(args.command)
    run = stage_class(args.command, params, ctx).execute(PipelineRun())
    if run.artifacts:
        print(json.dumps(run.artifacts, sort_keys=True, default=str))
    return EXIT_OK


def _run_pipeline(args: argparse.Namespace, ctx: Dict[str, Any]) -> int:
    if args.workdir:
        ctx["workdir"] = args.workdir
    _echo("pipeline", {"config": args.config, **ctx})
    result = runner.run(args.config, ctx=ctx)
    print(json.dumps(result.artifacts, sort_keys=True, default=str))
    return EXIT_OK if result.status == StageStatus.SUCCESS else EXIT_RUNTIME


def _fail(code: int, message: str) -> int:
    print(f"error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Analiza `argv`, ejecuta el subcomando y devuelve el código de salida. Nunca propaga excepciones."""
    settings = get_settings()
    try:
        args = build_parser().parse_args(argv)
        set_log_level(args.log_level)
        if args.workers < 1:
            raise CliUsageError(f"argument --workers: debe ser ≥ 1, se recibió {args.workers}")

        ctx: Dict[str, Any] = {"workers": args.workers, "seed_override": settings.UCDMT_SEED}
        if args.command == "pipeline":
            return _run_pipeline(args, ctx)
        return _run_stage(args, ctx)
    except (CliUsageError, ConfigError) as e:
        return _fail(EXIT_VALIDATION, str(e))
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        return _fail(EXIT_VALIDATION, f"{loc}: {first['msg']}")
    except (UcdmtError, OSError) as e:
        return _fail(EXIT_RUNTIME, f"{type(e).__name__}: {e}")
    except Exception as e:
        logger.error(f"Error inesperado: {e}", exc_info=True)
        return _fail(EXIT_RUNTIME, f"{type(e).__name__}: {e}")


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
