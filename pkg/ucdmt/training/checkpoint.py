# ucdmt/training/checkpoint.py
"""
Formato de checkpoint: firma "UCDMT1", longitud de cabecera (uint32 LE),
cabecera JSON (configuración, M, paso, estado de los RNG, tabla de tensores)
y a continuación los blobs de tensores con nombre (float32 little-endian).
"""

from __future__ import annotations
import base64
import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import torch
from pydantic import ValidationError

from ucdmt.core.errors import CorruptCheckpointError, IoFailureError
from ucdmt.data.io import write_bytes
from ucdmt.models.bundle import ModelBundle
from ucdmt.schemas.config_schemas import ModelConfig, TrainConfig
from ucdmt.training.state import TrainState, build_optimizer

logger = logging.getLogger(__name__)

MAGIC = b"UCDMT1"
FORMAT_VERSION = 1
_HEADER_LEN = struct.Struct("<I")


def _tensor_bytes(tensor: torch.Tensor) -> Tuple[str, List[int], bytes]:
    array = tensor.detach().cpu().numpy()
    array = array.astype(array.dtype.newbyteorder("<"), copy=False)
    return array.dtype.str, list(array.shape), np.ascontiguousarray(array).tobytes()


def _collect_tensors(state: TrainState) -> Dict[str, torch.Tensor]:
    tensors = dict(state.bundle.named_tensors())
    for group, optimizer in (("opt_gen", state.opt_gen), ("opt_dis", state.opt_dis)):
        for param_id, param_state in optimizer.state_dict()["state"].items():
            for key, value in param_state.items():
                tensors[f"{group}/{param_id}/{key}"] = torch.as_tensor(value)
    return tensors


def _param_groups(optimizer: torch.optim.Optimizer) -> List[Dict[str, Any]]:
    return json.loads(json.dumps(optimizer.state_dict()["param_groups"]))


def encode_checkpoint(state: TrainState) -> bytes:
    tensors = _collect_tensors(state)
    table, blobs, offset = [], [], 0
    for name in sorted(tensors):
        dtype, shape, data = _tensor_bytes(tensors[name])
        table.append({"name": name, "dtype": dtype, "shape": shape, "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)

    header = {
        "format_version": FORMAT_VERSION,
        "M": state.bundle.config.num_modalities,
        "model_config": state.bundle.config.model_dump(mode="json"),
        "train_config": state.config.model_dump(mode="json"),
        "step": state.step,
        "epoch": state.epoch,
        "rng_state": state.rng.bit_generator.state,
        "torch_rng_state": base64.b64encode(torch.get_rng_state().numpy().tobytes()).decode("ascii"),
        "optimizers": {"gen": _param_groups(state.opt_gen), "dis": _param_groups(state.opt_dis)},
        "tensors": table,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    return MAGIC + _HEADER_LEN.pack(len(header_bytes)) + header_bytes + b"".join(blobs)


def save_checkpoint(state: TrainState, path: Union[str, Path]) -> Path:
    path = Path(path)
    write_bytes(path, encode_checkpoint(state))
    logger.info(f"Checkpoint guardado en {path} (paso {state.step}).")
    return path


def file_hash(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _read_container(path: Path) -> Tuple[Dict[str, Any], Dict[str, torch.Tensor]]:
    try:
        data = path.read_bytes()
    except FileNotFoundError as e:
        raise IoFailureError(f"Checkpoint no encontrado: '{path}'") from e
    except OSError as e:
        raise IoFailureError(f"No se pudo leer el checkpoint '{path}': {e}") from e

    if not data.startswith(MAGIC):
        raise CorruptCheckpointError(f"'{path}' no es un checkpoint UCDMT1 (firma inválida).")
    start = len(MAGIC) + _HEADER_LEN.size
    if len(data) < start:
        raise CorruptCheckpointError(f"'{path}' está truncado (sin cabecera).")
    (header_len,) = _HEADER_LEN.unpack(data[len(MAGIC):start])
    if len(data) < start + header_len:
        raise CorruptCheckpointError(f"'{path}' está truncado (cabecera incompleta).")

    try:
        header = json.loads(data[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptCheckpointError(f"Cabecera ilegible en '{path}': {e}") from e
    if header.get("format_version") != FORMAT_VERSION:
        raise CorruptCheckpointError(f"Versión de formato no soportada: {header.get('format_version')}")

    blob = memoryview(data)[start + header_len:]
    tensors: Dict[str, torch.Tensor] = {}
    for entry in header.get("tensors", []):
        end = entry["offset"] + entry["nbytes"]
        if end > len(blob):
            raise CorruptCheckpointError(f"'{path}' está truncado (tensor '{entry['name']}').")
        array = np.frombuffer(blob[entry["offset"]:end], dtype=np.dtype(entry["dtype"]))
        tensors[entry["name"]] = torch.from_numpy(array.reshape(entry["shape"]).copy())
    return header, tensors


def _load_optimizer_state(
    optimizer: torch.optim.Optimizer,
    group: str,
    param_groups: List[Dict[str, Any]],
    tensors: Dict[str, torch.Tensor],
) -> None:
    prefix = f"{group}/"
    state: Dict[int, Dict[str, torch.Tensor]] = {}
    for name, tensor in tensors.items():
        if not name.startswith(prefix):
            continue
        _, param_id, key = name.split("/", 2)
        state.setdefault(int(param_id), {})[key] = tensor
    for g in param_groups:
        if "betas" in g:
            g["betas"] = tuple(g["betas"])
    optimizer.load_state_dict({"state": state, "param_groups": param_groups})


def load_checkpoint(path: Union[str, Path]) -> TrainState:
    """
    Restaura parámetros, momentos de Adam, contadores y estado de los RNG.
    No toca el RNG global de torch: su estado queda en `torch_rng_state`.
    """
    path = Path(path)
    header, tensors = _read_container(path)

    try:
        model_config = ModelConfig.model_validate(header["model_config"])
        train_config = TrainConfig.model_validate(header["train_config"])
    except (KeyError, ValidationError) as e:
        raise CorruptCheckpointError(f"Configuración inválida en '{path}': {e}") from e

    # la inicialización de las capas consume el RNG global; se restaura al salir
    with torch.random.fork_rng(devices=[]):
        bundle = ModelBundle(model_config)
    try:
        for prefix, module in bundle.modules().items():
            module_state = {
                name.split("/", 1)[1]: tensor
                for name, tensor in tensors.items()
                if name.startswith(f"{prefix}/")
            }
            module.load_state_dict(module_state, strict=True)

        opt_gen = build_optimizer(bundle.generator_parameters(), train_config.lr_gen, train_config.momentum_beta1)
        opt_dis = build_optimizer(bundle.discriminator_parameters(), train_config.lr_dis, train_config.momentum_beta1)
        _load_optimizer_state(opt_gen, "opt_gen", header["optimizers"]["gen"], tensors)
        _load_optimizer_state(opt_dis, "opt_dis", header["optimizers"]["dis"], tensors)
    except (KeyError, RuntimeError, ValueError) as e:
        raise CorruptCheckpointError(f"Tensores incompletos o inconsistentes en '{path}': {e}") from e

    rng = np.random.default_rng()
    rng.bit_generator.state = header["rng_state"]
    torch_rng = np.frombuffer(base64.b64decode(header["torch_rng_state"]), dtype=np.uint8).copy()

    return TrainState(
        bundle=bundle,
        opt_gen=opt_gen,
        opt_dis=opt_dis,
        config=train_config,
        rng=rng,
        step=int(header["step"]),
        epoch=int(header["epoch"]),
        torch_rng_state=torch.from_numpy(torch_rng),
    )


def load_bundle(path: Union[str, Path]) -> Tuple[ModelBundle, str]:
    """Carga solo el ModelBundle (en modo evaluación) y el hash del archivo."""
    state = load_checkpoint(path)
    return state.bundle.eval(), file_hash(path)
