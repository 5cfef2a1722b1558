# ucdmt/training/trainer.py

from __future__ import annotations
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import torch
import torch.nn as nn

from ucdmt.core.errors import EmptyDatasetError, NonFiniteLossError, ShapeMismatchError
from ucdmt.core.log import log_time
from ucdmt.data.dataset import build_paired_index
from ucdmt.data.io import write_bytes
from ucdmt.data.sampling import sample_training_batch, steps_per_epoch
from ucdmt.losses.objectives import (
    LossBreakdown,
    adversarial_loss_d,
    adversarial_loss_g,
    cycle_reconstruction_loss,
    discriminator_objective,
    disentanglement_loss,
    generator_objective,
    modality_classification_loss,
    translation_l1,
)
from ucdmt.models.bundle import ModelBundle
from ucdmt.models.networks import validate_codes
from ucdmt.schemas.config_schemas import TrainConfig
from ucdmt.schemas.data_schemas import DatasetManifest
from ucdmt.schemas.enums import DisenVariant, Split
from ucdmt.schemas.models import TrainingBatch
from ucdmt.training.checkpoint import save_checkpoint
from ucdmt.training.state import TrainState, set_seeds

logger = logging.getLogger(__name__)

METRICS_LOG_NAME = "metrics.jsonl"
LAST_CHECKPOINT = "last.ucdmt"
FINAL_CHECKPOINT = "final.ucdmt"
ABORT_CHECKPOINT = "abort.ucdmt"


class CycleOutputs(NamedTuple):
    x_translated: torch.Tensor   # x̃_y
    x_cycled: torch.Tensor       # x̃_x
    z_real: torch.Tensor         # Enc(x)
    z_fake: torch.Tensor         # Enc(x̃_y)


class DiscriminatorStepResult(NamedTuple):
    adv_d: float
    mc_d: float
    total_d: float


@contextmanager
def frozen(module: nn.Module):
    """Desactiva temporalmente los gradientes de un módulo."""
    flags = [p.requires_grad for p in module.parameters()]
    for p in module.parameters():
        p.requires_grad_(False)
    try:
        yield module
    finally:
        for p, flag in zip(module.parameters(), flags):
            p.requires_grad_(flag)


def forward_cycle(bundle: ModelBundle, x: torch.Tensor, m_x: torch.Tensor, m_y: torch.Tensor) -> CycleOutputs:
    """
    Llama dos veces al MISMO autoencoder:
    z_real = Enc(x); x̃_y = Dec(z_real, m_y); z_fake = Enc(x̃_y); x̃_x = Dec(z_fake, m_x).
    El segundo paso retropropaga a través del primero (x̃_y no se separa del grafo).
    """
    M = bundle.config.num_modalities
    m_x = validate_codes(m_x, M)
    m_y = validate_codes(m_y, M)

    encoder, decoder = bundle.encoder, bundle.decoder
    z_real = encoder(x)
    x_translated = decoder(z_real, m_y)
    z_fake = encoder(x_translated)
    x_cycled = decoder(z_fake, m_x)
    return CycleOutputs(x_translated, x_cycled, z_real, z_fake)


def _check_batch(batch: TrainingBatch) -> None:
    if batch.x.shape != batch.x_y.shape:
        raise ShapeMismatchError(f"x {tuple(batch.x.shape)} y x_y {tuple(batch.x_y.shape)} difieren")


def train_discriminator_step(state: TrainState, batch: TrainingBatch) -> Tuple[TrainState, DiscriminatorStepResult]:
    """
    min_Dis −L_adv + λ2·L_mc. Las imágenes sintéticas se generan sin grafo,
    así que Enc y Dec no reciben gradiente.
    """
    _check_batch(batch)
    bundle, w = state.bundle, state.config.weights

    with torch.no_grad():
        x_fake = bundle.decoder(bundle.encoder(batch.x), batch.m_y)

    real_out = bundle.discriminator(batch.x_y)
    fake_out = bundle.discriminator(x_fake)
    adv_d = adversarial_loss_d(real_out.adv_map, fake_out.adv_map)

    # clasificador: entrada real x con m_x (+ sintética con m_y si dmc_on_fakes)
    input_out = bundle.discriminator(batch.x)
    mc_d = modality_classification_loss(input_out.modality_logits, batch.m_x)
    if w.dmc_on_fakes:
        mc_d = mc_d + modality_classification_loss(fake_out.modality_logits, batch.m_y)

    total_d = discriminator_objective(adv_d, mc_d, w)
    if not torch.isfinite(total_d):
        losses = {"adv_d": float(adv_d.detach()), "mc_d": float(mc_d.detach()), "total_d": float(total_d.detach())}
        raise NonFiniteLossError(state.step, losses, phase="discriminador")

    state.opt_dis.zero_grad(set_to_none=True)
    total_d.backward()
    state.opt_dis.step()

    return state, DiscriminatorStepResult(float(adv_d.detach()), float(mc_d.detach()), float(total_d.detach()))


def train_generator_step(state: TrainState, batch: TrainingBatch) -> Tuple[TrainState, LossBreakdown]:
    """
    min_{Enc,Dec} L1 + α·L1_ciclo + β·L_adv + λ1·L_mc (+ w_disen·L1_disen).
    Solo se actualizan Enc y Dec.
    """
    _check_batch(batch)
    bundle, w = state.bundle, state.config.weights

    outputs = forward_cycle(bundle, batch.x, batch.m_x, batch.m_y)
    l1 = translation_l1(outputs.x_translated, batch.x_y)
    cycle = cycle_reconstruction_loss(outputs.x_cycled, batch.x)

    if w.disen_variant == DisenVariant.RECONSTRUCTED:
        disen = disentanglement_loss(bundle.encoder(outputs.x_cycled), outputs.z_real)
    else:
        disen = disentanglement_loss(outputs.z_fake, outputs.z_real)

    with frozen(bundle.discriminator):
        fake_out = bundle.discriminator(outputs.x_translated)
        adv = adversarial_loss_g(fake_out.adv_map, w.gan_mode)
        # el término real es constante respecto a Enc/Dec: gradiente nulo
        real_out = bundle.discriminator(batch.x)
        mc = modality_classification_loss(fake_out.modality_logits, batch.m_y) + \
            modality_classification_loss(real_out.modality_logits, batch.m_x)

    breakdown = generator_objective(l1, cycle, adv, mc, disen, w)
    if not breakdown.is_finite():
        raise NonFiniteLossError(state.step, breakdown.as_floats(), phase="generador")

    state.opt_gen.zero_grad(set_to_none=True)
    breakdown.total.backward()
    state.opt_gen.step()

    return state, breakdown


def _log_record(step: int, d: DiscriminatorStepResult, g: LossBreakdown) -> Dict[str, Any]:
    values = g.as_floats()
    return {
        "step": step,
        "l1": values["l1_translation"],
        "cycle": values["l1_cycle"],
        "adv_g": values["adv"],
        "adv_d": d.adv_d,
        "mc_g": values["mc"],
        "mc_d": d.mc_d,
        "disen": values["disen"],
        "total_g": values["total"],
        "total_d": d.total_d,
    }


def _append_jsonl(path: Path, records: List[Dict[str, Any]]) -> None:
    existing = path.read_bytes() if path.exists() else b""
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    write_bytes(path, existing + lines.encode("utf-8"))


def run_training(
    config: TrainConfig,
    manifest: DatasetManifest,
    out_dir: Optional[Union[str, Path]] = None,
    state: Optional[TrainState] = None,
    max_steps: Optional[int] = None,
    workers: int = 1,
) -> Tuple[TrainState, List[Dict[str, Any]]]:
    """
    Bucle de entrenamiento: por cada lote, un paso de D seguido de un paso de G.
    Guarda checkpoints cada `checkpoint_every` pasos y uno de emergencia si
    el entrenamiento aborta. Determinista dada la semilla (un solo hilo).

    `state` permite reanudar desde un checkpoint; `max_steps` detiene el
    bucle antes del final (el estado queda listo para continuar).
    """
    set_seeds(config.seed, workers)
    train_manifest = manifest.select(Split.TRAIN_TRANSLATOR)
    index = build_paired_index(train_manifest)
    if not index:
        raise EmptyDatasetError("La partición de entrenamiento no tiene cortes válidos.")
    if index[0].M != config.model.num_modalities:
        raise ShapeMismatchError(
            f"El dataset tiene M={index[0].M} y el modelo M={config.model.num_modalities}"
        )

    if state is None:
        state = TrainState.initialize(config)
    state.bundle.train()
    if state.torch_rng_state is not None:
        torch.set_rng_state(state.torch_rng_state)
        state.torch_rng_state = None

    per_epoch = steps_per_epoch(len(index), config.model.num_modalities, config.batch_size)
    total_steps = per_epoch * config.epochs
    stop_at = total_steps if max_steps is None else min(total_steps, max_steps)

    out_path = Path(out_dir) if out_dir is not None else None
    metrics_log: List[Dict[str, Any]] = []
    pending: List[Dict[str, Any]] = []

    logger.info(
        f"Entrenamiento: {len(index)} cortes, {per_epoch} pasos/época, {config.epochs} épocas "
        f"({total_steps} pasos), reanudando en el paso {state.step}."
    )

    with log_time(f"entrenamiento hasta el paso {stop_at}"):
        try:
            while state.step < stop_at:
                batch = sample_training_batch(index, config.batch_size, state.rng)
                state, d_result = train_discriminator_step(state, batch)
                state, breakdown = train_generator_step(state, batch)
                state.step += 1
                state.epoch = state.step // per_epoch

                if state.step % config.log_every == 0 or state.step == stop_at:
                    record = _log_record(state.step, d_result, breakdown)
                    metrics_log.append(record)
                    pending.append(record)
                    logger.info(
                        f"[paso {state.step}/{total_steps}] L1={record['l1']:.4f} ciclo={record['cycle']:.4f} "
                        f"disen={record['disen']:.4f} G={record['total_g']:.4f} D={record['total_d']:.4f}"
                    )

                if out_path is not None and state.step % config.checkpoint_every == 0:
                    _append_jsonl(out_path / METRICS_LOG_NAME, pending)
                    pending = []
                    save_checkpoint(state, out_path / LAST_CHECKPOINT)
        except Exception as e:
            if out_path is not None:
                logger.error(f"Entrenamiento abortado en el paso {state.step}: {e}. Guardando checkpoint de emergencia.")
                if isinstance(e, NonFiniteLossError):
                    logger.error(f"Volcado de diagnóstico: {json.dumps(e.losses)}")
                _append_jsonl(out_path / METRICS_LOG_NAME, pending)
                save_checkpoint(state, out_path / ABORT_CHECKPOINT)
            raise

    if out_path is not None:
        _append_jsonl(out_path / METRICS_LOG_NAME, pending)
        save_checkpoint(state, out_path / (FINAL_CHECKPOINT if state.step >= total_steps else LAST_CHECKPOINT))

    return state, metrics_log
