"""
Siamese training loop

Both branches of a batch go through the same parameters; their gradients are
summed before the Adam step. Every epoch re-packs the training pairs into
key-unique batches, logs the per-batch losses and evaluates loss and EER on
the validation pairs. The final epoch's checkpoint is kept.
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from evalreport.metrics import find_eer_threshold
from hnmloss import LossConfig, hnm_triplet_loss, loss_and_embedding_grads, similarity_matrix
from ndcompute import AdamState, adam_step, require_finite
from sampler import ClipLoader, build_batches, load_batch
from utils.errors import LipAuthError, NonFiniteError
from .checkpoint import save_checkpoint
from .model import ArchSpec, embed, embed_backward, init_params

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ['epoch', 'train_loss', 'val_loss', 'val_eer', 'val_threshold']


@dataclass
class TrainResult:
    params: object
    state: AdamState
    checkpoint: str = None
    fingerprint: str = None
    batch_losses: list = field(default_factory=list)  # (epoch, batch, loss)
    epochs: list = field(default_factory=list)

    def metrics_frame(self):
        return pd.DataFrame(self.epochs, columns=METRIC_COLUMNS)

    def batch_frame(self):
        return pd.DataFrame(self.batch_losses, columns=['epoch', 'batch', 'loss'])


def loss_config_of(config):
    return LossConfig(margin=config.margin, weight_max=config.weight_max, weight_mean=config.weight_mean)


def batch_loss_and_grads(params, x1, x2, loss_config):
    """Loss of one batch and the gradient of every parameter, summed over both branches"""
    z1, cache1 = embed(x1, params)
    z2, cache2 = embed(x2, params)
    loss, dz1, dz2, diag = loss_and_embedding_grads(z1, z2, loss_config)
    grads = embed_backward(dz1, cache1)
    for name, grad in embed_backward(dz2, cache2).items():
        grads[name] = grads[name] + grad
    return loss, grads, diag


def evaluate_pairs(params, batches, loader, loss_config):
    """Mean loss and (EER, threshold) over evaluation batches"""
    losses = []
    positive, negative = [], []
    for batch in batches:
        load_batch(batch, loader, length=params.arch.t)
        z1, _ = embed(batch.x1, params)
        z2, _ = embed(batch.x2, params)
        batch.x1 = batch.x2 = None
        S = similarity_matrix(z1, z2).values
        if len(batch) >= 2:
            losses.append(hnm_triplet_loss(S, loss_config)[0])
        off_diagonal = ~np.eye(len(batch), dtype=bool)
        positive.append(np.diag(S))
        negative.append(S[off_diagonal])
    mean_loss = float(np.mean(losses)) if losses else float('nan')
    positive = np.concatenate(positive) if positive else np.empty(0)
    negative = np.concatenate(negative) if negative else np.empty(0)
    if positive.size == 0 or negative.size == 0:
        return mean_loss, float('nan'), float('nan')
    threshold, eer = find_eer_threshold(positive, negative)
    return mean_loss, eer, threshold


def train(train_pairs, val_pairs, config, out_path=None, loader=None, params=None, progress=True):
    """
    Train from scratch (or from `params`) for config.epochs epochs.

    Writes the final checkpoint to `out_path` and metrics.csv / batch_losses.csv
    beside it when a path is given.
    """
    arch = ArchSpec.from_config(config)
    if params is None:
        params = init_params(arch, seed=config.seed)
    state = AdamState.for_params(params.tensors, lr=config.lr)
    loader = loader or ClipLoader((arch.h, arch.w))
    loss_config = loss_config_of(config)
    result = TrainResult(params, state)

    val_batches = []
    if val_pairs:
        val_keys = len({pair.key for pair in val_pairs})
        val_size = min(config.eval_batch, val_keys)
        if val_size < config.eval_batch:
            logger.info(f"Validation split has {val_keys} keys; validation batches hold {val_size} pairs")
        if val_size >= 2:
            val_batches = build_batches(val_pairs, val_size, seed=config.seed, training=False)
    for epoch in range(1, config.epochs + 1):
        batches = build_batches(train_pairs, config.train_batch, seed=[config.seed, epoch], training=True)
        if not batches:
            raise LipAuthError("no full training batch could be packed")
        epoch_losses = []
        bar = tqdm(batches, desc=f"epoch {epoch}", disable=not progress)
        for index, batch in enumerate(bar):
            augment_seed = [config.seed, epoch, index] if config.augment else None
            load_batch(batch, loader, length=arch.t, augment_seed=augment_seed, workers=config.workers)
            loss, grads, _ = batch_loss_and_grads(params, batch.x1, batch.x2, loss_config)
            batch.x1 = batch.x2 = None
            if not np.isfinite(loss):
                logger.error(f"Non-finite loss at epoch {epoch}, batch {index}; keys: {batch.keys}")
                raise NonFiniteError(f"loss became {loss} at epoch {epoch}, batch {index}; batch keys {batch.keys}")
            tensors, state = adam_step(params.tensors, grads, state)
            for name, tensor in tensors.items():
                require_finite(f"{name} after epoch {epoch} batch {index}", tensor)
            params.tensors = tensors
            epoch_losses.append(loss)
            result.batch_losses.append((epoch, index, loss))
            bar.set_postfix(loss=f"{loss:.4f}")
            logger.debug(f"epoch {epoch} batch {index}: loss {loss:.6f}")

        train_loss = float(np.mean(epoch_losses))
        val_loss, val_eer, val_threshold = (float('nan'),) * 3
        if val_batches:
            val_loss, val_eer, val_threshold = evaluate_pairs(params, val_batches, loader, loss_config)
        result.epochs.append((epoch, train_loss, val_loss, val_eer, val_threshold))
        logger.info(
            f"Epoch {epoch}/{config.epochs}: train loss {train_loss:.4f}, "
            f"val loss {val_loss:.4f}, val EER {val_eer:.4f}"
        )

    result.params, result.state = params, state
    if out_path:
        out_dir = os.path.dirname(os.path.abspath(out_path))
        os.makedirs(out_dir, exist_ok=True)
        result.checkpoint = out_path
        result.fingerprint = save_checkpoint(out_path, params, state)
        try:
            result.metrics_frame().to_csv(os.path.join(out_dir, 'metrics.csv'), index=False)
            result.batch_frame().to_csv(os.path.join(out_dir, 'batch_losses.csv'), index=False)
        except OSError as e:
            raise LipAuthError(f"cannot write training metrics to {out_dir}: {e}") from e
    return result
