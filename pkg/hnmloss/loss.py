"""
Batch-wise hard-negative-mining triplet loss

A batch holds N positive pairs with pairwise distinct (speaker, phrase) keys,
so S = Z1 Z2^T carries positive scores on its diagonal and negatives
everywhere else. Per row i, with M = S - I:

    p_i     = S_ii
    maxN_i  = max_j M_ij                 (first index on ties)
    meanN_i = sum_j M_ij / (N - 1)
    loss    = mean(w_max * max(0, m - p_i + maxN_i) + w_mean * max(0, m - p_i + meanN_i))

The diagonal of M (p_i - 1) stays inside both the max and the sum.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ndcompute import matmul, matmul_backward
from utils.errors import InvalidShapeError, InvariantViolationError, LipAuthError

POSITIVE = 1
SAME_SPEAKER = 2
SAME_PHRASE = 3
DIFFERENT_BOTH = 4

PAIR_TYPE_NAMES = {
    POSITIVE: 'same speaker, same phrase',
    SAME_SPEAKER: 'same speaker, different phrase',
    SAME_PHRASE: 'different speaker, same phrase',
    DIFFERENT_BOTH: 'different speaker, different phrase',
}


@dataclass(frozen=True)
class LossConfig:
    margin: float = 0.5
    weight_max: float = 0.5
    weight_mean: float = 0.5

    def __post_init__(self):
        if self.margin <= 0:
            raise LipAuthError(f"margin must be positive, got {self.margin}")
        if abs(self.weight_max + self.weight_mean - 1.0) > 1e-9:
            raise LipAuthError("loss weights must sum to 1")


@dataclass
class SimilarityMatrix:
    values: np.ndarray
    row_keys: Optional[Sequence[Tuple]] = None
    col_keys: Optional[Sequence[Tuple]] = None

    @property
    def positives(self):
        return np.diag(self.values)


@dataclass
class LossDiagnostics:
    """Per-row terms of the loss"""

    positive: np.ndarray
    max_negative: np.ndarray
    mean_negative: np.ndarray
    hinge_max: np.ndarray
    hinge_mean: np.ndarray
    argmax: np.ndarray


def similarity_matrix(z1, z2, row_keys=None, col_keys=None):
    """S = Z1 x Z2^T; entry (i, j) is the cosine of pair i branch 1 with pair j branch 2"""
    if z1.ndim != 2 or z2.ndim != 2 or z1.shape[1] != z2.shape[1]:
        raise InvalidShapeError(f"similarity_matrix: embeddings {z1.shape} and {z2.shape} differ in width")
    values, _ = matmul(z1, z2.T)
    return SimilarityMatrix(values, row_keys, col_keys)


def hnm_triplet_loss(S, config=None):
    """Returns (scalar loss, LossDiagnostics)"""
    config = config or LossConfig()
    values = S.values if isinstance(S, SimilarityMatrix) else np.asarray(S)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InvalidShapeError(f"hnm_triplet_loss: similarity matrix must be square, got {values.shape}")
    n = values.shape[0]
    if n < 2:
        raise LipAuthError("hnm_triplet_loss: need N >= 2 pairs, a single pair has no negatives")

    shifted = values - np.eye(n, dtype=values.dtype)
    positive = np.diag(values).copy()
    argmax = np.argmax(shifted, axis=1)
    max_negative = shifted[np.arange(n), argmax]
    mean_negative = shifted.sum(axis=1) / (n - 1)

    hinge_max = np.maximum(0, config.margin - positive + max_negative)
    hinge_mean = np.maximum(0, config.margin - positive + mean_negative)
    loss = float(np.mean(config.weight_max * hinge_max + config.weight_mean * hinge_mean))
    diag = LossDiagnostics(positive, max_negative, mean_negative, hinge_max, hinge_mean, argmax)
    return loss, diag


def hnm_triplet_loss_backward(diag, config=None, dloss=1.0):
    """Gradient of the loss with respect to S (subgradient 0 at an inactive hinge)"""
    config = config or LossConfig()
    n = diag.positive.shape[0]
    rows = np.arange(n)
    active_max = (diag.hinge_max > 0) * (config.weight_max * dloss / n)
    active_mean = (diag.hinge_mean > 0) * (config.weight_mean * dloss / n)

    dS = np.zeros((n, n))
    dS[rows, rows] -= active_max + active_mean
    dS[rows, diag.argmax] += active_max
    dS += active_mean[:, None] / (n - 1)
    return dS


def loss_and_embedding_grads(z1, z2, config=None):
    """Loss of a batch plus its gradients with respect to both embedding matrices"""
    config = config or LossConfig()
    values, cache = matmul(z1, z2.T)
    loss, diag = hnm_triplet_loss(values, config)
    dS = hnm_triplet_loss_backward(diag, config).astype(z1.dtype)
    dz1, dz2t = matmul_backward(dS, cache)
    return loss, dz1, dz2t.T, diag


def batch_pair_types(row_keys, col_keys=None):
    """
    N x N matrix of pair types 1-4 for (speaker, phrase) keys.
    Diagonal entries are type 1; the batch invariant forbids type 1 elsewhere.
    """
    col_keys = row_keys if col_keys is None else col_keys
    for label, keys in (('row', row_keys), ('column', col_keys)):
        if len(set(keys)) != len(keys):
            raise InvariantViolationError(f"duplicate (speaker, phrase) keys across {label}s of a batch")
    if len(row_keys) != len(col_keys):
        raise InvalidShapeError("row and column key lists differ in length")

    speakers_r = np.array([k[0] for k in row_keys], dtype=object)
    speakers_c = np.array([k[0] for k in col_keys], dtype=object)
    phrases_r = np.array([k[1] for k in row_keys], dtype=object)
    phrases_c = np.array([k[1] for k in col_keys], dtype=object)
    same_speaker = speakers_r[:, None] == speakers_c[None, :]
    same_phrase = phrases_r[:, None] == phrases_c[None, :]

    types = np.full(same_speaker.shape, DIFFERENT_BOTH, dtype=np.int8)
    types[same_speaker & ~same_phrase] = SAME_SPEAKER
    types[~same_speaker & same_phrase] = SAME_PHRASE
    types[same_speaker & same_phrase] = POSITIVE
    off_diagonal = ~np.eye(len(row_keys), dtype=bool)
    if np.any((types == POSITIVE) & off_diagonal):
        raise InvariantViolationError("type-1 pair found off the diagonal")
    return types
