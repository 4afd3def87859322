"""
Scoring every pair a batch can form

A batch of N positive pairs yields N^2 scored pairs: the diagonal of
S = Z1 Z2^T holds the positives and every off-diagonal entry is a negative of
type 2, 3 or 4.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from tqdm import tqdm

from hnmloss import POSITIVE, batch_pair_types, similarity_matrix
from sampler import ClipLoader, build_batches, load_batch, sample_positive_pairs
from siamese.model import embed
from utils.errors import LipAuthError

logger = logging.getLogger(__name__)

SCORE_COLUMNS = [
    'score', 'label', 'pair_type', 'row_phrase', 'col_phrase',
    'row_speaker', 'col_speaker', 'same_speaker',
]


def score_batch(batch, params, loader):
    """Scored pairs of one batch as a DataFrame"""
    load_batch(batch, loader, length=params.arch.t)
    z1, _ = embed(batch.x1, params)
    z2, _ = embed(batch.x2, params)
    S = similarity_matrix(z1, z2).values
    keys = batch.keys
    types = batch_pair_types(keys)

    n = len(keys)
    rows, cols = np.divmod(np.arange(n * n), n)
    speakers = np.array([k[0] for k in keys])
    phrases = np.array([k[1] for k in keys], dtype=object)
    frame = pd.DataFrame({
        'score': S.ravel().astype(np.float64),
        'label': (types.ravel() == POSITIVE).astype(np.int8),
        'pair_type': types.ravel(),
        'row_phrase': phrases[rows],
        'col_phrase': phrases[cols],
        'row_speaker': speakers[rows],
        'col_speaker': speakers[cols],
        'same_speaker': speakers[rows] == speakers[cols],
    })
    # release clip tensors
    batch.x1 = batch.x2 = None
    return frame


def score_batches(batches, params, loader=None, workers=1):
    loader = loader or ClipLoader((params.arch.h, params.arch.w))

    def job(batch):
        return score_batch(batch, params, loader)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(tqdm(pool.map(job, batches), total=len(batches), desc='score'))
    else:
        frames = [job(batch) for batch in tqdm(batches, desc='score')]
    if not frames:
        return pd.DataFrame(columns=SCORE_COLUMNS)
    scored = pd.concat(frames, ignore_index=True)
    logger.info(f"Scored {len(scored)} pairs ({int(scored['label'].sum())} positive) in {len(batches)} batches")
    return scored


def score_dataset(params, manifest, count, batch_size, seed=0, loader=None, workers=1):
    """Sample `count` positives, pack them in evaluation mode and score all N^2 pairs per batch"""
    pairs = sample_positive_pairs(manifest, count, seed=seed)
    batches = build_batches(pairs, batch_size, seed=seed, training=False)
    return score_batches(batches, params, loader, workers)


def read_scores(path):
    try:
        scored = pd.read_csv(path, dtype={'row_phrase': str, 'col_phrase': str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise LipAuthError(f"cannot read scored pairs {path}: {e}") from e
    missing = [c for c in SCORE_COLUMNS if c not in scored.columns]
    if missing:
        raise LipAuthError(f"{path}: missing columns {missing}")
    scored['same_speaker'] = scored['same_speaker'].astype(bool)
    return scored[SCORE_COLUMNS]


def write_scores(scored, path):
    try:
        scored.to_csv(path, index=False, columns=SCORE_COLUMNS)
    except OSError as e:
        raise LipAuthError(f"cannot write scored pairs {path}: {e}") from e
