"""
Key-unique batch packing and batch loading

Every batch holds N positive pairs whose (speaker, phrase) keys are pairwise
distinct, so any cross-row pairing inside a batch is a valid negative.
"""

import logging
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np

from dataprep.clipio import load_clip
from ndcompute.tensor import as_tensor
from utils.errors import BatchConstraintError, InvalidShapeError, InvariantViolationError
from .augment import DEFAULT_LENGTH, augment_clip, fix_length
from .pairs import PositivePair

logger = logging.getLogger(__name__)


@dataclass
class PairBatch:
    pairs: List[PositivePair]
    x1: np.ndarray = field(default=None, repr=False)
    x2: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.pairs)

    @property
    def keys(self):
        return [pair.key for pair in self.pairs]

    def check(self):
        keys = self.keys
        if len(set(keys)) != len(keys):
            raise InvariantViolationError(f"batch repeats a (speaker, phrase) key: {keys}")
        return self


def build_batches(pairs, batch_size, seed=0, training=True):
    """
    Pack pairs into key-unique batches.

    Pairs are shuffled and queued per key. Each batch takes one pair from each
    of the `batch_size` keys with the most pairs still queued (ties broken by a
    fresh seeded priority), so conflicting pairs are deferred to later batches.
    Under-filled batches at the end are dropped in training and kept otherwise.
    """
    if batch_size < 2:
        raise BatchConstraintError(f"batch size must be >= 2, got {batch_size}")
    pairs = list(pairs)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))

    queues = defaultdict(deque)
    for index in order:
        queues[pairs[index].key].append(pairs[index])
    keys = sorted(queues)
    if len(keys) < batch_size:
        raise BatchConstraintError(
            f"only {len(keys)} distinct (speaker, phrase) keys for batches of {batch_size}"
        )

    remaining = np.array([len(queues[k]) for k in keys], dtype=np.int64)
    batches = []
    while remaining.sum() > 0:
        priority = rng.random(len(keys))
        ranked = np.lexsort((priority, -remaining))
        picked = [i for i in ranked[:batch_size] if remaining[i] > 0]
        batch = PairBatch([queues[keys[i]].popleft() for i in picked])
        remaining[picked] -= 1
        batches.append(batch)

    full = [b for b in batches if len(b) == batch_size]
    if training and len(full) < len(batches):
        dropped = sum(len(b) for b in batches if len(b) < batch_size)
        logger.warning(f"Dropped {len(batches) - len(full)} under-filled batch(es) holding {dropped} pairs")
        batches = full
    logger.info(f"Packed {len(pairs)} pairs into {len(batches)} batches of {batch_size}")
    return batches


class ClipLoader:
    """Reads clips by path, keeping decoded frames in memory"""

    def __init__(self, frame_shape=None, cache=True):
        self.frame_shape = tuple(frame_shape) if frame_shape is not None else None
        self._cache = {} if cache else None

    def frames(self, record):
        if self._cache is not None and record.path in self._cache:
            return self._cache[record.path]
        frames = load_clip(record.path).frames
        if self.frame_shape is not None and frames.shape[1:] != self.frame_shape:
            raise InvalidShapeError(
                f"{record.utterance_id}: frames are {frames.shape[1:]}, model expects {self.frame_shape}"
            )
        if self._cache is not None:
            self._cache[record.path] = frames
        return frames


def _prepare(loader, record, length, seed):
    frames = loader.frames(record)
    if seed is None:
        clip = fix_length(frames, length)
    else:
        clip = augment_clip(frames, np.random.default_rng(seed), length)
    return as_tensor(clip)


def load_batch(batch, loader, length=DEFAULT_LENGTH, augment_seed=None, workers=1):
    """
    Fill batch.x1 / batch.x2 with N x 1 x T x H x W tensors.

    With `augment_seed` set, each clip is augmented with its own generator
    seeded from (augment_seed, row, branch), so results do not depend on
    `workers`.
    """
    jobs = []
    for row, pair in enumerate(batch.pairs):
        for side, record in enumerate((pair.first, pair.second)):
            seed = None if augment_seed is None else [*np.atleast_1d(augment_seed).tolist(), row, side]
            jobs.append((record, seed))

    def job(item):
        return _prepare(loader, item[0], length, item[1])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            clips = list(pool.map(job, jobs))
    else:
        clips = [job(item) for item in jobs]

    batch.x1 = np.stack(clips[0::2])[:, None]
    batch.x2 = np.stack(clips[1::2])[:, None]
    return batch
