"""Positive pairs: two utterances of one speaker saying one phrase"""

import logging
from dataclasses import dataclass

import numpy as np

from dataprep.manifest import UtteranceRecord
from utils.errors import CapacityError, InvariantViolationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PositivePair:
    first: UtteranceRecord
    second: UtteranceRecord

    def __post_init__(self):
        if self.first.key != self.second.key:
            raise InvariantViolationError(
                f"positive pair mixes {self.first.key} and {self.second.key}"
            )
        if self.first.utterance_id == self.second.utterance_id:
            raise InvariantViolationError(f"positive pair repeats {self.first.utterance_id}")

    @property
    def key(self):
        return self.first.key

    @property
    def unordered(self):
        return frozenset((self.first.utterance_id, self.second.utterance_id))


def positive_capacity(manifest):
    """Number of distinct unordered positive pairs: sum of K(K-1)/2"""
    return sum(len(items) * (len(items) - 1) // 2 for items in manifest.groups().values())


def sample_positive_pairs(manifest, count, seed=0):
    """
    Draw `count` distinct unordered positive pairs uniformly at random.

    Every unordered pair in the manifest gets a global index; a seeded draw
    without replacement picks indices, which are mapped back to (set, i, j).
    Each pair's branch orientation is then flipped with probability 1/2.
    """
    groups = [items for items in manifest.groups().values() if len(items) >= 2]
    sizes = np.array([len(items) * (len(items) - 1) // 2 for items in groups], dtype=np.int64)
    capacity = int(sizes.sum())
    if count > capacity:
        raise CapacityError(count, capacity)
    if count <= 0:
        return []

    rng = np.random.default_rng(seed)
    chosen = rng.choice(capacity, size=count, replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    owners = np.searchsorted(offsets, chosen, side='right') - 1
    swaps = rng.random(count) < 0.5

    triu_cache = {}
    pairs = []
    for index, owner, swap in zip(chosen, owners, swaps):
        items = groups[owner]
        k = len(items)
        if k not in triu_cache:
            triu_cache[k] = np.triu_indices(k, 1)
        rows, cols = triu_cache[k]
        local = index - offsets[owner]
        a, b = items[rows[local]], items[cols[local]]
        pairs.append(PositivePair(b, a) if swap else PositivePair(a, b))
    logger.info(f"Sampled {count} of {capacity} positive pairs from {len(groups)} utterance sets")
    return pairs
