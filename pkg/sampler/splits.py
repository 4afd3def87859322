"""
Open-set speaker splits

Split spec file: three lines "train:", "val:", "test:" each followed by
comma-separated speaker ids.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import List

from utils.errors import SplitSpecError

logger = logging.getLogger(__name__)

SPLIT_NAMES = ('train', 'val', 'test')


@dataclass
class SplitSpec:
    train: List[int]
    val: List[int]
    test: List[int]

    def as_dict(self):
        return {'train': self.train, 'val': self.val, 'test': self.test}

    def validate(self, known_speakers=None):
        for name, ids in self.as_dict().items():
            repeated = sorted(s for s, n in Counter(ids).items() if n > 1)
            if repeated:
                logger.warning(f"Split '{name}' lists speaker(s) {repeated} more than once")
        sets = {name: set(ids) for name, ids in self.as_dict().items()}
        for a, b in (('train', 'val'), ('train', 'test'), ('val', 'test')):
            shared = sets[a] & sets[b]
            if shared:
                raise SplitSpecError(f"speakers {sorted(shared)} appear in both {a} and {b}")
        if known_speakers is not None:
            unknown = set().union(*sets.values()) - set(known_speakers)
            if unknown:
                raise SplitSpecError(f"speakers {sorted(unknown)} are not in the manifest")
        return self


# Customized GRID: speaker 21 has no video; 1, 2, 20, 22 test; 16-19 validation
GRID_DEFAULT_SPLIT = SplitSpec(
    train=[3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34],
    val=[16, 17, 18, 19],
    test=[1, 2, 20, 22],
)


def parse_split_spec(text):
    parsed = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        if ':' not in line:
            raise SplitSpecError(f"line {number}: expected '<split>: ids'")
        name, ids = (part.strip() for part in line.split(':', 1))
        if name not in SPLIT_NAMES:
            raise SplitSpecError(f"line {number}: unknown split '{name}'")
        try:
            parsed[name] = [int(v) for v in ids.split(',') if v.strip()]
        except ValueError:
            raise SplitSpecError(f"line {number}: speaker ids must be integers")
    missing = [name for name in SPLIT_NAMES if name not in parsed]
    if missing:
        raise SplitSpecError(f"split spec lacks {', '.join(missing)}")
    return SplitSpec(**parsed)


def read_split_spec(path):
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            return parse_split_spec(fh.read())
    except OSError as e:
        raise SplitSpecError(f"cannot read split spec {path}: {e}") from e


def format_split_spec(spec):
    return ''.join(f"{name}: {','.join(str(s) for s in ids)}\n" for name, ids in spec.as_dict().items())


def default_synthetic_split(speakers):
    """About 60/15/25 percent, with at least one validation and two test speakers"""
    speakers = sorted(speakers)
    if len(speakers) < 4:
        raise SplitSpecError("an open-set split needs at least four speakers")
    n_test = max(2, round(0.25 * len(speakers)))
    n_val = max(1, round(0.125 * len(speakers)))
    n_train = len(speakers) - n_test - n_val
    return SplitSpec(
        train=speakers[:n_train],
        val=speakers[n_train:n_train + n_val],
        test=speakers[n_train + n_val:],
    )


def split_speakers(manifest, spec):
    """Partition the manifest by speaker; returns {'train': .., 'val': .., 'test': ..}"""
    spec.validate(manifest.speakers)
    parts = {name: manifest.subset(ids) for name, ids in spec.as_dict().items()}
    for name, part in parts.items():
        logger.info(f"Split {name}: {len(spec.as_dict()[name])} speakers, {len(part)} utterances")
    return parts
