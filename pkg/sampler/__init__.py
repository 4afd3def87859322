from .augment import augment_clip, fix_length
from .batches import ClipLoader, PairBatch, build_batches, load_batch
from .pairs import PositivePair, positive_capacity, sample_positive_pairs
from .splits import (
    GRID_DEFAULT_SPLIT, SplitSpec, default_synthetic_split, format_split_spec, parse_split_spec,
    read_split_spec, split_speakers,
)
