"""Speaker splits, positive-pair sampling, batch packing and augmentation"""

import logging
from collections import Counter

import numpy as np
import pytest

from dataprep import ALL_PHRASES, Manifest, UtteranceRecord
from sampler import (
    GRID_DEFAULT_SPLIT, ClipLoader, PairBatch, PositivePair, SplitSpec, augment_clip, build_batches,
    default_synthetic_split, fix_length, format_split_spec, load_batch, parse_split_spec,
    positive_capacity, sample_positive_pairs, split_speakers,
)
from utils.errors import (
    BatchConstraintError, CapacityError, EmptySequenceError, InvalidShapeError, InvariantViolationError,
    SplitSpecError,
)


def in_memory_manifest(speakers, phrases, per_set):
    """Records without clip files, enough for pairing and packing"""
    abbrevs = [p.abbrev for p in ALL_PHRASES[:phrases]]
    return Manifest([
        UtteranceRecord(f"s{s}_{p}_{k:03d}", s, p, f"s{s}/{p}_{k}.lbac", 4, 'synthetic')
        for s in range(1, speakers + 1) for p in abbrevs for k in range(per_set)
    ])


class ConstantRng:
    """Stand-in generator whose every uniform draw returns one value"""

    def __init__(self, value):
        self.value = value

    def random(self, size=None):
        return self.value if size is None else np.full(size, self.value)

    def uniform(self, low, high, size=None):
        raise AssertionError("rotation must not be drawn")

    def integers(self, high, size=None):
        raise AssertionError("no frame needs rescuing")


# ============================================================================
# Splits
# ============================================================================

class TestSplits:
    def test_grid_default(self):
        sizes = {name: len(ids) for name, ids in GRID_DEFAULT_SPLIT.as_dict().items()}
        assert sizes == {'train': 25, 'val': 4, 'test': 4}
        assert GRID_DEFAULT_SPLIT.test == [1, 2, 20, 22]
        GRID_DEFAULT_SPLIT.validate()
        assert 21 not in set().union(*map(set, GRID_DEFAULT_SPLIT.as_dict().values()))

    def test_synthetic_default(self):
        spec = default_synthetic_split(range(1, 9))
        assert (spec.train, spec.val, spec.test) == ([1, 2, 3, 4, 5], [6], [7, 8])
        spec.validate(range(1, 9))

    def test_synthetic_needs_four_speakers(self):
        with pytest.raises(SplitSpecError):
            default_synthetic_split([1, 2, 3])

    def test_shared_speaker(self):
        with pytest.raises(SplitSpecError, match='both train and test'):
            SplitSpec(train=[1, 2], val=[3], test=[2]).validate()

    def test_unknown_speaker(self):
        with pytest.raises(SplitSpecError, match='not in the manifest'):
            SplitSpec(train=[1], val=[2], test=[9]).validate([1, 2, 3])

    def test_repeated_id_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            SplitSpec(train=[6, 6, 7], val=[1], test=[2]).validate()
        assert 'more than once' in caplog.text

    def test_parse_and_format(self):
        spec = parse_split_spec("# customized\ntrain: 1, 2,3\nval: 4\n\ntest: 5,6\n")
        assert spec == SplitSpec([1, 2, 3], [4], [5, 6])
        assert parse_split_spec(format_split_spec(spec)) == spec

    @pytest.mark.parametrize('text, message', [
        ("train: 1\nval: 2\n", 'lacks test'),
        ("train: 1\nholdout: 2\n", 'line 2'),
        ("train 1\n", 'line 1'),
        ("train: 1\nval: x\ntest: 3\n", 'integers'),
    ])
    def test_parse_errors(self, text, message):
        with pytest.raises(SplitSpecError, match=message):
            parse_split_spec(text)

    def test_split_rendered_corpus(self, tiny_corpus):
        manifest, _ = tiny_corpus
        parts = split_speakers(manifest, default_synthetic_split(manifest.speakers))
        assert [parts[name].speakers for name in ('train', 'val', 'test')] == [[1], [2], [3, 4]]
        assert sum(len(p) for p in parts.values()) == len(manifest)


# ============================================================================
# Positive pairs
# ============================================================================

class TestPositivePairs:
    def test_three_utterances(self):
        manifest = in_memory_manifest(1, 1, 3)
        assert positive_capacity(manifest) == 3
        pairs = sample_positive_pairs(manifest, 3)
        assert {p.unordered for p in pairs} == {
            frozenset(pair) for pair in (('s1_bba_000', 's1_bba_001'), ('s1_bba_000', 's1_bba_002'),
                                         ('s1_bba_001', 's1_bba_002'))
        }

    def test_over_capacity(self):
        with pytest.raises(CapacityError, match='capacity is 3'):
            sample_positive_pairs(in_memory_manifest(1, 1, 3), 4)

    def test_nothing_requested(self):
        assert sample_positive_pairs(in_memory_manifest(1, 1, 3), 0) == []

    def test_deterministic(self):
        manifest = in_memory_manifest(3, 4, 5)
        assert sample_positive_pairs(manifest, 50, seed=4) == sample_positive_pairs(manifest, 50, seed=4)
        assert sample_positive_pairs(manifest, 50, seed=4) != sample_positive_pairs(manifest, 50, seed=5)

    def test_exhaustive_draw_is_unique_and_positive(self, tiny_corpus):
        manifest, _ = tiny_corpus
        pairs = sample_positive_pairs(manifest, positive_capacity(manifest), seed=1)
        assert len(pairs) == 48
        assert len({p.unordered for p in pairs}) == 48
        assert all(p.first.key == p.second.key for p in pairs)
        orientations = Counter(p.first.utterance_id < p.second.utterance_id for p in pairs)
        assert orientations[True] > 0 and orientations[False] > 0

    def test_pair_invariants(self):
        a, b = in_memory_manifest(2, 1, 2).records[:3:2]
        with pytest.raises(InvariantViolationError):
            PositivePair(a, b)
        with pytest.raises(InvariantViolationError):
            PositivePair(a, a)


# ============================================================================
# Batches
# ============================================================================

def pairs_of(manifest, count, seed=0):
    return sample_positive_pairs(manifest, count, seed=seed)


class TestBuildBatches:
    def test_keys_unique_per_batch(self, tiny_corpus):
        manifest, _ = tiny_corpus
        batches = build_batches(pairs_of(manifest, 48), 4, seed=3)
        assert len(batches) == 12
        for batch in batches:
            assert len(batch) == 4
            batch.check()

    def test_evaluation_batch_count(self):
        manifest = in_memory_manifest(8, 8, 25)
        batches = build_batches(pairs_of(manifest, 10_000), 40, training=False)
        assert len(batches) == 250
        assert all(len(b) == 40 and len(set(b.keys)) == 40 for b in batches)

    def test_shared_key_pairs_are_separated(self):
        manifest = in_memory_manifest(1, 2, 3)
        groups = list(manifest.groups().values())
        pairs = [PositivePair(*groups[0][:2]), PositivePair(*groups[0][1:]), PositivePair(*groups[1][:2])]
        batches = build_batches(pairs, 2, training=False)
        assert len(batches) == 2
        homes = [i for i, b in enumerate(batches) for p in b.pairs if p.key == groups[0][0].key]
        assert sorted(homes) == [0, 1]

    def test_training_drops_partial_batches(self, caplog):
        manifest = in_memory_manifest(1, 2, 3)
        groups = list(manifest.groups().values())
        pairs = [PositivePair(*groups[0][:2]), PositivePair(*groups[0][1:]), PositivePair(*groups[1][:2])]
        with caplog.at_level(logging.WARNING):
            batches = build_batches(pairs, 2, training=True)
        assert [len(b) for b in batches] == [2]
        assert 'under-filled' in caplog.text

    def test_deterministic(self, tiny_corpus):
        manifest, _ = tiny_corpus
        pairs = pairs_of(manifest, 40)
        first = [b.pairs for b in build_batches(pairs, 8, seed=[0, 1])]
        assert first == [b.pairs for b in build_batches(pairs, 8, seed=[0, 1])]

    def test_batch_size_one(self, tiny_corpus):
        with pytest.raises(BatchConstraintError):
            build_batches(pairs_of(tiny_corpus[0], 8), 1)

    def test_too_few_keys(self):
        with pytest.raises(BatchConstraintError, match='distinct'):
            build_batches(pairs_of(in_memory_manifest(1, 2, 3), 6), 3)

    def test_check_rejects_repeated_key(self):
        manifest = in_memory_manifest(1, 1, 3)
        items = manifest.records
        batch = PairBatch([PositivePair(items[0], items[1]), PositivePair(items[1], items[2])])
        with pytest.raises(InvariantViolationError):
            batch.check()


class TestLoadBatch:
    def test_tensor_shapes(self, tiny_corpus):
        manifest, _ = tiny_corpus
        (batch, *_) = build_batches(pairs_of(manifest, 8), 2)
        load_batch(batch, ClipLoader((16, 16)), length=6)
        assert batch.x1.shape == batch.x2.shape == (2, 1, 6, 16, 16)
        assert batch.x1.dtype == np.float32

    def test_augmentation_independent_of_workers(self, tiny_corpus):
        manifest, _ = tiny_corpus
        pairs = pairs_of(manifest, 8)
        serial = build_batches(pairs, 4)[0]
        threaded = build_batches(pairs, 4)[0]
        load_batch(serial, ClipLoader(), length=4, augment_seed=[7, 1, 0])
        load_batch(threaded, ClipLoader(), length=4, augment_seed=[7, 1, 0], workers=3)
        np.testing.assert_array_equal(serial.x1, threaded.x1)
        np.testing.assert_array_equal(serial.x2, threaded.x2)

    def test_frame_shape_mismatch(self, tiny_corpus):
        manifest, _ = tiny_corpus
        with pytest.raises(InvalidShapeError, match='model expects'):
            ClipLoader((100, 50)).frames(manifest.records[0])


# ============================================================================
# Length normalization and augmentation
# ============================================================================

def numbered_clip(count):
    """Frame k is filled with k"""
    return np.arange(count, dtype=np.float32)[:, None, None] * np.ones((1, 2, 3), dtype=np.float32)


class TestFixLength:
    def test_pad_repeats_last_frame(self):
        out = fix_length(numbered_clip(37), 50)
        assert out.shape == (50, 2, 3)
        np.testing.assert_array_equal(out[:, 0, 0], list(range(37)) + [36] * 13)

    def test_exact_length_untouched(self):
        clip = numbered_clip(50)
        assert fix_length(clip, 50) is clip

    def test_center_crop(self):
        out = fix_length(numbered_clip(60), 50)
        np.testing.assert_array_equal(out[:, 0, 0], np.arange(5, 55))

    def test_empty(self):
        with pytest.raises(EmptySequenceError):
            fix_length(np.zeros((0, 2, 2)))

    def test_not_a_clip(self):
        with pytest.raises(InvalidShapeError):
            fix_length(np.zeros((4, 4)))


class TestAugment:
    def test_no_events(self, rng):
        clip = rng.random((50, 6, 4)).astype(np.float32)
        np.testing.assert_array_equal(augment_clip(clip, ConstantRng(1.0)), clip)

    def test_flip_only(self, rng):
        clip = rng.random((50, 6, 4)).astype(np.float32)
        np.testing.assert_array_equal(augment_clip(clip, ConstantRng(0.18)), clip[:, :, ::-1])

    def test_intensities_untouched_without_rotation(self, rng, monkeypatch):
        monkeypatch.setattr('sampler.augment.ROTATE_P', 0.0)
        clip = rng.random((20, 6, 4)).astype(np.float32)
        sources = np.concatenate([clip, clip[:, :, ::-1]])
        for seed in range(10):
            out = augment_clip(clip, np.random.default_rng(seed), length=20)
            for frame in out:
                assert any(np.array_equal(frame, source) for source in sources)

    def test_deterministic_under_seed(self, rng):
        clip = rng.random((30, 8, 6)).astype(np.float32)
        a = augment_clip(clip, np.random.default_rng(11), length=30)
        b = augment_clip(clip, np.random.default_rng(11), length=30)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (30, 8, 6)

    def test_output_range_and_length(self, rng):
        clip = rng.random((12, 8, 6)).astype(np.float32)
        for seed in range(20):
            out = augment_clip(clip, np.random.default_rng(seed), length=10)
            assert out.shape == (10, 8, 6)
            assert out.min() >= 0.0 and out.max() <= 1.0
