"""Alignment cutting, mouth cropping, clip files, manifests and corpus statistics"""

import os
import shutil
import struct
from dataclasses import replace

import numpy as np
import pytest

from dataprep import (
    ALL_PHRASES, Clip, LandmarkFrame, Manifest, PhraseId, UtteranceRecord, build_manifest,
    compare_subpatterns, crop_mouth_roi, extract_subphrase, load_clip, mouth_rectangle,
    parse_alignment, preprocess_frame, save_clip, subpattern_stats, validate_manifest,
    write_landmark_file,
)
from dataprep.clipio import quantize
from dataprep.frames import read_frames
from dataprep.landmarks import NUM_LANDMARKS, format_landmark_line, parse_landmark_line
from dataprep.vocabulary import normalize_word
from utils.errors import (
    AlignmentParseError, ClipFormatError, DegenerateROIError, ManifestError, VocabularyError,
)

PLACE_BLUE_AT = """0 500 sil
500 1000 place
1000 1500 blue
1500 2000 at
2000 2500 f
2500 3000 nine
3000 3500 now
3500 4000 sil
"""


def alignment_text(words, tick=1000):
    return ''.join(f"{i * tick} {(i + 1) * tick} {w}\n" for i, w in enumerate(words))


def landmarks_at(left, right, top, bottom, confidence=0.9):
    """Landmark frame whose mouth midpoints are (x, y) tuples"""
    points = np.zeros((NUM_LANDMARKS, 2))
    points[57], points[287], points[164], points[18] = left, right, top, bottom
    return LandmarkFrame(points, confidence)


def record(utterance_id, speaker, phrase, path='x.lbac', frames=4, source='synthetic'):
    return UtteranceRecord(utterance_id, speaker, phrase, path, frames, source)


# ============================================================================
# Alignments
# ============================================================================

class TestParseAlignment:
    def test_two_entries(self):
        entries = parse_alignment("0 1000 bin\n1000 2000 blue")
        assert [(e.start, e.end, e.word) for e in entries] == [(0, 1000, 'bin'), (1000, 2000, 'blue')]

    def test_empty(self):
        assert parse_alignment('') == []

    def test_start_after_end(self):
        with pytest.raises(AlignmentParseError, match='line 1'):
            parse_alignment("5 3 bin")

    def test_error_names_line(self):
        with pytest.raises(AlignmentParseError) as excinfo:
            parse_alignment("0 1000 bin\n\n500 1500 blue")
        assert excinfo.value.line_number == 3

    def test_malformed_line(self):
        with pytest.raises(AlignmentParseError, match='line 2'):
            parse_alignment("0 1000 bin\n1000 2000")

    def test_non_integer_span(self):
        with pytest.raises(AlignmentParseError):
            parse_alignment("0 1e3 bin")

    def test_silence_flagged(self):
        entries = parse_alignment(PLACE_BLUE_AT)
        assert entries[0].is_silence and entries[-1].is_silence
        assert not entries[1].is_silence


class TestExtractSubphrase:
    def test_grid_example(self):
        start, end, phrase = extract_subphrase(parse_alignment(PLACE_BLUE_AT))
        assert str(phrase) == 'place blue at'
        assert phrase.abbrev == 'pba'
        assert (start, end) == (0, 2)

    def test_whole_frame_spans(self):
        text = alignment_text(['place', 'green', 'by', 'a', '9', 'soon'])
        assert extract_subphrase(parse_alignment(text), 1000) == (0, 3, PhraseId('place', 'green', 'by'))

    def test_floor_and_ceil(self):
        text = alignment_text(['bin', 'red', 'in', 'z', 'two', 'again'], tick=1300)
        start, end, _ = extract_subphrase(parse_alignment(text), 1000)
        assert (start, end) == (0, 4)

    def test_word_outside_vocabulary(self):
        text = alignment_text(['put', 'blue', 'at', 'f', 'nine', 'now'])
        with pytest.raises(VocabularyError):
            extract_subphrase(parse_alignment(text))

    def test_wrong_word_count(self):
        with pytest.raises(VocabularyError):
            extract_subphrase(parse_alignment(alignment_text(['place', 'blue', 'at'])))


class TestVocabulary:
    def test_phrase_space(self):
        assert len(ALL_PHRASES) == 64
        assert len({p.abbrev for p in ALL_PHRASES}) == 64

    def test_abbreviation_lookup(self):
        assert PhraseId.from_abbrev('pgb').words == ('place', 'green', 'by')
        with pytest.raises(VocabularyError):
            PhraseId.from_abbrev('xyz')

    def test_digits_normalized(self):
        assert normalize_word('digit', '9') == 'nine'
        assert normalize_word('command', 'PLACE') == 'place'
        with pytest.raises(VocabularyError):
            normalize_word('letter', 'w')


# ============================================================================
# Landmarks and frames
# ============================================================================

class TestMouthRoi:
    def test_symmetric_rectangle(self):
        lm = landmarks_at((10, 20), (30, 20), (20, 10), (20, 30))
        assert mouth_rectangle(lm, (40, 60)) == (10, 10, 30, 30)
        assert crop_mouth_roi(np.zeros((40, 60, 3)), lm).shape == (20, 20, 3)

    def test_clamped_to_frame(self):
        lm = landmarks_at((-5, 20), (30, 20), (20, 10), (20, 100))
        assert mouth_rectangle(lm, (40, 60)) == (0.0, 10, 30, 40.0)
        assert crop_mouth_roi(np.zeros((40, 60)), lm).shape == (30, 30)

    def test_fractional_bounds_cover_the_rectangle(self):
        lm = landmarks_at((10.5, 20), (29.2, 20), (20, 10.7), (20, 30.1))
        assert crop_mouth_roi(np.zeros((40, 60)), lm).shape == (21, 20)

    def test_degenerate(self):
        lm = landmarks_at((30, 20), (10, 20), (20, 10), (20, 30))
        with pytest.raises(DegenerateROIError):
            mouth_rectangle(lm, (40, 60))

    def test_wrong_point_count(self):
        with pytest.raises(ManifestError):
            LandmarkFrame(np.zeros((10, 2)), 1.0)

    def test_line_round_trip(self):
        lm = landmarks_at((10.25, 20.5), (30, 20), (20, 10), (20, 30), confidence=0.4912)
        parsed = parse_landmark_line(format_landmark_line(lm))
        assert parsed.confidence == pytest.approx(0.4912)
        np.testing.assert_allclose(parsed.points, lm.points, atol=5e-4)


class TestPreprocessFrame:
    def test_uniform_gray(self):
        out = preprocess_frame(np.full((30, 20, 3), 128, dtype=np.uint8))
        assert out.shape == (100, 50)
        np.testing.assert_allclose(out, 128 / 255, atol=1e-9)

    def test_white(self):
        np.testing.assert_allclose(preprocess_frame(np.full((7, 9, 3), 255, dtype=np.uint8)), 1.0)

    def test_luma_weights(self):
        red = np.zeros((4, 4, 3))
        red[..., 0] = 255
        np.testing.assert_allclose(preprocess_frame(red, shape=(2, 2)), 0.299)

    def test_empty_crop(self):
        with pytest.raises(ClipFormatError):
            preprocess_frame(np.zeros((0, 5, 3)))


# ============================================================================
# Clip files
# ============================================================================

class TestClipIO:
    def test_round_trip_is_bit_exact(self, tmp_path, rng):
        frames = rng.random((5, 6, 7))
        path = str(tmp_path / 'a.lbac')
        save_clip(path, Clip(frames))
        loaded = load_clip(path, speaker_id=3)
        assert loaded.frames.dtype == np.float32
        assert loaded.speaker_id == 3
        np.testing.assert_array_equal(quantize(loaded.frames), quantize(frames))

    def test_truncated(self, tmp_path):
        path = tmp_path / 'a.lbac'
        save_clip(str(path), Clip(np.ones((2, 3, 3))))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(ClipFormatError, match='pixel bytes'):
            load_clip(str(path))

    def test_zero_frames(self, tmp_path):
        path = tmp_path / 'a.lbac'
        path.write_bytes(struct.pack('<4sBHHH', b'LBAC', 1, 0, 4, 4))
        with pytest.raises(ClipFormatError, match='empty clip'):
            load_clip(str(path))

    def test_bad_magic(self, tmp_path):
        path = tmp_path / 'a.lbac'
        path.write_bytes(struct.pack('<4sBHHH', b'XXXX', 1, 1, 1, 1) + b'\x00')
        with pytest.raises(ClipFormatError, match='magic'):
            load_clip(str(path))

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / 'a.lbac'
        path.write_bytes(struct.pack('<4sBHHH', b'LBAC', 9, 1, 1, 1) + b'\x00')
        with pytest.raises(ClipFormatError, match='version'):
            load_clip(str(path))

    def test_refuses_empty_clip(self, tmp_path):
        with pytest.raises(ClipFormatError):
            save_clip(str(tmp_path / 'a.lbac'), np.zeros((0, 2, 2)))


# ============================================================================
# Manifests
# ============================================================================

class TestManifest:
    def test_round_trip(self, tmp_path):
        clips = tmp_path / 'clips'
        records = [
            record('s1_pba_000', 1, 'pba', str(clips / 'a.lbac')),
            record('s2_bgi_001', 2, 'bgi', str(clips / 'b.lbac'), frames=9, source='grid'),
        ]
        path = str(tmp_path / 'manifest.tsv')
        Manifest(records).write(path)
        assert open(path, encoding='utf-8').readline().startswith('#utterance_id\t')
        assert Manifest.read(path).records == records

    def test_groups_and_subset(self):
        manifest = Manifest([
            record('b', 1, 'pba'), record('a', 1, 'pba'), record('c', 2, 'pba'), record('d', 1, 'sgw'),
        ])
        groups = manifest.groups()
        assert list(groups) == [(1, 'pba'), (1, 'sgw'), (2, 'pba')]
        assert [r.utterance_id for r in groups[(1, 'pba')]] == ['a', 'b']
        assert len(manifest.subset([2])) == 1
        assert manifest.phrases == ['pba', 'sgw']

    def test_unknown_source(self, tmp_path):
        path = tmp_path / 'manifest.tsv'
        path.write_text('#utterance_id\tspeaker_id\tphrase_abbrev\tpath\tframe_count\tsource\n'
                        'u\t1\tpba\tu.lbac\t3\tvideo\n', encoding='utf-8')
        with pytest.raises(ManifestError, match='unknown source'):
            Manifest.read(str(path))

    def test_unknown_phrase(self, tmp_path):
        path = tmp_path / 'manifest.tsv'
        path.write_text('#utterance_id\tspeaker_id\tphrase_abbrev\tpath\tframe_count\tsource\n'
                        'u\t1\tzzz\tu.lbac\t3\tgrid\n', encoding='utf-8')
        with pytest.raises(VocabularyError):
            Manifest.read(str(path))

    def test_validate_rendered_corpus(self, tiny_corpus):
        manifest, _ = tiny_corpus
        assert validate_manifest(manifest) == len(manifest)

    def test_validate_frame_count(self, tiny_corpus):
        manifest, _ = tiny_corpus
        broken = Manifest([replace(manifest.records[0], frame_count=99)])
        with pytest.raises(ManifestError, match='99 frames'):
            validate_manifest(broken)

    def test_validate_missing_clip(self, tmp_path):
        with pytest.raises(ManifestError, match='missing'):
            validate_manifest(Manifest([record('u', 1, 'pba', str(tmp_path / 'gone.lbac'))]))

    def test_validate_duplicates(self):
        with pytest.raises(ManifestError, match='duplicate'):
            validate_manifest(Manifest([record('u', 1, 'pba'), record('u', 1, 'pba')]), check_clips=False)


# ============================================================================
# Statistics
# ============================================================================

class TestStats:
    def test_single_set_capacity(self):
        manifest = Manifest([record(f"u{k:02d}", 1, 'pba') for k in range(16)])
        stats = subpattern_stats(manifest)
        assert stats['capacity_pairs'] == 120
        assert stats['capacity_half_squares'] == 128.0
        assert stats['median_per_speaker_phrase'] == 16

    def test_synthetic_sized_corpus(self):
        phrases = [p.abbrev for p in ALL_PHRASES[:8]]
        manifest = Manifest([
            record(f"s{s}_{p}_{k}", s, p) for s in range(1, 9) for p in phrases for k in range(10)
        ])
        stats = subpattern_stats(manifest)
        assert stats['unique_speaker_phrase'] == 64
        assert stats['capacity_pairs'] == 2880
        assert stats['speakers'] == 8 and stats['phrases'] == 8
        assert stats['median_per_phrase'] == 80

    def test_empty_manifest(self):
        with pytest.raises(ManifestError):
            subpattern_stats(Manifest())

    def test_compare_subpatterns(self):
        alignments = [
            (1, parse_alignment(alignment_text(['place', 'blue', 'at', 'f', 'nine', 'now']))),
            (1, parse_alignment(alignment_text(['place', 'blue', 'at', 'g', 'one', 'soon']))),
            (2, parse_alignment(alignment_text(['place', 'blue', 'at', 'f', 'nine', 'now']))),
        ]
        table = compare_subpatterns(alignments)
        assert table.loc['phrases', 'command-color-preposition'] == 1
        assert table.loc['capacity_pairs', 'command-color-preposition'] == 1
        assert table.loc['phrases', 'letter-digit-adverb'] == 2
        assert table.loc['unique_speaker_phrase', 'letter-digit-adverb'] == 3


# ============================================================================
# Corpus preparation
# ============================================================================

@pytest.fixture
def raw_grid(tmp_path, rng):
    """Three recordings of speaker 1: clean, one low-confidence frame, no landmarks"""
    grid, marks = tmp_path / 'grid', tmp_path / 'landmarks'
    (grid / 's1' / 'align').mkdir(parents=True)
    (marks / 's1').mkdir(parents=True)
    text = alignment_text(['sil', 'place', 'blue', 'at', 'f', 'nine', 'now', 'sil'])
    for name in ('pbaf9n', 'pbag1s', 'pbah2a'):
        np.save(grid / 's1' / f"{name}.npy", rng.integers(0, 256, size=(8, 40, 60, 3), dtype=np.uint8))
        (grid / 's1' / 'align' / f"{name}.align").write_text(text, encoding='utf-8')
    clean = [landmarks_at((10, 20), (30, 20), (20, 10), (20, 30)) for _ in range(8)]
    write_landmark_file(str(marks / 's1' / 'pbaf9n.lmk'), clean)
    low = list(clean)
    low[5] = landmarks_at((10, 20), (30, 20), (20, 10), (20, 30), confidence=0.49)
    write_landmark_file(str(marks / 's1' / 'pbag1s.lmk'), low)
    return str(grid), str(marks)


def test_build_manifest(raw_grid, tmp_path):
    grid, marks = raw_grid
    out = tmp_path / 'prepared'
    manifest, report = build_manifest(grid, marks, str(out))

    assert (report.kept, report.discarded) == (1, 1)
    assert [uid for uid, _ in report.skipped] == ['s1_pbah2a']
    assert report.discard_ratio == 0.5

    (kept,) = manifest.records
    assert kept.key == (1, 'pba')
    assert kept.frame_count == 3
    clip = load_clip(kept.path)
    assert clip.frames.shape == (3, 100, 50)
    assert os.path.exists(out / 'manifest.tsv')
    assert validate_manifest(Manifest.read(str(out / 'manifest.tsv'))) == 1


def test_build_manifest_threshold_is_inclusive(raw_grid, tmp_path):
    grid, marks = raw_grid
    _, report = build_manifest(grid, marks, str(tmp_path / 'prepared'), threshold=0.49, workers=2)
    assert (report.kept, report.discarded) == (2, 0)


def test_corrupt_recording_is_skipped(raw_grid, tmp_path):
    grid, marks = raw_grid
    s1 = os.path.join(grid, 's1')
    with open(os.path.join(s1, 'pbai3n.npy'), 'wb') as fh:
        fh.write(np.random.default_rng(4).integers(0, 256, size=512, dtype=np.uint8).tobytes())
    shutil.copy(os.path.join(s1, 'align', 'pbaf9n.align'), os.path.join(s1, 'align', 'pbai3n.align'))
    shutil.copy(os.path.join(marks, 's1', 'pbaf9n.lmk'), os.path.join(marks, 's1', 'pbai3n.lmk'))

    manifest, report = build_manifest(grid, marks, str(tmp_path / 'prepared'))
    skipped = dict(report.skipped)
    assert sorted(skipped) == ['s1_pbah2a', 's1_pbai3n']
    assert 'pbai3n.npy' in skipped['s1_pbai3n']
    assert [record.utterance_id for record in manifest.records] == ['s1_pbaf9n']


def test_read_frames_wraps_decode_errors(tmp_path):
    bad = tmp_path / 'bad.npy'
    bad.write_bytes(b'\x00not a frame stack')
    with pytest.raises(ClipFormatError, match='bad.npy'):
        read_frames(str(bad))
    flat = tmp_path / 'flat.npy'
    np.save(flat, np.zeros(5))
    with pytest.raises(ClipFormatError, match='frame stack'):
        read_frames(str(flat))
