"""
GRID word alignment parsing and sub-phrase cutting

Alignment text holds one "start end word" triple per line in integer ticks;
1000 ticks make one video frame at 25 fps.
"""

import math
from dataclasses import dataclass

from utils.errors import AlignmentParseError, VocabularyError
from .vocabulary import SILENCE_TOKENS, SLOTS, SUBPATTERNS, PhraseId, normalize_word


@dataclass(frozen=True)
class AlignmentEntry:
    start: int
    end: int
    word: str

    @property
    def is_silence(self):
        return self.word in SILENCE_TOKENS


def parse_alignment(text):
    entries = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise AlignmentParseError(number, f"expected 'start end word', got '{line.strip()}'")
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError:
            raise AlignmentParseError(number, f"non-integer span in '{line.strip()}'")
        if start >= end:
            raise AlignmentParseError(number, f"start {start} is not before end {end}")
        if entries and start < entries[-1].end:
            raise AlignmentParseError(number, f"span {start}-{end} overlaps or precedes the previous one")
        entries.append(AlignmentEntry(start, end, parts[2].lower()))
    return entries


def read_alignment(path):
    with open(path, 'r', encoding='utf-8') as fh:
        return parse_alignment(fh.read())


def spoken_words(entries):
    """Non-silence entries, validated against the six GRID slots"""
    words = [e for e in entries if not e.is_silence]
    if len(words) != len(SLOTS):
        raise VocabularyError(
            f"expected the six-word GRID pattern, got {len(words)} words: {[e.word for e in words]}"
        )
    for slot, entry in zip(SLOTS, words):
        normalize_word(slot, entry.word)
    return words


def subpattern_words(entries, pattern='command-color-preposition'):
    """Normalized words of a sub-pattern, e.g. ('place', 'blue', 'at')"""
    words = spoken_words(entries)
    return tuple(normalize_word(SLOTS[i], words[i].word) for i in SUBPATTERNS[pattern])


def extract_subphrase(entries, units_per_frame=1000):
    """
    Frame range [frame_start, frame_end) covering command through preposition,
    plus the phrase id of those three words.
    """
    words = spoken_words(entries)
    phrase = PhraseId.from_words([w.word for w in words[:3]])
    frame_start = math.floor(words[0].start / units_per_frame)
    frame_end = math.ceil(words[2].end / units_per_frame)
    return frame_start, frame_end, phrase
