"""
GRID word categories and authentication phrase identifiers

A GRID sentence has six slots: command, color, preposition, letter, digit,
adverb. An authentication phrase is the command-color-preposition prefix and
is abbreviated by the first letter of each word ("place green by" -> "pgb").
"""

from dataclasses import dataclass
from itertools import product

from utils.errors import VocabularyError

SLOTS = ('command', 'color', 'preposition', 'letter', 'digit', 'adverb')

DIGIT_WORDS = ('zero', 'one', 'two', 'three', 'four', 'five', 'six', 'seven', 'eight', 'nine')

VOCABULARY = {
    'command': ('bin', 'lay', 'place', 'set'),
    'color': ('blue', 'green', 'red', 'white'),
    'preposition': ('at', 'by', 'in', 'with'),
    'letter': tuple('abcdefghijklmnopqrstuvxyz'),  # GRID has no "w"
    'digit': DIGIT_WORDS,
    'adverb': ('again', 'now', 'please', 'soon'),
}

PHRASE_CATEGORIES = ('command', 'color', 'preposition')

# Sub-patterns over the six slots, by slot index
SUBPATTERNS = {
    'command-color-preposition': (0, 1, 2),
    'letter-digit-adverb': (3, 4, 5),
    'digit-adverb': (4, 5),
    'command-color-preposition-letter': (0, 1, 2, 3),
}

SILENCE_TOKENS = frozenset({'sil', 'sp'})


def normalize_word(slot, word):
    """Lower-case a word and map numerals to digit words; raise if outside the slot vocabulary"""
    token = word.strip().lower()
    if slot == 'digit' and token.isdigit() and len(token) == 1:
        token = DIGIT_WORDS[int(token)]
    if token not in VOCABULARY[slot]:
        raise VocabularyError(f"'{word}' is not a GRID {slot} word")
    return token


@dataclass(frozen=True, order=True)
class PhraseId:
    command: str
    color: str
    preposition: str

    def __post_init__(self):
        for slot in PHRASE_CATEGORIES:
            normalize_word(slot, getattr(self, slot))

    @property
    def abbrev(self):
        return self.command[0] + self.color[0] + self.preposition[0]

    @property
    def words(self):
        return (self.command, self.color, self.preposition)

    def __str__(self):
        return ' '.join(self.words)

    @classmethod
    def from_words(cls, words):
        if len(words) != 3:
            raise VocabularyError(f"a phrase has three words, got {list(words)}")
        return cls(*(normalize_word(slot, w) for slot, w in zip(PHRASE_CATEGORIES, words)))

    @classmethod
    def from_abbrev(cls, abbrev):
        if len(abbrev) != 3 or abbrev not in _BY_ABBREV:
            raise VocabularyError(f"unknown phrase abbreviation '{abbrev}'")
        return _BY_ABBREV[abbrev]


ALL_PHRASES = tuple(PhraseId(*words) for words in product(*(VOCABULARY[c] for c in PHRASE_CATEGORIES)))
_BY_ABBREV = {phrase.abbrev: phrase for phrase in ALL_PHRASES}
