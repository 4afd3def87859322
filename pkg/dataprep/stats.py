"""
Sub-pattern statistics

Positive-pair capacity of a corpus is sum over (speaker, phrase) sets of
K(K-1)/2 unordered pairs. The sum of K^2/2 is reported beside it for
comparison with published tables that appear to use it.
"""

import pandas as pd

from utils.errors import ManifestError
from .alignment import subpattern_words
from .vocabulary import SUBPATTERNS


def _stats_from_frame(frame):
    per_key = frame.groupby(['speaker_id', 'phrase']).size()
    per_phrase = frame.groupby('phrase').size()
    k = per_key.astype('int64')
    return {
        'speakers': int(frame['speaker_id'].nunique()),
        'phrases': int(frame['phrase'].nunique()),
        'median_per_phrase': float(per_phrase.median()),
        'median_per_speaker_phrase': float(per_key.median()),
        'unique_speaker_phrase': int(len(per_key)),
        'capacity_pairs': int((k * (k - 1) // 2).sum()),
        'capacity_half_squares': float((k * k / 2).sum()),
    }


def subpattern_stats(manifest):
    """Statistics of the manifest's command-color-preposition phrases"""
    if len(manifest) == 0:
        raise ManifestError("cannot compute statistics of an empty manifest")
    frame = manifest.to_frame().rename(columns={'phrase_abbrev': 'phrase'})
    return _stats_from_frame(frame)


def compare_subpatterns(alignments):
    """
    alignments: iterable of (speaker_id, list of AlignmentEntry).
    Returns a DataFrame with one column per sub-pattern.
    """
    alignments = list(alignments)
    if not alignments:
        raise ManifestError("no alignments to compare")
    columns = {}
    for name in SUBPATTERNS:
        rows = [
            {'speaker_id': speaker, 'phrase': ' '.join(subpattern_words(entries, name))}
            for speaker, entries in alignments
        ]
        columns[name] = _stats_from_frame(pd.DataFrame(rows))
    return pd.DataFrame(columns)
