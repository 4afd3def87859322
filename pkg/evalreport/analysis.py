"""Which phrases and word categories the model confuses"""

import pandas as pd

from dataprep.vocabulary import PHRASE_CATEGORIES, PhraseId

NONE_LABEL = 'None'
TOP_K = 20


def word_category_diff(phrase_a, phrase_b):
    """Categories whose words differ between two abbreviations, in slot order"""
    a, b = PhraseId.from_abbrev(phrase_a), PhraseId.from_abbrev(phrase_b)
    return tuple(c for c, x, y in zip(PHRASE_CATEGORIES, a.words, b.words) if x != y)


def category_label(categories):
    return '+'.join(categories) if categories else NONE_LABEL


def false_accepts(scored, threshold):
    return scored[(scored['label'] == 0) & (scored['score'] >= threshold)]


def _unordered(frame):
    ordered = [tuple(sorted(pair)) for pair in zip(frame['row_phrase'], frame['col_phrase'])]
    return [a for a, _ in ordered], [b for _, b in ordered]


def confused_phrases(errors, k=TOP_K):
    """
    Top-k unordered phrase pairs among the given false accepts, ranked per
    speaker-sameness by count (descending) then lexicographically.
    """
    columns = ['same_speaker', 'rank', 'phrase_a', 'phrase_b', 'count']
    if len(errors) == 0:
        return pd.DataFrame(columns=columns)
    first, second = _unordered(errors)
    pairs = pd.DataFrame({
        'same_speaker': errors['same_speaker'].astype(bool).to_numpy(),
        'phrase_a': first,
        'phrase_b': second,
    })
    counts = pairs.groupby(['same_speaker', 'phrase_a', 'phrase_b']).size().reset_index(name='count')
    counts = counts.sort_values(
        ['same_speaker', 'count', 'phrase_a', 'phrase_b'], ascending=[False, False, True, True]
    )
    ranked = counts.groupby('same_speaker', sort=False).head(k).copy()
    ranked['rank'] = ranked.groupby('same_speaker', sort=False).cumcount() + 1
    return ranked[columns].reset_index(drop=True)


def word_category_errors(errors):
    """Counts of false accepts by the set of differing word categories, per speaker-sameness"""
    columns = ['same_speaker', 'categories', 'count']
    if len(errors) == 0:
        return pd.DataFrame(columns=columns)
    labels = [
        category_label(word_category_diff(a, b))
        for a, b in zip(errors['row_phrase'], errors['col_phrase'])
    ]
    frame = pd.DataFrame({'same_speaker': errors['same_speaker'].astype(bool).to_numpy(), 'categories': labels})
    counts = frame.groupby(['same_speaker', 'categories']).size().reset_index(name='count')
    return counts.sort_values(
        ['same_speaker', 'count', 'categories'], ascending=[False, False, True]
    ).reset_index(drop=True)[columns]
