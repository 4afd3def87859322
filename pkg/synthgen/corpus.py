"""Synthetic corpus writer and its self-checks"""

import logging
import os
from itertools import combinations

import numpy as np
from tqdm import tqdm

from dataprep.clipio import load_clip, save_clip
from dataprep.manifest import Manifest, UtteranceRecord
from utils.errors import LipAuthError
from .render import render_utterance

logger = logging.getLogger(__name__)


def gen_corpus(config, out_dir):
    """Render every (speaker, phrase, utterance) and write clips plus manifest.tsv"""
    records = []
    total = config.speakers * config.phrases * config.utts
    with tqdm(total=total, desc='synth') as progress:
        for speaker_id in range(1, config.speakers + 1):
            clip_dir = os.path.join(out_dir, 'clips', f"s{speaker_id}")
            try:
                os.makedirs(clip_dir, exist_ok=True)
            except OSError as e:
                raise LipAuthError(f"cannot create {clip_dir}: {e}") from e
            for phrase_index in range(config.phrases):
                for k in range(config.utts):
                    clip = render_utterance(speaker_id, phrase_index, k, config)
                    path = os.path.abspath(os.path.join(clip_dir, f"{clip.utterance_id}.lbac"))
                    save_clip(path, clip)
                    records.append(UtteranceRecord(
                        utterance_id=clip.utterance_id,
                        speaker_id=speaker_id,
                        phrase_abbrev=clip.phrase,
                        path=path,
                        frame_count=clip.num_frames,
                        source='synthetic',
                    ))
                    progress.update(1)

    manifest = Manifest(records)
    manifest.write(os.path.join(out_dir, 'manifest.tsv'))
    return manifest


def _frames(record, cache):
    if record.path not in cache:
        cache[record.path] = load_clip(record.path).frames.astype(np.float64)
    return cache[record.path]


def _correlation(a, b):
    return float(np.corrcoef(a.ravel(), b.ravel())[0, 1])


def self_test(manifest, pairs=200, seed=0):
    """
    Correlation oracle: score half same-(speaker, phrase) pairs and half
    different-speaker-different-phrase pairs by whole-clip correlation and
    report the accuracy of the best single threshold.
    """
    rng = np.random.default_rng(seed)
    groups = [items for items in manifest.groups().values() if len(items) >= 2]
    if not groups:
        raise LipAuthError("self-test needs at least one (speaker, phrase) set with two utterances")
    records = manifest.records
    cache = {}
    scores, labels = [], []
    for _ in range(pairs // 2):
        group = groups[rng.integers(len(groups))]
        i, j = rng.choice(len(group), size=2, replace=False)
        scores.append(_correlation(_frames(group[i], cache), _frames(group[j], cache)))
        labels.append(True)
    attempts = 0
    while len(labels) < pairs:
        a, b = (records[i] for i in rng.integers(len(records), size=2))
        attempts += 1
        if attempts > 100 * pairs:
            raise LipAuthError("self-test needs at least two speakers and two phrases")
        if a.speaker_id == b.speaker_id or a.phrase_abbrev == b.phrase_abbrev:
            continue
        scores.append(_correlation(_frames(a, cache), _frames(b, cache)))
        labels.append(False)

    scores, labels = np.array(scores), np.array(labels)
    accuracy = max(np.mean((scores >= t) == labels) for t in np.unique(scores))
    logger.info(f"Correlation oracle accuracy {accuracy:.3f} on {pairs} pairs")
    return {'accuracy': float(accuracy), 'pairs': int(pairs)}


def signal_separation(manifest, per_group=2):
    """Mean squared frame difference within sets, across speakers and across phrases"""
    cache = {}
    groups = manifest.groups()
    picks = {key: items[:per_group] for key, items in groups.items()}
    intra, inter_speaker, inter_phrase = [], [], []
    for items in picks.values():
        for a, b in combinations(items, 2):
            intra.append(np.mean((_frames(a, cache) - _frames(b, cache)) ** 2))
    keys = list(picks)
    for (s1, p1), (s2, p2) in combinations(keys, 2):
        a, b = picks[(s1, p1)][0], picks[(s2, p2)][0]
        if a.frame_count != b.frame_count:
            continue
        distance = np.mean((_frames(a, cache) - _frames(b, cache)) ** 2)
        if p1 == p2:
            inter_speaker.append(distance)
        elif s1 == s2:
            inter_phrase.append(distance)

    def mean(values):
        return float(np.mean(values)) if values else float('nan')

    return {'intra': mean(intra), 'inter_speaker': mean(inter_speaker), 'inter_phrase': mean(inter_phrase)}
