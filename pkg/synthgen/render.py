"""
Synthetic GRID-shaped utterances

Speaker identity fixes the physical signature: a faint low-frequency skin
texture, lip tone, mouth position and mouth size. Phrase identity fixes the
behavioral signature: each word holds the mouth near its own aperture and
width level, with a seeded smooth wobble on top, so phrases sharing a word
share a third of their motion and words of one slot never share a level.
Each utterance adds a temporal jitter and pixel noise.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import expit

from dataprep.clipio import Clip
from dataprep.vocabulary import ALL_PHRASES, PHRASE_CATEGORIES, VOCABULARY
from utils.errors import LipAuthError

_SPEAKER, _WORD, _UTTERANCE = 1, 2, 3

LEVEL_RANGE = (0.1, 0.9)
WOBBLE = 0.3


@dataclass(frozen=True)
class SynthConfig:
    speakers: int = 8
    phrases: int = 8
    utts: int = 12
    t: int = 50
    h: int = 100
    w: int = 50
    noise: float = 0.05
    jitter: float = 1.5
    seed: int = 7

    def __post_init__(self):
        if min(self.speakers, self.phrases, self.utts, self.t, self.h, self.w) < 1:
            raise LipAuthError("synthetic corpus counts and extents must be >= 1")
        if self.phrases > len(ALL_PHRASES):
            raise LipAuthError(f"at most {len(ALL_PHRASES)} phrases exist")
        if not 0.0 <= self.noise < 0.5:
            raise LipAuthError(f"noise amplitude must lie in [0, 0.5), got {self.noise}")
        if self.jitter < 0:
            raise LipAuthError("jitter must be non-negative")


def phrase_for(index, phrases):
    """Spread the chosen phrases over the 64-phrase space, one per block of `step`"""
    step = len(ALL_PHRASES) // phrases
    return ALL_PHRASES[index * step + index % step]


def _rng(config, *tags):
    return np.random.default_rng([config.seed, *tags])


def smooth_walk(rng, length, window=7):
    """Moving average of seeded noise, rescaled to [0, 1]"""
    raw = rng.standard_normal(length + window - 1)
    walk = np.convolve(raw, np.ones(window) / window, mode='valid')
    span = walk.max() - walk.min()
    return (walk - walk.min()) / span if span > 0 else np.full(length, 0.5)


def speaker_signature(speaker_id, config):
    rng = _rng(config, _SPEAKER, speaker_id)
    coarse = rng.standard_normal((4, 3))
    texture = ndimage.zoom(coarse, (config.h / 4, config.w / 3), order=3, mode='nearest')
    texture = texture[:config.h, :config.w]
    texture = np.pad(texture, ((0, config.h - texture.shape[0]), (0, config.w - texture.shape[1])), mode='edge')
    texture = 0.45 + 0.08 * np.tanh(texture)
    return {
        'texture': texture,
        'lip_tone': rng.uniform(0.55, 0.85),
        'center': (config.h * rng.uniform(0.45, 0.55), config.w * rng.uniform(0.45, 0.55)),
        'radius': (config.h * rng.uniform(0.18, 0.22), config.w * rng.uniform(0.30, 0.36)),
    }


def word_levels(slot, config):
    """(aperture, width) resting levels of every word in a slot, evenly spaced and shuffled"""
    size = len(VOCABULARY[PHRASE_CATEGORIES[slot]])
    rng = _rng(config, _WORD, slot)
    levels = np.linspace(*LEVEL_RANGE, size)
    return levels[rng.permutation(size)], levels[rng.permutation(size)]


def phrase_trajectory(phrase, config):
    """Aperture and width curves over T built from one segment per word"""
    bounds = np.linspace(0, config.t, len(PHRASE_CATEGORIES) + 1).round().astype(int)
    aperture = np.empty(config.t)
    width = np.empty(config.t)
    for slot, (word, lo, hi) in enumerate(zip(phrase.words, bounds[:-1], bounds[1:])):
        if hi <= lo:
            continue
        word_index = VOCABULARY[PHRASE_CATEGORIES[slot]].index(word)
        open_levels, wide_levels = word_levels(slot, config)
        rng = _rng(config, _WORD, slot, word_index)
        window = max(1, min(5, hi - lo))
        aperture[lo:hi] = open_levels[word_index] + WOBBLE * (smooth_walk(rng, hi - lo, window) - 0.5)
        width[lo:hi] = wide_levels[word_index] + WOBBLE * (smooth_walk(rng, hi - lo, window) - 0.5)
    # soften the steps between words
    aperture = ndimage.gaussian_filter1d(np.clip(aperture, 0.0, 1.0), 1.0, mode='nearest')
    width = ndimage.gaussian_filter1d(np.clip(width, 0.0, 1.0), 1.0, mode='nearest')
    return aperture, width


def render_utterance(speaker_id, phrase_index, utterance_index, config):
    """Deterministic T x H x W clip for (speaker, phrase, utterance)"""
    if not 1 <= speaker_id <= config.speakers or not 0 <= phrase_index < config.phrases:
        raise LipAuthError(f"ids ({speaker_id}, {phrase_index}) outside the configured corpus")
    phrase = phrase_for(phrase_index, config.phrases)
    signature = speaker_signature(speaker_id, config)
    aperture, width = phrase_trajectory(phrase, config)
    rng = _rng(config, _UTTERANCE, speaker_id, phrase_index, utterance_index)

    # temporal jitter: smooth time warp of the trajectories
    steps = np.arange(config.t, dtype=np.float64)
    if config.jitter > 0:
        warp = (smooth_walk(rng, config.t) - 0.5) * 2 * config.jitter
        steps = np.clip(steps + warp, 0, config.t - 1)
    aperture = np.interp(steps, np.arange(config.t), aperture)
    width = np.interp(steps, np.arange(config.t), width)

    yy, xx = np.mgrid[0:config.h, 0:config.w].astype(np.float64)
    cy, cx = signature['center']
    base_ry, base_rx = signature['radius']
    frames = np.empty((config.t, config.h, config.w))
    for t in range(config.t):
        ry = base_ry * (0.2 + 0.9 * aperture[t])
        rx = base_rx * (0.6 + 0.6 * width[t])
        dist = np.sqrt(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2)
        lips = expit((1.35 - dist) * 8.0)
        opening = expit((1.0 - dist) * 8.0)
        frame = signature['texture'] * (1 - lips) + signature['lip_tone'] * lips
        frames[t] = frame * (1 - opening) + 0.05 * opening
    if config.noise > 0:
        frames += rng.normal(0.0, config.noise, size=frames.shape)
    frames = np.clip(frames, 0.0, 1.0)
    return Clip(frames, speaker_id, phrase.abbrev, f"s{speaker_id}_{phrase.abbrev}_{utterance_index:03d}")
