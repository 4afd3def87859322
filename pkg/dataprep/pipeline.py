"""
Customized GRID corpus preparation

Expected layout:

    <grid-root>/s<N>/<utt>.npy | <utt>.mpg      raw RGB frames
    <grid-root>/s<N>/align/<utt>.align          word alignment
    <landmarks>/s<N>/<utt>.lmk                  per-frame landmarks

Each kept utterance is cut to its command-color-preposition frames, cropped
to the mouth, converted to 100x50 grayscale and written as
<out>/clips/s<N>/<utt>.lbac.
"""

import glob
import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from config.config import Config
from utils.errors import LipAuthError
from .alignment import extract_subphrase, read_alignment
from .clipio import Clip, save_clip
from .frames import FRAME_SHAPE, preprocess_frame, read_frames
from .landmarks import crop_mouth_roi, read_landmark_file
from .manifest import Manifest, UtteranceRecord

logger = logging.getLogger(__name__)

VIDEO_EXTENSIONS = ('.npy', '.mpg', '.mp4', '.avi')
_SPEAKER_DIR = re.compile(r'^s(\d+)$')


@dataclass
class PrepReport:
    kept: int = 0
    discarded: int = 0
    skipped: list = field(default_factory=list)  # (utterance id, reason)

    @property
    def discard_ratio(self):
        judged = self.kept + self.discarded
        return self.discarded / judged if judged else 0.0


@dataclass(frozen=True)
class RawUtterance:
    speaker_id: int
    name: str
    video_path: str
    alignment_path: str
    landmark_path: str

    @property
    def utterance_id(self):
        return f"s{self.speaker_id}_{self.name}"


def discover_utterances(grid_root, landmark_root):
    found = []
    for speaker_dir in sorted(os.listdir(grid_root)):
        match = _SPEAKER_DIR.match(speaker_dir)
        if not match:
            continue
        speaker_id = int(match.group(1))
        for video in sorted(glob.glob(os.path.join(grid_root, speaker_dir, '*'))):
            name, ext = os.path.splitext(os.path.basename(video))
            if ext.lower() not in VIDEO_EXTENSIONS:
                continue
            found.append(RawUtterance(
                speaker_id=speaker_id,
                name=name,
                video_path=video,
                alignment_path=os.path.join(grid_root, speaker_dir, 'align', f"{name}.align"),
                landmark_path=os.path.join(landmark_root, speaker_dir, f"{name}.lmk"),
            ))
    return found


def passes_confidence(landmarks, threshold=Config.CONFIDENCE_THRESHOLD):
    """Keep an utterance only if every frame's detection confidence reaches the threshold"""
    return all(frame.confidence >= threshold for frame in landmarks)


def _process(raw, out_dir, units_per_frame, threshold, shape):
    """Returns ('kept', record) | ('discarded', None) | ('skipped', reason)"""
    if not os.path.exists(raw.landmark_path):
        return 'skipped', f"missing landmark file {raw.landmark_path}"
    if not os.path.exists(raw.alignment_path):
        return 'skipped', f"missing alignment file {raw.alignment_path}"
    try:
        landmarks = read_landmark_file(raw.landmark_path)
        if not passes_confidence(landmarks, threshold):
            return 'discarded', None

        start, end, phrase = extract_subphrase(read_alignment(raw.alignment_path), units_per_frame)
        video = read_frames(raw.video_path)
        end = min(end, len(video), len(landmarks))
        if start >= end:
            return 'skipped', f"sub-phrase frames {start}..{end} fall outside the recording"
        frames = np.stack([
            preprocess_frame(crop_mouth_roi(video[t], landmarks[t]), shape)
            for t in range(start, end)
        ])
    except LipAuthError as e:
        return 'skipped', str(e)

    clip_dir = os.path.join(out_dir, 'clips', f"s{raw.speaker_id}")
    os.makedirs(clip_dir, exist_ok=True)
    clip_path = os.path.join(clip_dir, f"{raw.name}.lbac")
    save_clip(clip_path, Clip(frames, raw.speaker_id, phrase.abbrev, raw.utterance_id))
    record = UtteranceRecord(
        utterance_id=raw.utterance_id,
        speaker_id=raw.speaker_id,
        phrase_abbrev=phrase.abbrev,
        path=os.path.abspath(clip_path),
        frame_count=len(frames),
        source='grid',
    )
    return 'kept', record


def build_manifest(grid_root, landmark_root, out_dir, units_per_frame=Config.UNITS_PER_FRAME,
                   threshold=Config.CONFIDENCE_THRESHOLD, shape=FRAME_SHAPE, workers=1):
    """Prepare every discoverable utterance; returns (Manifest, PrepReport)"""
    os.makedirs(out_dir, exist_ok=True)
    raws = discover_utterances(grid_root, landmark_root)
    logger.info(f"Found {len(raws)} recordings under {grid_root}")

    def job(raw):
        return _process(raw, out_dir, units_per_frame, threshold, shape)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(tqdm(pool.map(job, raws), total=len(raws), desc='prep'))
    else:
        outcomes = [job(raw) for raw in tqdm(raws, desc='prep')]

    report = PrepReport()
    records = []
    for raw, (status, payload) in zip(raws, outcomes):
        if status == 'kept':
            report.kept += 1
            records.append(payload)
        elif status == 'discarded':
            report.discarded += 1
            logger.info(f"Discarded {raw.utterance_id}: landmark confidence below {threshold}")
        else:
            report.skipped.append((raw.utterance_id, payload))
            logger.warning(f"Skipped {raw.utterance_id}: {payload}")

    manifest = Manifest(records)
    manifest.write(os.path.join(out_dir, 'manifest.tsv'))
    logger.info(
        f"Kept {report.kept}, discarded {report.discarded} "
        f"({report.discard_ratio:.1%}), skipped {len(report.skipped)}"
    )
    return manifest, report
