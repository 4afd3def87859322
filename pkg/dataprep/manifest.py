"""
Utterance manifests

On disk: UTF-8 TSV with a "#"-prefixed header row and the columns
utterance_id, speaker_id, phrase_abbrev, path, frame_count, source.
Paths are written relative to the manifest file and held absolute in memory.
"""

import logging
import os
from collections import defaultdict
from dataclasses import asdict, dataclass

import pandas as pd

from utils.errors import ClipFormatError, ManifestError
from .clipio import load_clip
from .vocabulary import PhraseId

logger = logging.getLogger(__name__)

COLUMNS = ['utterance_id', 'speaker_id', 'phrase_abbrev', 'path', 'frame_count', 'source']
SOURCES = ('grid', 'synthetic')


@dataclass(frozen=True)
class UtteranceRecord:
    utterance_id: str
    speaker_id: int
    phrase_abbrev: str
    path: str
    frame_count: int
    source: str = 'grid'

    @property
    def key(self):
        return (self.speaker_id, self.phrase_abbrev)


class Manifest:
    """Ordered collection of utterance records"""

    def __init__(self, records=()):
        self.records = list(records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def speakers(self):
        return sorted({r.speaker_id for r in self.records})

    @property
    def phrases(self):
        return sorted({r.phrase_abbrev for r in self.records})

    def groups(self):
        """(speaker, phrase) -> records sorted by utterance id"""
        grouped = defaultdict(list)
        for record in self.records:
            grouped[record.key].append(record)
        return {key: sorted(items, key=lambda r: r.utterance_id) for key, items in sorted(grouped.items())}

    def subset(self, speakers):
        wanted = set(speakers)
        return Manifest(r for r in self.records if r.speaker_id in wanted)

    def to_frame(self):
        return pd.DataFrame([asdict(r) for r in self.records], columns=COLUMNS)

    def write(self, path):
        base = os.path.dirname(os.path.abspath(path))
        frame = self.to_frame()
        frame['path'] = [os.path.relpath(p, base) for p in frame['path']]
        try:
            with open(path, 'w', encoding='utf-8', newline='') as fh:
                fh.write('#' + '\t'.join(COLUMNS) + '\n')
                frame.to_csv(fh, sep='\t', header=False, index=False)
        except OSError as e:
            raise ManifestError(f"cannot write manifest {path}: {e}") from e
        logger.info(f"Wrote {len(frame)} records to {path}")

    @classmethod
    def read(cls, path):
        try:
            frame = pd.read_csv(path, sep='\t', header=0, dtype={'phrase_abbrev': str, 'utterance_id': str})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ManifestError(f"cannot read manifest {path}: {e}") from e
        frame.columns = [c.lstrip('#') for c in frame.columns]
        if list(frame.columns) != COLUMNS:
            raise ManifestError(f"{path}: expected columns {COLUMNS}, got {list(frame.columns)}")

        base = os.path.dirname(os.path.abspath(path))
        records = []
        for row in frame.itertuples(index=False):
            if row.source not in SOURCES:
                raise ManifestError(f"{path}: unknown source '{row.source}' for {row.utterance_id}")
            PhraseId.from_abbrev(row.phrase_abbrev)
            clip_path = row.path if os.path.isabs(row.path) else os.path.normpath(os.path.join(base, row.path))
            records.append(UtteranceRecord(
                utterance_id=row.utterance_id,
                speaker_id=int(row.speaker_id),
                phrase_abbrev=row.phrase_abbrev,
                path=clip_path,
                frame_count=int(row.frame_count),
                source=row.source,
            ))
        return cls(records)


def validate_manifest(manifest, check_clips=True):
    """Raise ManifestError on the first broken record; returns the record count"""
    seen = set()
    for record in manifest:
        triple = (record.speaker_id, record.phrase_abbrev, record.utterance_id)
        if triple in seen:
            raise ManifestError(f"duplicate record {triple}")
        seen.add(triple)
        if not check_clips:
            continue
        if not os.path.exists(record.path):
            raise ManifestError(f"{record.utterance_id}: clip file {record.path} is missing")
        try:
            clip = load_clip(record.path)
        except ClipFormatError as e:
            raise ManifestError(f"{record.utterance_id}: {e}") from e
        if clip.num_frames != record.frame_count:
            raise ManifestError(
                f"{record.utterance_id}: manifest says {record.frame_count} frames, clip has {clip.num_frames}"
            )
    return len(seen)
