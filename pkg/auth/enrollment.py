#!/usr/bin/env python3
"""
One-shot enrollment and verification for lipauth
A user enrolls with a single clip of their authentication phrase; an attempt is
accepted iff its cosine similarity with the stored embedding reaches the
threshold.
"""

import logging

import numpy as np

from config.config import store_path
from dataprep.clipio import load_clip
from dataprep.vocabulary import PhraseId
from ndcompute import as_tensor
from sampler.augment import fix_length
from siamese.checkpoint import fingerprint, load_checkpoint
from siamese.model import cosine_score, embed
from utils.errors import (
    EnrollmentConflictError, InvalidShapeError, NotEnrolledError, StaleEnrollmentError,
)
from .store import EnrollmentRecord, get_record, now, store_transaction, validate_user_id

logger = logging.getLogger(__name__)

UNKNOWN_PHRASE = '-'


class LipAuthenticator:
    """Embedding-based authentication against one checkpoint"""

    def __init__(self, checkpoint_path, store=None):
        self.checkpoint_path = checkpoint_path
        self.store = store or store_path()
        self.params, _ = load_checkpoint(checkpoint_path)
        self.fingerprint = fingerprint(checkpoint_path)

    def embed_clip(self, clip_path):
        """Unit embedding of one clip after length normalization"""
        arch = self.params.arch
        frames = load_clip(clip_path).frames
        if frames.shape[1:] != (arch.h, arch.w):
            raise InvalidShapeError(
                f"{clip_path}: frames are {frames.shape[1:]}, checkpoint expects {(arch.h, arch.w)}"
            )
        clip = as_tensor(fix_length(frames, arch.t))
        z, _ = embed(clip[None, None], self.params)
        return z[0]

    def enroll(self, user_id, clip_path, phrase=None, overwrite=False):
        validate_user_id(user_id)
        if phrase is not None:
            PhraseId.from_abbrev(phrase)
        embedding = self.embed_clip(clip_path)
        record = EnrollmentRecord(user_id, phrase or UNKNOWN_PHRASE, self.fingerprint, now(), embedding)
        with store_transaction(self.store) as records:
            if user_id in records and not overwrite:
                raise EnrollmentConflictError(f"user '{user_id}' is already enrolled; pass overwrite to replace")
            records[user_id] = record
        logger.info(f"Enrolled {user_id} ({record.phrase_abbrev}) with checkpoint {self.fingerprint[:12]}")
        return record

    def verify(self, user_id, clip_path, threshold):
        record = get_record(user_id, self.store)
        if record is None:
            raise NotEnrolledError(f"user '{user_id}' is not enrolled")
        if record.fingerprint != self.fingerprint:
            raise StaleEnrollmentError(
                f"user '{user_id}' was enrolled with checkpoint {record.fingerprint[:12]}, "
                f"not {self.fingerprint[:12]}; re-enroll"
            )
        attempt = self.embed_clip(clip_path)
        pair = attempt[None].astype(np.float64), record.embedding[None].astype(np.float64)
        score = float(cosine_score(*pair)[0])
        accept = score >= threshold
        logger.info(f"Verify {user_id}: score {score:.4f} vs threshold {threshold:.4f} -> {'accept' if accept else 'reject'}")
        return {'score': score, 'accept': bool(accept)}


def enroll(user_id, clip_path, checkpoint_path, store=None, phrase=None, overwrite=False):
    return LipAuthenticator(checkpoint_path, store).enroll(user_id, clip_path, phrase, overwrite)


def verify(user_id, clip_path, checkpoint_path, threshold, store=None):
    return LipAuthenticator(checkpoint_path, store).verify(user_id, clip_path, threshold)
