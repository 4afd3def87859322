"""
Enrollment store utility functions
One record per line, tab-separated:

    user_id  phrase_abbrev  checkpoint_fingerprint  timestamp  v1 ... vE

Writers hold an exclusive lock on <store>.lock; readers a shared one.
"""

import fcntl
import logging
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np
from dateutil import parser as date_parser

from config.config import store_path
from utils.errors import LipAuthError

logger = logging.getLogger(__name__)


@dataclass
class EnrollmentRecord:
    user_id: str
    phrase_abbrev: str
    fingerprint: str
    created_at: datetime
    embedding: np.ndarray

    def to_line(self):
        values = '\t'.join(repr(float(v)) for v in self.embedding)
        return f"{self.user_id}\t{self.phrase_abbrev}\t{self.fingerprint}\t{self.created_at.isoformat()}\t{values}\n"

    @classmethod
    def from_line(cls, line, path='store', number=0):
        fields = line.rstrip('\n').split('\t')
        if len(fields) < 5:
            raise LipAuthError(f"{path}:{number}: expected at least 5 tab-separated fields")
        try:
            created_at = date_parser.isoparse(fields[3])
            embedding = np.array([float(v) for v in fields[4:]], dtype=np.float32)
        except ValueError as e:
            raise LipAuthError(f"{path}:{number}: {e}") from e
        return cls(fields[0], fields[1], fields[2], created_at, embedding)


def validate_user_id(user_id):
    if not user_id or any(c in user_id for c in '\t\r\n'):
        raise LipAuthError(f"user id {user_id!r} must be non-empty and free of tabs and newlines")
    return user_id


def now():
    return datetime.now(timezone.utc)


def read_records(path):
    """user id -> EnrollmentRecord; a missing store is empty"""
    if not os.path.exists(path):
        return {}
    records = {}
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            for number, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                record = EnrollmentRecord.from_line(line, path, number)
                records[record.user_id] = record
    except OSError as e:
        raise LipAuthError(f"cannot read enrollment store {path}: {e}") from e
    return records


def _write_records(path, records):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.store-')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as fh:
            for record in records.values():
                fh.write(record.to_line())
        os.replace(tmp, path)
    except OSError as e:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise LipAuthError(f"cannot write enrollment store {path}: {e}") from e


@contextmanager
def store_lock(path, exclusive):
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        lock = open(f"{path}.lock", 'a')
    except OSError as e:
        raise LipAuthError(f"cannot open lock for enrollment store {path}: {e}") from e
    try:
        fcntl.flock(lock, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
        yield
    finally:
        fcntl.flock(lock, fcntl.LOCK_UN)
        lock.close()


@contextmanager
def store_transaction(path=None):
    """Context manager for store updates: yields the record dict, writes it back on success"""
    path = path or store_path()
    with store_lock(path, exclusive=True):
        records = read_records(path)
        try:
            yield records
        except Exception as e:
            logger.error(f"Enrollment store update aborted: {e}")
            raise
        _write_records(path, records)


def get_record(user_id, path=None):
    path = path or store_path()
    with store_lock(path, exclusive=False):
        return read_records(path).get(user_id)
