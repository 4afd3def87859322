"""
Train-set EER calibration

The deployment threshold is the EER threshold measured on scored pairs from
the training speakers. Threshold files hold `key=value` lines:
threshold, eer, pairs.
"""

import logging

from utils.errors import ConfigError, LipAuthError
from utils.formatting import format_threshold
from .metrics import eer_of
from .scoring import score_dataset

logger = logging.getLogger(__name__)


def calibrate(params, manifest, count, batch_size, seed=0, loader=None, workers=1):
    scored = score_dataset(params, manifest, count, batch_size, seed=seed, loader=loader, workers=workers)
    threshold, eer = eer_of(scored)
    logger.info(f"Calibrated threshold {threshold:.4f} at EER {eer:.4%} over {len(scored)} scored pairs")
    return {'threshold': threshold, 'eer': eer, 'pairs': len(scored)}


def write_threshold(path, calibration):
    try:
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(f"threshold={format_threshold(calibration['threshold'])}\n")
            fh.write(f"eer={format_threshold(calibration['eer'])}\n")
            fh.write(f"pairs={int(calibration['pairs'])}\n")
    except OSError as e:
        raise LipAuthError(f"cannot write threshold file {path}: {e}") from e


def read_threshold(path):
    """Returns {'threshold', 'eer', 'pairs'}; only threshold is required"""
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            lines = fh.readlines()
    except OSError as e:
        raise LipAuthError(f"cannot read threshold file {path}: {e}") from e
    values = {}
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise ConfigError(f"{path}:{number}: expected key=value")
        try:
            values[key.strip()] = int(value) if key.strip() == 'pairs' else float(value)
        except ValueError as e:
            raise ConfigError(f"{path}:{number}: bad number '{value.strip()}'") from e
    if 'threshold' not in values:
        raise ConfigError(f"{path}: no threshold entry")
    return values


def resolve_threshold(value):
    """A literal number or the path of a threshold file"""
    try:
        return float(value), None
    except (TypeError, ValueError):
        calibration = read_threshold(value)
        return calibration['threshold'], calibration
