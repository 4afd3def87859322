"""
Configuration file for lipauth
Centralized configuration management
"""

import os
from dataclasses import dataclass, fields, replace

from dotenv import load_dotenv

from utils.errors import ConfigError

# Load environment variables
load_dotenv()


class Config:
    """Environment-driven settings"""

    # Data locations
    DATA_ROOT = os.getenv('LBA_DATA_ROOT', 'data')
    STORE_PATH = os.getenv('LBA_STORE', os.path.join(DATA_ROOT, 'enrollments.tsv'))

    # Logging
    LOG_LEVEL = os.getenv('LBA_LOG_LEVEL', 'INFO')
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # Default training profile
    PROFILE = os.getenv('LBA_CONFIG_PROFILE', 'full')

    # Preprocessing constants
    CONFIDENCE_THRESHOLD = 0.5
    UNITS_PER_FRAME = 1000
    MOUTH_LANDMARKS = (57, 287, 164, 18)


def data_root():
    """Current data root (re-read so tests can patch the environment)"""
    return os.getenv('LBA_DATA_ROOT', Config.DATA_ROOT)


def store_path():
    """Current enrollment store path"""
    return os.getenv('LBA_STORE', os.path.join(data_root(), 'enrollments.tsv'))


@dataclass(frozen=True)
class TrainConfig:
    """Training and evaluation knobs"""

    epochs: int = 15
    lr: float = 1e-4
    train_batch: int = 80
    eval_batch: int = 40
    dropout: float = 0.0
    seed: int = 0
    scale: float = 1.0
    t: int = 50
    h: int = 100
    w: int = 50
    embed_dim: int = 256
    train_pairs: int = 100_000
    eval_pairs: int = 10_000
    calibration_pairs: int = 10_000
    margin: float = 0.5
    weight_max: float = 0.5
    weight_mean: float = 0.5
    augment: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.train_batch < 2 or self.eval_batch < 2:
            raise ConfigError("batch sizes must be >= 2")
        if self.dropout != 0.0:
            raise ConfigError("dropout is fixed at 0")
        if self.scale <= 0:
            raise ConfigError(f"scale must be positive, got {self.scale}")


# Configuration dictionary
config = {
    'full': TrainConfig(),
    'desk': TrainConfig(
        epochs=5, lr=1e-3, train_batch=16, eval_batch=16, scale=0.25,
        t=50, h=32, w=16, train_pairs=1600, eval_pairs=400,
        calibration_pairs=800,
    ),
    'testing': TrainConfig(
        epochs=1, lr=1e-3, train_batch=2, eval_batch=2, scale=0.125,
        t=4, h=16, w=16, embed_dim=8, train_pairs=8, eval_pairs=4,
        calibration_pairs=4, augment=False,
    ),
}
config['default'] = config['full']


def get_config(env='default'):
    """Get configuration based on profile name"""
    if env not in config:
        raise ConfigError(f"unknown profile '{env}' (known: {', '.join(sorted(config))})")
    return config[env]


def _coerce(raw, kind):
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ('1', 'true', 'yes', 'on'):
            return True
        if lowered in ('0', 'false', 'no', 'off'):
            return False
        raise ValueError(raw)
    return kind(raw.strip())


def load_train_config(path, base=None):
    """Overlay `key=value` lines from a file onto a profile"""
    base = base or get_config()
    kinds = {f.name: type(getattr(base, f.name)) for f in fields(base)}
    updates = {}
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f"{path}:{number}: expected key=value")
        key, value = (part.strip() for part in line.split('=', 1))
        if key == 'profile':
            base = get_config(value)
            kinds = {f.name: type(getattr(base, f.name)) for f in fields(base)}
            continue
        if key not in kinds:
            raise ConfigError(f"{path}:{number}: unknown key '{key}'")
        try:
            updates[key] = _coerce(value, kinds[key])
        except ValueError as e:
            raise ConfigError(f"{path}:{number}: bad value for {key}: '{value}'") from e
    return replace(base, **updates)
