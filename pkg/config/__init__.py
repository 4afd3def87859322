"""Environment settings and training profiles"""
from .config import Config, TrainConfig, get_config, load_train_config
