"""Shared fixtures: a tiny rendered corpus and the testing profile"""

import numpy as np
import pytest

from config.config import get_config
from siamese.model import ArchSpec, init_params
from synthgen import SynthConfig, gen_corpus

TINY_CORPUS = SynthConfig(speakers=4, phrases=4, utts=3, t=4, h=16, w=16, noise=0.02, seed=3)


@pytest.fixture(scope='session')
def tiny_corpus(tmp_path_factory):
    """(manifest, directory) of 4 speakers x 4 phrases x 3 utterances of 4 x 16 x 16 frames"""
    out = tmp_path_factory.mktemp('corpus')
    manifest = gen_corpus(TINY_CORPUS, str(out))
    return manifest, out


@pytest.fixture
def testing_config():
    return get_config('testing')


@pytest.fixture
def testing_params(testing_config):
    return init_params(ArchSpec.from_config(testing_config), seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
