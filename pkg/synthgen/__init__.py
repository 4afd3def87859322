from .corpus import gen_corpus, self_test, signal_separation
from .render import SynthConfig, phrase_for, render_utterance
