"""
Command groups for the lipauth CLI

A group collects subcommands the way a blueprint collects routes; app.py
registers every group on one argparse dispatcher.
"""

import os

from config.config import Config, data_root, get_config, load_train_config
from dataprep.manifest import Manifest
from sampler.pairs import positive_capacity
from utils.errors import ManifestError


def arg(*flags, **options):
    return flags, options


class CommandGroup:
    def __init__(self, name):
        self.name = name
        self.commands = {}

    def command(self, name, help, arguments=()):
        def decorator(handler):
            self.commands[name] = (handler, help, list(arguments))
            return handler
        return decorator

    def register(self, subparsers):
        for name, (handler, help_text, arguments) in self.commands.items():
            parser = subparsers.add_parser(name, help=help_text, description=help_text)
            for flags, options in arguments:
                parser.add_argument(*flags, **options)
            parser.set_defaults(handler=handler)


PROFILE_ARGUMENTS = [
    arg('--profile', default=None, help='training profile: full, desk or testing'),
    arg('--config', default=None, help='key=value file overriding the profile'),
]


def train_config(args):
    base = get_config(args.profile or Config.PROFILE)
    if args.config:
        return load_train_config(args.config, base)
    return base


def resolve_manifest(path, split=None):
    """A manifest file, or a directory holding <split>.tsv (manifest.tsv without a split)"""
    path = path or data_root()
    if os.path.isdir(path):
        path = os.path.join(path, f"{split}.tsv" if split else 'manifest.tsv')
    if not os.path.exists(path):
        raise ManifestError(f"manifest {path} does not exist")
    return Manifest.read(path)


def capped_count(manifest, requested, label, logger):
    capacity = positive_capacity(manifest)
    if requested > capacity:
        logger.warning(f"{label}: {requested} pairs requested, capacity is {capacity}; using {capacity}")
        return capacity
    return requested


def capped_batch(manifest, requested, label, logger):
    keys = len(manifest.groups())
    if requested > keys:
        logger.warning(f"{label}: only {keys} (speaker, phrase) keys; batches hold {keys} pairs instead of {requested}")
        return keys
    return requested
