#!/usr/bin/env python3
"""
lipauth command-line entry point

    python app.py <subcommand> [options]

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

import argparse
import logging
import sys

from dotenv import load_dotenv

from commands.access import access_bp
from commands.data import data_bp
from commands.model import model_bp
from config.config import Config
from utils.errors import LipAuthError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

COMMAND_GROUPS = (data_bp, model_bp, access_bp)


def configure_logging(level=None):
    logging.basicConfig(
        level=getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO),
        format=Config.LOG_FORMAT,
    )


def build_parser():
    parser = argparse.ArgumentParser(prog='lipauth', description='One-shot lip-based biometric authentication')
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR (default: $LBA_LOG_LEVEL)')
    subparsers = parser.add_subparsers(dest='command', metavar='<subcommand>')

    # Register command groups
    for group in COMMAND_GROUPS:
        group.register(subparsers)
    return parser


def cli_dispatch(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    if not getattr(args, 'handler', None):
        parser.print_usage(sys.stderr)
        return 2

    configure_logging(args.log_level)
    try:
        args.handler(args)
    except LipAuthError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"❌ {args.command}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(cli_dispatch())
