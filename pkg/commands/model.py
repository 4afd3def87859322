"""
Model commands: train, calibrate, eval, report
"""

import logging
import os

from evalreport import (
    calibrate as calibrate_threshold, export_report, read_scores, resolve_threshold, score_dataset,
    write_scores, write_threshold,
)
from sampler.pairs import sample_positive_pairs
from siamese.checkpoint import load_checkpoint
from siamese.model import ArchSpec
from siamese.trainer import train as train_model
from utils.formatting import format_percent
from .registry import PROFILE_ARGUMENTS, CommandGroup, arg, capped_batch, capped_count, resolve_manifest, train_config

logger = logging.getLogger(__name__)

model_bp = CommandGroup('model')


@model_bp.command('train', help='Train the siamese embedding network', arguments=[
    arg('--manifest', default=None, help='split directory with train.tsv and val.tsv (default: data root)'),
    arg('--out', required=True, help='checkpoint path; metrics.csv is written beside it'),
    *PROFILE_ARGUMENTS,
])
def train(args):
    config = train_config(args)
    train_manifest = resolve_manifest(args.manifest, 'train')
    val_manifest = resolve_manifest(args.manifest, 'val')
    train_pairs = sample_positive_pairs(
        train_manifest, capped_count(train_manifest, config.train_pairs, 'train', logger), seed=config.seed,
    )
    val_pairs = sample_positive_pairs(
        val_manifest, capped_count(val_manifest, config.eval_pairs, 'val', logger), seed=config.seed + 1,
    )
    result = train_model(train_pairs, val_pairs, config, out_path=args.out)
    last = result.epochs[-1]
    print(f"✅ Trained {config.epochs} epochs on {len(train_pairs)} positive pairs")
    print(f"   • Final train loss: {last[1]:.4f}")
    print(f"   • Final validation EER: {format_percent(last[3])}")
    print(f"   • Checkpoint: {result.checkpoint} (sha256 {result.fingerprint[:16]})")


def _load(args, config):
    params, _ = load_checkpoint(args.ckpt, ArchSpec.from_config(config) if args.profile or args.config else None)
    return params


@model_bp.command('calibrate', help='EER threshold on a (training) split', arguments=[
    arg('--ckpt', required=True),
    arg('--manifest', default=None, help='split directory or manifest file (default: data root)'),
    arg('--split', default='train'),
    arg('--out', required=True, help='threshold file to write'),
    arg('--pairs', type=int, default=None, help='positive pairs to score (default: calibration_pairs)'),
    arg('--workers', type=int, default=1),
    *PROFILE_ARGUMENTS,
])
def calibrate(args):
    config = train_config(args)
    params = _load(args, config)
    manifest = resolve_manifest(args.manifest, args.split)
    count = capped_count(manifest, args.pairs or config.calibration_pairs, 'calibrate', logger)
    batch = capped_batch(manifest, config.eval_batch, 'calibrate', logger)
    calibration = calibrate_threshold(params, manifest, count, batch, seed=config.seed, workers=args.workers)
    write_threshold(args.out, calibration)
    print(f"✅ Threshold {calibration['threshold']:.4f} at EER {format_percent(calibration['eer'])}")
    print(f"   • Scored pairs: {calibration['pairs']}")
    print(f"   • Written to {args.out}")


def _print_report(report, out_dir):
    print(f"✅ FAR {format_percent(report.far)}, FRR {format_percent(report.frr)} at threshold {report.threshold:.4f}")
    for pair_type, rate in sorted(report.type_errors.items()):
        print(f"   • type {pair_type} error: {format_percent(rate)}")
    print(f"   • Report: {out_dir}")


@model_bp.command('eval', help='Score a held-out split and write the report', arguments=[
    arg('--ckpt', required=True),
    arg('--threshold', required=True, help='threshold file from calibrate, or a number'),
    arg('--manifest', default=None, help='split directory or manifest file (default: data root)'),
    arg('--split', default='test'),
    arg('--report', required=True, help='report directory'),
    arg('--pairs', type=int, default=None, help='positive pairs to score (default: eval_pairs)'),
    arg('--workers', type=int, default=1),
    *PROFILE_ARGUMENTS,
])
def evaluate(args):
    config = train_config(args)
    params = _load(args, config)
    threshold, calibration = resolve_threshold(args.threshold)
    manifest = resolve_manifest(args.manifest, args.split)
    count = capped_count(manifest, args.pairs or config.eval_pairs, 'eval', logger)
    batch = capped_batch(manifest, config.eval_batch, 'eval', logger)
    scored = score_dataset(params, manifest, count, batch, seed=config.seed + 2, workers=args.workers)
    os.makedirs(args.report, exist_ok=True)
    write_scores(scored, os.path.join(args.report, 'scored_pairs.csv'))
    report = export_report(scored, threshold, args.report, calibration)
    _print_report(report, args.report)


@model_bp.command('report', help='Rebuild the report from scored_pairs.csv', arguments=[
    arg('--scores', required=True, help='scored_pairs.csv written by eval'),
    arg('--threshold', required=True, help='threshold file from calibrate, or a number'),
    arg('--out', required=True, help='report directory'),
])
def report(args):
    threshold, calibration = resolve_threshold(args.threshold)
    scored = read_scores(args.scores)
    metric_report = export_report(scored, threshold, args.out, calibration)
    _print_report(metric_report, args.out)
