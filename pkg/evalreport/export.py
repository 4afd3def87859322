"""
Report files

    far_frr_curve.csv        threshold, far, frr
    score_histograms.csv     per score bin: count, stacked and normalized per type
    type_error_curves.csv    threshold, type_1 .. type_4 error fractions
    confused_phrases.csv     top false-accepted phrase pairs per speaker-sameness
    word_category_errors.csv false accepts by differing word categories
    summary.txt              operating point at the calibrated threshold
"""

import logging
import os

import numpy as np
import pandas as pd

from hnmloss import PAIR_TYPE_NAMES
from utils.errors import LipAuthError, UndefinedMetricError
from utils.formatting import format_percent, format_threshold
from .analysis import confused_phrases, false_accepts, word_category_errors
from .metrics import SWEEP_POINTS, compute_far_frr, eer_of, far_frr_curve, sweep_thresholds, type_breakdown

logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 40


def score_histograms(scored, bins=HISTOGRAM_BINS):
    edges = np.linspace(-1.0, 1.0, bins + 1)
    scores = np.clip(scored['score'].to_numpy(dtype=np.float64), -1.0, 1.0)
    table = {'bin_low': edges[:-1], 'bin_high': edges[1:]}
    stacked = np.zeros(bins)
    for pair_type in PAIR_TYPE_NAMES:
        mask = scored['pair_type'].to_numpy() == pair_type
        counts, _ = np.histogram(scores[mask], bins=edges)
        stacked = stacked + counts
        table[f"count_type_{pair_type}"] = counts
        table[f"stacked_type_{pair_type}"] = stacked.astype(np.int64)
        table[f"normalized_type_{pair_type}"] = counts / counts.sum() if counts.sum() else np.zeros(bins)
    return pd.DataFrame(table)


def summary_lines(scored, threshold, calibration=None):
    report = compute_far_frr(scored, threshold)
    lines = [
        f"threshold: {format_threshold(threshold)}",
        f"FAR: {format_percent(report.far)}",
        f"FRR: {format_percent(report.frr)}",
        f"pairs: {len(scored)}",
        f"positives: {report.positives}",
        f"negatives: {report.negatives}",
        f"TP: {report.tp}  FP: {report.fp}  TN: {report.tn}  FN: {report.fn}",
    ]
    for pair_type, description in PAIR_TYPE_NAMES.items():
        count = int((scored['pair_type'] == pair_type).sum())
        rate = report.type_errors.get(pair_type)
        lines.append(f"type {pair_type} ({description}): {count} pairs, error {format_percent(rate)}")
    try:
        eer_threshold, eer = eer_of(scored)
        lines.append(f"EER on this split: {format_percent(eer)} at threshold {format_threshold(eer_threshold)}")
    except UndefinedMetricError:
        lines.append("EER on this split: n/a")
    if calibration:
        lines.append(f"calibration EER: {format_percent(calibration.get('eer'))} on {calibration.get('pairs')} pairs")
    return report, lines


def export_report(scored, threshold, out_dir, calibration=None, points=SWEEP_POINTS):
    """Write every report file; returns the MetricReport at `threshold`"""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise LipAuthError(f"cannot create report directory {out_dir}: {e}") from e

    thresholds = sweep_thresholds(points)
    errors = false_accepts(scored, threshold)
    report, lines = summary_lines(scored, threshold, calibration)
    tables = {
        'far_frr_curve.csv': far_frr_curve(scored, thresholds),
        'score_histograms.csv': score_histograms(scored),
        'type_error_curves.csv': type_breakdown(scored, thresholds),
        'confused_phrases.csv': confused_phrases(errors),
        'word_category_errors.csv': word_category_errors(errors),
    }
    for name, table in tables.items():
        path = os.path.join(out_dir, name)
        try:
            table.to_csv(path, index=False, encoding='utf-8')
        except OSError as e:
            raise LipAuthError(f"cannot write {path}: {e}") from e
    summary_path = os.path.join(out_dir, 'summary.txt')
    try:
        with open(summary_path, 'w', encoding='utf-8') as fh:
            fh.write('\n'.join(lines) + '\n')
    except OSError as e:
        raise LipAuthError(f"cannot write {summary_path}: {e}") from e
    logger.info(f"Report written to {out_dir}: FAR {report.far:.4f}, FRR {report.frr:.4f}")
    return report
