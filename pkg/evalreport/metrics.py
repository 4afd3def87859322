"""
FAR / FRR bookkeeping and EER calibration

A pair is accepted iff score >= threshold.
    FRR = FN / (TP + FN)        FAR = FP / (TN + FP)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import pandas as pd

from hnmloss import PAIR_TYPE_NAMES, POSITIVE
from utils.errors import UndefinedMetricError

logger = logging.getLogger(__name__)

SWEEP_POINTS = 512


@dataclass
class MetricReport:
    threshold: float
    far: float
    frr: float
    tp: int
    fp: int
    tn: int
    fn: int
    type_errors: Dict[int, float] = field(default_factory=dict)

    @property
    def positives(self):
        return self.tp + self.fn

    @property
    def negatives(self):
        return self.tn + self.fp


def _split_scores(scored):
    scores = scored['score'].to_numpy(dtype=np.float64)
    labels = scored['label'].to_numpy().astype(bool)
    return scores[labels], scores[~labels]


def compute_far_frr(scored, threshold):
    """MetricReport at one threshold; `scored` needs score, label and pair_type columns"""
    positive, negative = _split_scores(scored)
    if positive.size == 0 or negative.size == 0:
        raise UndefinedMetricError(
            f"FAR/FRR need both classes, got {positive.size} positive and {negative.size} negative pairs"
        )
    tp = int(np.sum(positive >= threshold))
    fn = int(positive.size - tp)
    fp = int(np.sum(negative >= threshold))
    tn = int(negative.size - fp)

    type_errors = {}
    if 'pair_type' in scored:
        accepted = scored['score'].to_numpy() >= threshold
        for pair_type in PAIR_TYPE_NAMES:
            mask = scored['pair_type'].to_numpy() == pair_type
            if mask.any():
                wrong = ~accepted[mask] if pair_type == POSITIVE else accepted[mask]
                type_errors[pair_type] = float(wrong.mean())
    return MetricReport(float(threshold), fp / (tn + fp), fn / (tp + fn), tp, fp, tn, fn, type_errors)


def find_eer_threshold(positive_scores, negative_scores):
    """
    Sweep every distinct score plus -inf/+inf; return (threshold, EER) at the
    smallest |FAR - FRR|, lowest threshold on ties, EER = (FAR + FRR) / 2.
    """
    positive = np.sort(np.asarray(positive_scores, dtype=np.float64))
    negative = np.sort(np.asarray(negative_scores, dtype=np.float64))
    if positive.size == 0 or negative.size == 0:
        raise UndefinedMetricError("EER needs at least one positive and one negative score")

    candidates = np.concatenate([[-np.inf], np.unique(np.concatenate([positive, negative])), [np.inf]])
    frr = np.searchsorted(positive, candidates, side='left') / positive.size
    far = (negative.size - np.searchsorted(negative, candidates, side='left')) / negative.size
    best = int(np.argmin(np.abs(far - frr)))
    return float(candidates[best]), float((far[best] + frr[best]) / 2)


def eer_of(scored):
    positive, negative = _split_scores(scored)
    return find_eer_threshold(positive, negative)


def sweep_thresholds(points=SWEEP_POINTS, low=-1.0, high=1.0):
    return np.linspace(low, high, points)


def far_frr_curve(scored, thresholds=None):
    """DataFrame of threshold, far, frr"""
    thresholds = sweep_thresholds() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    positive, negative = _split_scores(scored)
    if positive.size == 0 or negative.size == 0:
        raise UndefinedMetricError("FAR/FRR curve needs both positive and negative pairs")
    positive.sort()
    negative.sort()
    frr = np.searchsorted(positive, thresholds, side='left') / positive.size
    far = (negative.size - np.searchsorted(negative, thresholds, side='left')) / negative.size
    return pd.DataFrame({'threshold': thresholds, 'far': far, 'frr': frr})


def type_breakdown(scored, thresholds=None):
    """
    Fraction of misclassified pairs within each pair type per threshold.
    Types absent from `scored` get no column.
    """
    thresholds = sweep_thresholds() if thresholds is None else np.asarray(thresholds, dtype=np.float64)
    curves = {'threshold': thresholds}
    for pair_type, description in PAIR_TYPE_NAMES.items():
        scores = np.sort(scored.loc[scored['pair_type'] == pair_type, 'score'].to_numpy(dtype=np.float64))
        if scores.size == 0:
            logger.info(f"No type-{pair_type} pairs ({description}); curve omitted")
            continue
        below = np.searchsorted(scores, thresholds, side='left')
        errors = below if pair_type == POSITIVE else scores.size - below
        curves[f"type_{pair_type}"] = errors / scores.size
    return pd.DataFrame(curves)
