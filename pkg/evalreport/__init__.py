from .analysis import confused_phrases, false_accepts, word_category_diff, word_category_errors
from .calibration import calibrate, read_threshold, resolve_threshold, write_threshold
from .export import export_report, score_histograms
from .metrics import (
    MetricReport, compute_far_frr, eer_of, far_frr_curve, find_eer_threshold, type_breakdown,
)
from .scoring import SCORE_COLUMNS, read_scores, score_batch, score_batches, score_dataset, write_scores
