"""
Data commands: prep, stats, synth, split
"""

import glob
import logging
import os
import re

from config.config import Config, data_root
from dataprep.alignment import read_alignment
from dataprep.frames import FRAME_SHAPE
from dataprep.manifest import validate_manifest
from dataprep.pipeline import build_manifest
from dataprep.stats import compare_subpatterns, subpattern_stats
from sampler.splits import (
    GRID_DEFAULT_SPLIT, default_synthetic_split, format_split_spec, read_split_spec, split_speakers,
)
from synthgen import SynthConfig, gen_corpus, self_test, signal_separation
from utils.errors import LipAuthError, ManifestError
from .registry import CommandGroup, arg, resolve_manifest

logger = logging.getLogger(__name__)

data_bp = CommandGroup('data')

_SPEAKER_DIR = re.compile(r'^s(\d+)$')


@data_bp.command('prep', help='Cut, crop and store GRID command-color-preposition clips', arguments=[
    arg('--grid-root', required=True, help='GRID directory with s<N>/ video and align/ folders'),
    arg('--landmarks', required=True, help='directory with s<N>/<utt>.lmk landmark files'),
    arg('--out', default=None, help='output directory (default: data root)'),
    arg('--units-per-frame', type=int, default=Config.UNITS_PER_FRAME),
    arg('--threshold', type=float, default=Config.CONFIDENCE_THRESHOLD, help='landmark confidence threshold'),
    arg('--workers', type=int, default=1),
])
def prep(args):
    out = args.out or data_root()
    manifest, report = build_manifest(
        args.grid_root, args.landmarks, out, units_per_frame=args.units_per_frame,
        threshold=args.threshold, shape=FRAME_SHAPE, workers=args.workers,
    )
    print(f"✅ Kept {report.kept} utterances from {len(manifest.speakers)} speakers")
    print(f"   • Discarded (low landmark confidence): {report.discarded} ({report.discard_ratio:.2%})")
    if report.skipped:
        print(f"   • Skipped: {len(report.skipped)}")
    print(f"   • Manifest: {os.path.join(out, 'manifest.tsv')}")


def _alignments_under(root):
    for path in sorted(glob.glob(os.path.join(root, '**', '*.align'), recursive=True)):
        speaker = None
        for part in reversed(os.path.relpath(path, root).split(os.sep)):
            match = _SPEAKER_DIR.match(part)
            if match:
                speaker = int(match.group(1))
                break
        if speaker is None:
            logger.warning(f"Cannot tell the speaker of {path}; skipped")
            continue
        yield speaker, read_alignment(path)


@data_bp.command('stats', help='Sub-pattern statistics of a manifest or of raw alignments', arguments=[
    arg('--manifest', default=None, help='manifest file'),
    arg('--alignments', default=None, help='directory of s<N>/.../*.align files; compares all sub-patterns'),
])
def stats(args):
    if args.alignments:
        table = compare_subpatterns(_alignments_under(args.alignments))
        print("📊 Sub-pattern comparison")
        print(table.to_string())
        return
    manifest = resolve_manifest(args.manifest)
    print("📊 Command-color-preposition statistics")
    for key, value in subpattern_stats(manifest).items():
        print(f"   • {key}: {value}")


@data_bp.command('synth', help='Render a synthetic GRID-shaped corpus', arguments=[
    arg('--speakers', type=int, default=8),
    arg('--phrases', type=int, default=8),
    arg('--utts', type=int, default=12),
    arg('--t', type=int, default=50),
    arg('--h', type=int, default=100),
    arg('--w', type=int, default=50),
    arg('--noise', type=float, default=0.05),
    arg('--jitter', type=float, default=1.5),
    arg('--seed', type=int, default=7),
    arg('--out', default=None, help='output directory (default: data root)'),
    arg('--skip-self-test', action='store_true'),
])
def synth(args):
    config = SynthConfig(
        speakers=args.speakers, phrases=args.phrases, utts=args.utts, t=args.t, h=args.h, w=args.w,
        noise=args.noise, jitter=args.jitter, seed=args.seed,
    )
    out = args.out or data_root()
    manifest = gen_corpus(config, out)
    print(f"✅ Rendered {len(manifest)} utterances to {out}")
    if args.skip_self_test:
        return
    oracle = self_test(manifest, seed=args.seed)
    separation = signal_separation(manifest)
    print(f"   • Correlation oracle accuracy: {oracle['accuracy']:.2%} on {oracle['pairs']} pairs")
    print(
        f"   • Mean squared distance: intra {separation['intra']:.4f}, "
        f"inter-speaker {separation['inter_speaker']:.4f}, inter-phrase {separation['inter_phrase']:.4f}"
    )


@data_bp.command('split', help='Write open-set train/val/test sub-manifests', arguments=[
    arg('--manifest', default=None, help='manifest file (default: <data root>/manifest.tsv)'),
    arg('--spec', default=None, help='split spec file (default: the customized GRID split, or a proportional split for synthetic corpora)'),
    arg('--out', default=None, help='output directory (default: manifest directory)'),
])
def split(args):
    manifest = resolve_manifest(args.manifest)
    if len(manifest) == 0:
        raise ManifestError("cannot split an empty manifest")
    validate_manifest(manifest, check_clips=False)
    if args.spec:
        spec = read_split_spec(args.spec)
    elif {r.source for r in manifest} == {'synthetic'}:
        spec = default_synthetic_split(manifest.speakers)
    else:
        spec = GRID_DEFAULT_SPLIT

    base = args.manifest or data_root()
    out = args.out or (base if os.path.isdir(base) else os.path.dirname(os.path.abspath(base)))
    os.makedirs(out, exist_ok=True)
    parts = split_speakers(manifest, spec)
    for name, part in parts.items():
        part.write(os.path.join(out, f"{name}.tsv"))
    try:
        with open(os.path.join(out, 'split.txt'), 'w', encoding='utf-8') as fh:
            fh.write(format_split_spec(spec))
    except OSError as e:
        raise LipAuthError(f"cannot write split spec to {out}: {e}") from e
    print(f"✅ Split written to {out}")
    for name, part in parts.items():
        print(f"   • {name}: {len(spec.as_dict()[name])} speakers, {len(part)} utterances")
