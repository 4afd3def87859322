from .alignment import AlignmentEntry, extract_subphrase, parse_alignment, read_alignment
from .clipio import Clip, load_clip, save_clip
from .frames import FRAME_SHAPE, preprocess_frame
from .landmarks import LandmarkFrame, crop_mouth_roi, mouth_rectangle, read_landmark_file, write_landmark_file
from .manifest import Manifest, UtteranceRecord, validate_manifest
from .pipeline import PrepReport, build_manifest
from .stats import compare_subpatterns, subpattern_stats
from .vocabulary import ALL_PHRASES, PhraseId
