"""
Error hierarchy for lipauth
Every failure the library raises on purpose derives from LipAuthError
"""


class LipAuthError(Exception):
    """Base class for domain errors (CLI exit code 1)"""


class InvalidShapeError(LipAuthError):
    """Tensor extents do not fit the operation"""


class EmptySequenceError(LipAuthError):
    """A sequence that must hold at least one step is empty"""


class NonFiniteError(LipAuthError):
    """NaN or infinity reached a place where it must not"""


class AlignmentParseError(LipAuthError):
    """Malformed word alignment text"""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class VocabularyError(LipAuthError):
    """Word outside its GRID category vocabulary"""


class DegenerateROIError(LipAuthError):
    """Mouth rectangle has zero or negative extent"""


class ClipFormatError(LipAuthError):
    """Clip file is not a valid LBAC file"""


class ManifestError(LipAuthError):
    """Manifest file or record is invalid"""


class SplitSpecError(LipAuthError):
    """Speaker split is overlapping or names unknown speakers"""


class CapacityError(LipAuthError):
    """More positive pairs requested than the manifest can supply"""

    def __init__(self, requested, capacity):
        self.requested = requested
        self.capacity = capacity
        super().__init__(f"requested {requested} positive pairs but capacity is {capacity}")


class BatchConstraintError(LipAuthError):
    """Not enough distinct (speaker, phrase) keys to fill a batch"""


class InvariantViolationError(LipAuthError):
    """A batch broke the distinct-key invariant"""


class UndefinedMetricError(LipAuthError):
    """FAR or FRR has an empty denominator"""


class CheckpointError(LipAuthError):
    """Checkpoint cannot be read or does not fit the architecture"""


class ConfigError(LipAuthError):
    """Unknown key or unparsable value in a configuration file"""


class EnrollmentConflictError(LipAuthError):
    """User already enrolled and overwrite was not requested"""


class NotEnrolledError(LipAuthError):
    """No enrollment record for the user"""


class StaleEnrollmentError(LipAuthError):
    """Enrollment was made with a different model checkpoint"""
