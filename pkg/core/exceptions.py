"""
Error hierarchy of the pipeline. Every error raised on purpose derives from
PipelineError so commands can report it and exit with a failure status.
"""


class PipelineError(Exception):
    """Base class for all expected pipeline failures."""


class ConfigError(PipelineError):
    """Invalid configuration value or unknown configuration key."""


# Audio


class MalformedRiffError(PipelineError):
    """The file is not a well-formed RIFF/WAVE container."""


class UnsupportedEncodingError(PipelineError):
    """The WAVE data uses a codec, bit depth or channel layout that is not supported."""


class EmptyAudioError(PipelineError):
    """The data chunk holds no samples."""


# Embeddings


class TooShortError(PipelineError):
    """The utterance is shorter than one analysis frame and is discarded."""

    def __init__(self, n_samples: int, frame_len: int):
        super().__init__(f"utterance has {n_samples} samples, needs at least {frame_len}")
        self.n_samples = n_samples
        self.frame_len = frame_len


class EmptyInputError(PipelineError):
    """An operation that needs at least one item received none."""


class DimMismatchError(PipelineError):
    """Vectors of different dimensions were combined."""

    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected dimension {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class BadMagicError(PipelineError):
    """A binary file does not start with the expected magic bytes."""


class TruncatedFileError(PipelineError):
    """A binary file ended before all declared records were read."""


class InvalidEmbeddingsError(PipelineError):
    """An embeddings file repeats an utterance id or holds non-finite values."""


# SVM


class SingleClassInputError(PipelineError):
    """Binary training data contains a single label."""


class DegenerateInputError(PipelineError):
    """All training points coincide, no separating function exists."""


class PairTrainingError(PipelineError):
    """A pairwise model of a one-vs-one ensemble failed to train."""

    def __init__(self, pair: tuple[str, str], cause: PipelineError):
        super().__init__(f"pair {pair[0]} vs {pair[1]}: {cause}")
        self.pair = pair
        self.cause = cause


# Classification and evaluation


class MissingClassError(PipelineError):
    """Training data lacks classes the head needs."""

    def __init__(self, missing: list):
        super().__init__(f"missing classes: {', '.join(str(m) for m in missing)}")
        self.missing = list(missing)


class TooFewSpeakersError(PipelineError):
    """A speaker-disjoint split needs at least two speakers."""


class LengthMismatchError(PipelineError):
    """Truth and prediction sequences differ in length."""


class UnknownLabelError(PipelineError):
    """A label is not part of the declared class list."""


class EmptyEvalError(PipelineError):
    """Metrics were requested over zero samples."""


# Match scores


class ZeroVectorError(PipelineError):
    """Cosine similarity is undefined for a zero vector."""


class MissingNeutralError(PipelineError):
    """The match-score experiment needs Neutral utterances for its baselines."""


class EmptyScoresError(PipelineError):
    """Box statistics were requested for an empty score list."""


# CLI


class EmptyManifestError(PipelineError):
    """The manifest has no rows."""


class ManifestError(PipelineError):
    """A manifest row is invalid or duplicated."""
