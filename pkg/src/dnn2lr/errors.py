"""Exception types shared across the package.

Every error raised on purpose derives from Dnn2LrError so the command-line
front end can catch one type and report a single machine-parsable line.
The ``kind`` attribute is the stable token used in that line.
"""


class Dnn2LrError(Exception):
    """Base class for errors raised by this package."""

    kind = "error"


class ConfigError(Dnn2LrError):
    """Invalid configuration value or malformed config file."""

    kind = "config"


class IngestionError(Dnn2LrError):
    """Malformed input data (bad row, bad header, unparseable number)."""

    kind = "ingest"


class LabelError(Dnn2LrError):
    """Label column missing or holding something other than 0/1."""

    kind = "label"


class EncodingError(Dnn2LrError):
    """Feature id outside the vocabulary range, or a lookup that cannot resolve."""

    kind = "encoding"


class DiscretizationError(Dnn2LrError):
    """A numerical field cannot be binned (for instance: no observed values)."""

    kind = "discretize"


class TrainingError(Dnn2LrError):
    """Training aborted: non-finite loss or an impossible setup."""

    kind = "training"


class UndefinedMetricError(Dnn2LrError):
    """Ranking metric undefined for the given labels (single class present)."""

    kind = "metric"


class StageError(Dnn2LrError):
    """A pipeline stage cannot run, usually because a prerequisite is missing."""

    kind = "pipeline"
