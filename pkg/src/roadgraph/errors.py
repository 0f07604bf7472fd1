"""Exception hierarchy shared by all roadgraph modules.

Every library error derives from :class:`RoadGraphError`.  The two mixin
bases classify errors for the CLI exit-code mapping: configuration
problems exit with code 2, data problems with code 3, anything else that
escapes (internal invariant violations) with code 4.
"""


class RoadGraphError(Exception):
    """Base class for all roadgraph errors."""


class ConfigIssue(RoadGraphError):
    """Problems caused by bad configuration (CLI exit code 2)."""


class DataIssue(RoadGraphError):
    """Problems caused by bad or missing input data (CLI exit code 3)."""


# -- dataset ingestion / splitting -------------------------------------------

class NotFound(DataIssue):
    """A required file or directory does not exist."""


class ParseError(DataIssue):
    """A data file could not be parsed; message carries clip id and line."""


class SchemaError(DataIssue):
    """A file is structurally valid but violates the declared schema."""


class LabelMissing(DataIssue):
    """An operation requiring labels met an unlabeled clip."""


class InvalidFoldCount(ConfigIssue):
    """Fold count is out of range for the dataset."""


class DegenerateClasses(DataIssue):
    """An operation requiring both classes met a single-class dataset."""


# -- BEV projection -----------------------------------------------------------

class DegenerateCalibration(ConfigIssue):
    """Calibration points do not determine a homography."""


class OutOfCalibratedRegion(RoadGraphError):
    """A point lies outside the calibrated road region."""


# -- graph extraction ---------------------------------------------------------

class UnknownActorClass(DataIssue):
    """A source class label matches no configured alias list."""


# -- autodiff engine ----------------------------------------------------------

class ShapeError(RoadGraphError):
    """Tensor operands have incompatible shapes."""


class RankError(RoadGraphError):
    """An operation required a scalar (rank-0) tensor."""


class MissingGradient(RoadGraphError):
    """Optimizer stepped before any backward pass populated gradients."""


class RelationIndexError(RoadGraphError):
    """An edge refers to a relation id outside the configured range."""


class DegenerateProjection(RoadGraphError):
    """A pooling projection vector is identically zero."""


class LabelError(DataIssue):
    """A target label is outside the supported binary set."""


# -- tasks --------------------------------------------------------------------

class EmptyClip(DataIssue):
    """A model was asked to embed a clip with no frames."""


class EmptyDataset(DataIssue):
    """An evaluation was requested on an empty dataset."""


class UndefinedAUC(DataIssue):
    """AUC is undefined because only one class is present."""


class VocabularyMismatch(DataIssue):
    """Two datasets disagree on actor or relation vocabularies."""


class ConfigError(ConfigIssue):
    """A configuration file or flag combination is invalid."""
