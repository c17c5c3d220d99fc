"""Exception hierarchy shared by every stage."""


class ColltocError(Exception):
    """Base class for all errors raised by this package."""


class NoDocuments(ColltocError):
    pass


class DocumentReadError(ColltocError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = path


class ProviderUnavailable(ColltocError):
    pass


class ProviderProtocolError(ColltocError):
    pass


class DimensionError(ColltocError, ValueError):
    pass


class GraphTooSmall(ColltocError):
    pass


class PartitionError(ColltocError):
    pass


class OracleTooLarge(ColltocError):
    pass


class NotEnoughCommunities(ColltocError):
    def __init__(self, k, available):
        super().__init__(f"requested k={k} topics but only {available} communities were found")
        self.k = k
        self.available = available


class EmptyEvaluation(ColltocError):
    pass


class CannotSample(ColltocError):
    pass


class AnnotationError(ColltocError):
    pass


class SpecError(ColltocError, ValueError):
    pass


class ConfigError(ColltocError, ValueError):
    pass


class FormatError(ColltocError):
    def __init__(self, path, line, reason):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class StageError(ColltocError):
    """A pipeline stage failed; wraps the original error with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
