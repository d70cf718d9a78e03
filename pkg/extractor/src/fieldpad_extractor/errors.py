"""Error types for the extractor pipeline."""


class ExtractorError(ValueError):
    """Invalid configuration or input data; maps to CLI exit code 1."""


class CoordsError(ExtractorError):
    """Malformed coordinates CSV."""


class MetaError(ExtractorError):
    """Malformed image metadata CSV."""


class BackboneError(ExtractorError):
    """Embedding backbone unavailable or produced the wrong shape."""
