"""Exception hierarchy shared across the package.

ValidationError and its subclasses map to CLI exit code 1; plain I/O
failures (OSError) map to exit code 2.
"""

from __future__ import annotations


class FieldpadError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(FieldpadError):
    """Input data or configuration violates a documented contract."""


class ManifestError(ValidationError):
    """A manifest file or one of its records is malformed."""


class PairingError(ValidationError):
    """Face/text records cannot be joined one-to-one per document."""


class FoldError(ValidationError):
    """A cross-validation plan cannot be built or is inconsistent."""


class ScoreSetError(ValidationError):
    """A score set is empty, out of range, or missing a class."""


class ScoreFileError(ValidationError):
    """A score CSV does not follow the document_id,score,label contract."""


class CascadeError(ValidationError):
    """Score files cannot be joined for the cascade rule."""
