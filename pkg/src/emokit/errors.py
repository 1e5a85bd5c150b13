"""Exception types shared across the package.

Two broad families matter to callers: validation problems (bad inputs,
malformed files, inconsistent manifests) and numerical problems (non-finite
data, failed convergence). The CLI maps the former to exit code 2 and the
latter to exit code 3.
"""


class EmokitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EmokitError):
    """Input rejected before any computation or write happened."""


class DimensionMismatchError(ValidationError):
    pass


class FeatureFileError(ValidationError):
    """A feature file failed structural validation."""


class BadMagicError(FeatureFileError):
    pass


class TruncatedPayloadError(FeatureFileError):
    pass


class ManifestError(ValidationError):
    """A dataset manifest failed validation."""


class ClassOverlapError(ManifestError):
    """Train/test class sets intersect in a zero-shot pairing."""


class EmbeddingParseError(ValidationError):
    pass


class OutOfVocabularyError(ValidationError):
    """A label token is missing from the embedding vocabulary."""

    def __init__(self, token, suggestions=()):
        self.token = token
        self.suggestions = tuple(suggestions)
        hint = f" (nearest known tokens: {', '.join(self.suggestions)})" if self.suggestions else ""
        super().__init__(f"token {token!r} not in vocabulary{hint}")


class ConfigError(ValidationError):
    pass


class NumericalError(EmokitError):
    """Non-finite data or a failed numerical procedure."""


class NonFiniteError(NumericalError):
    pass
