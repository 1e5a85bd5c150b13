"""Exception types for the extractor.

Mirrors the pipeline CLI's convention: validation problems exit 2,
numerical problems exit 3. The extractor never imports the pipeline
package; the shared surface is the file formats, not code.
"""


class ExtractorError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ExtractorError):
    """Input rejected before or during extraction."""


class ConfigError(ValidationError):
    """Bad job parameters (stride, layer name, device, duplicate ids)."""


class MediaDecodeError(ValidationError):
    """A media file could not be decoded.

    Raised per file inside a job (caught and recorded so the job
    continues) and at job level when no input could be decoded at all.
    """


class DimensionDriftError(ValidationError):
    """Two files in one job produced different feature dimensions."""


class NumericalError(ExtractorError):
    """Non-finite values where finite ones are required."""
