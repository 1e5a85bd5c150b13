"""Media adapter for the pipeline: real videos and images in, VEF1 feature
files plus a manifest out. Shares only file formats with the pipeline
package, never code."""

from .backbone import TinyConvNet
from .errors import (
    ConfigError,
    DimensionDriftError,
    ExtractorError,
    MediaDecodeError,
    NumericalError,
    ValidationError,
)
from .jobs import ExtractionJob, ExtractionResult, extract
from .media import decode_media, preprocess, sampled_count
from .vef import write_vef1

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionDriftError",
    "ExtractionJob",
    "ExtractionResult",
    "ExtractorError",
    "MediaDecodeError",
    "NumericalError",
    "TinyConvNet",
    "ValidationError",
    "decode_media",
    "extract",
    "preprocess",
    "sampled_count",
    "write_vef1",
]
