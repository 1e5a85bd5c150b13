"""emokit: transfer-encoded video emotion recognition, attribution,
zero-shot labeling, and summarization on top of an auxiliary image
dictionary. All numerics are numpy; file formats are VEF1 (binary
feature matrices), JSON manifests, and whitespace embedding text.
"""

from .attribution import (
    AttributionResult,
    SummarySelection,
    attribute_clips,
    attribute_frames,
    representativeness,
    select_summary_clips,
    summarize,
    summary_budget_seconds,
    summary_objective,
)
from .config import PipelineConfig, load_config
from .dataio import (
    AuxiliaryImageSet,
    DatasetManifest,
    VideoRecord,
    check_zero_shot_pair,
    load_auxiliary_images,
    load_embeddings_text,
    load_manifest,
    read_feature_file,
    read_feature_header,
    save_embeddings_text,
    save_manifest,
    write_feature_file,
)
from .dictionary import EmotionDictionary, fit_spherical_kmeans, load_dictionary, save_dictionary
from .embeddings import CorpusStream, EmbeddingSpace, lookup, normalize_label, train_skipgram
from .encoding import (
    EncodedVideo,
    FrameScoreVector,
    clip_scores,
    default_frame_knn,
    encode_avgp,
    encode_video,
    frame_scores,
    load_encodings,
    save_encodings,
)
from .errors import (
    BadMagicError,
    ClassOverlapError,
    ConfigError,
    DimensionMismatchError,
    EmbeddingParseError,
    EmokitError,
    FeatureFileError,
    ManifestError,
    NonFiniteError,
    NumericalError,
    OutOfVocabularyError,
    TruncatedPayloadError,
    ValidationError,
)
from .svm import (
    BinaryMachine,
    SupervisedModel,
    classification_metrics,
    evaluate,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .zeroshot import (
    ClassPrototype,
    ZeroShotRegressor,
    dap_predict,
    default_k_t1s,
    fit_regressor,
    load_prototypes,
    load_regressor,
    project,
    save_prototypes,
    save_regressor,
    t1s_smooth,
    zsl_predict,
)

__version__ = "0.1.0"

__all__ = [
    "AttributionResult",
    "AuxiliaryImageSet",
    "BadMagicError",
    "BinaryMachine",
    "ClassOverlapError",
    "ClassPrototype",
    "ConfigError",
    "CorpusStream",
    "DatasetManifest",
    "DimensionMismatchError",
    "EmbeddingParseError",
    "EmbeddingSpace",
    "EmokitError",
    "EmotionDictionary",
    "EncodedVideo",
    "FeatureFileError",
    "FrameScoreVector",
    "ManifestError",
    "NonFiniteError",
    "NumericalError",
    "OutOfVocabularyError",
    "PipelineConfig",
    "SummarySelection",
    "SupervisedModel",
    "TruncatedPayloadError",
    "ValidationError",
    "VideoRecord",
    "ZeroShotRegressor",
    "attribute_clips",
    "attribute_frames",
    "check_zero_shot_pair",
    "classification_metrics",
    "clip_scores",
    "dap_predict",
    "default_frame_knn",
    "default_k_t1s",
    "encode_avgp",
    "encode_video",
    "evaluate",
    "fit_regressor",
    "fit_spherical_kmeans",
    "frame_scores",
    "load_auxiliary_images",
    "load_config",
    "load_dictionary",
    "load_embeddings_text",
    "load_encodings",
    "load_manifest",
    "load_model",
    "load_prototypes",
    "load_regressor",
    "lookup",
    "normalize_label",
    "predict",
    "predict_batch",
    "project",
    "read_feature_file",
    "read_feature_header",
    "representativeness",
    "save_embeddings_text",
    "save_encodings",
    "save_manifest",
    "save_model",
    "save_prototypes",
    "save_regressor",
    "select_summary_clips",
    "summarize",
    "summary_budget_seconds",
    "summary_objective",
    "t1s_smooth",
    "train",
    "train_skipgram",
    "write_feature_file",
    "zsl_predict",
]
