"""Bag-level video encoding over the emotion dictionary.

Each frame votes its cosine similarity into its K nearest dictionary bins
(uniform kernel: every selected bin receives the full cosine, so one frame
can contribute equally to several emotions). The video vector is the plain
sum of the per-frame score vectors; no normalization is applied unless
explicitly requested.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import read_feature_file, write_feature_file
from .dictionary import EmotionDictionary
from .errors import DimensionMismatchError, ValidationError
from .linalg import as_matrix, cosine_matrix, top_k_rows


def default_frame_knn(n_clusters: int) -> int:
    """Default K: 10% of the dictionary bins, at least 1."""
    return max(1, math.ceil(0.10 * n_clusters))


@dataclass(frozen=True)
class EncodedVideo:
    """Bag-level vector of one video: one component per dictionary bin."""

    s: np.ndarray
    K_used: int
    source_video_id: str = ""


@dataclass(frozen=True)
class FrameScoreVector:
    """Per-frame similarity scores, nonzero only at the frame's K nearest bins."""

    h: np.ndarray
    frame_index: int


def _frame_bin_scores(features, dictionary: EmotionDictionary, K: int):
    """(sims, topk) where topk holds each frame's K nearest bin indices."""
    x = as_matrix(features)
    if x.shape[1] != dictionary.dim:
        raise DimensionMismatchError(f"frames have dim {x.shape[1]}, dictionary {dictionary.dim}")
    if not 1 <= K <= dictionary.n_clusters:
        raise ValidationError(f"K={K} out of range [1, {dictionary.n_clusters}]")
    sims = cosine_matrix(x, dictionary.centers)
    return sims, top_k_rows(sims, K)


def _apply_flags(s: np.ndarray, clamp_negative: bool, l1_normalize: bool) -> np.ndarray:
    if clamp_negative:
        s = np.clip(s, 0.0, None)
    if l1_normalize:
        total = np.abs(s).sum()
        if total > 0:
            s = s / total
    return s


def encode_video(
    features,
    dictionary: EmotionDictionary,
    K: int,
    video_id: str = "",
    clamp_negative: bool = False,
    l1_normalize: bool = False,
) -> EncodedVideo:
    """Accumulate per-frame nearest-bin cosines into the bag vector.

    Frames are summed in ascending index order so the reduction is
    bit-stable. `clamp_negative` zeroes negative cosines (needed when
    general features must feed the chi-square kernel); `l1_normalize`
    divides by the L1 mass to remove bag-size effects. Both default off to
    keep the raw sum semantics.
    """
    sims, topk = _frame_bin_scores(features, dictionary, K)
    s = np.zeros(dictionary.n_clusters)
    np.add.at(s, topk.ravel(), np.take_along_axis(sims, topk, axis=1).ravel())
    s = _apply_flags(s, clamp_negative, l1_normalize)
    return EncodedVideo(s=s, K_used=K, source_video_id=video_id)


def frame_scores(features, dictionary: EmotionDictionary, K: int) -> list[FrameScoreVector]:
    """Per-frame score vectors; their componentwise sum equals encode_video().s."""
    sims, topk = _frame_bin_scores(features, dictionary, K)
    out = []
    for j in range(sims.shape[0]):
        h = np.zeros(dictionary.n_clusters)
        h[topk[j]] = sims[j, topk[j]]
        out.append(FrameScoreVector(h=h, frame_index=j))
    return out


def clip_scores(features, dictionary: EmotionDictionary, K: int, clips) -> list[np.ndarray]:
    """Score vector per clip: the sum of its frames' score vectors."""
    x = as_matrix(features)
    per_frame = frame_scores(x, dictionary, K)
    out = []
    for start, end in clips:
        if not (0 <= start < end <= x.shape[0]):
            raise ValidationError(f"clip [{start}, {end}) out of bounds for {x.shape[0]} frames")
        h = np.zeros(dictionary.n_clusters)
        for j in range(start, end):
            h += per_frame[j].h
        out.append(h)
    return out


def encode_avgp(features) -> np.ndarray:
    """Average-pooling baseline: the mean frame feature vector."""
    x = as_matrix(features)
    if x.shape[0] < 1:
        raise ValidationError("cannot average an empty frame bag")
    return x.mean(axis=0)


def save_encodings(path, encodings: list[EncodedVideo], labels=None, class_set=None, extra=None) -> None:
    """Persist encodings as one VEF1 row per video plus a JSON index."""
    path = Path(path)
    if not encodings:
        raise ValidationError("no encodings to save")
    dims = {e.s.shape[0] for e in encodings}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed encoding dims: {sorted(dims)}")
    if labels is not None and len(labels) != len(encodings):
        raise ValidationError(f"{len(labels)} labels for {len(encodings)} encodings")
    matrix = np.stack([e.s for e in encodings])
    vef_path = path.with_suffix(".vef")
    write_feature_file(vef_path, matrix)
    index = {
        "schema_version": 1,
        "kind": "encoding_archive",
        "vef": vef_path.name,
        "dim": int(matrix.shape[1]),
        "K_used": encodings[0].K_used,
        "video_ids": [e.source_video_id for e in encodings],
    }
    if labels is not None:
        index["labels"] = list(labels)
    if class_set is not None:
        index["class_set"] = list(class_set)
    if extra:
        index.update(extra)
    path.write_text(json.dumps(index, indent=2) + "\n", encoding="utf-8")


def load_encodings(path):
    """Load an encoding archive -> (matrix, video_ids, index dict)."""
    path = Path(path)
    index = json.loads(path.read_text(encoding="utf-8"))
    if index.get("kind") != "encoding_archive":
        raise ValidationError(f"{path}: not an encoding archive index")
    matrix = read_feature_file(path.parent / index["vef"])
    ids = index.get("video_ids", [])
    if len(ids) != matrix.shape[0]:
        raise ValidationError(f"{path}: index lists {len(ids)} ids for {matrix.shape[0]} rows")
    return matrix, ids, index
