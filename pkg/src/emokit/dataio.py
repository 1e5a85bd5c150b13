"""Dataset storage: VEF1 feature files, JSON manifests, embedding text files.

File formats
------------
VEF1 (binary feature matrix, the interchange format of the whole pipeline):
    bytes 0-3   magic ``VEF1``
    bytes 4-7   u32 little-endian  n_rows
    bytes 8-11  u32 little-endian  dim
    then        n_rows * dim IEEE-754 float32, little-endian, row-major
Values are promoted to float64 on read. Round trips are lossless at float32
precision.

Manifest (JSON, one document per dataset split)::

    {
      "schema_version": 1,
      "split": "train",
      "class_set": ["anger", "joy"],
      "feature_dim": 64,
      "frame_stride": 5,              # optional, provenance only
      "records": [
        {"video_id": "v0001",
         "features": "features/v0001.vef",   # relative to the manifest
         "label": "joy",                      # optional
         "clips": [[0, 30], [30, 55]]}        # optional half-open ranges
      ]
    }

Embedding text: UTF-8, one token per line, ``token v_1 ... v_K`` separated
by single spaces.
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    ClassOverlapError,
    DimensionMismatchError,
    EmbeddingParseError,
    ManifestError,
    NonFiniteError,
    TruncatedPayloadError,
)

VEF_MAGIC = b"VEF1"
MANIFEST_SCHEMA_VERSION = 1
_HEADER = struct.Struct("<4sII")


def write_feature_file(path, matrix) -> None:
    """Write a feature matrix as a VEF1 file (float32 storage)."""
    m = np.ascontiguousarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ManifestError(f"feature matrix must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError(f"refusing to write non-finite features to {path}")
    payload = m.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(VEF_MAGIC, m.shape[0], m.shape[1]))
        fh.write(payload)


def read_feature_file(path) -> np.ndarray:
    """Read a VEF1 file into an (n_rows, dim) float64 matrix."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TruncatedPayloadError(f"{path}: file shorter than the 12-byte header")
        magic, n_rows, dim = _HEADER.unpack(header)
        if magic != VEF_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}, expected {VEF_MAGIC!r}")
        payload = fh.read()
    expected = 4 * n_rows * dim
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"{path}: header declares {n_rows}x{dim} ({expected} bytes) but payload has {len(payload)}"
        )
    if len(payload) > expected:
        raise TruncatedPayloadError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n_rows, dim)
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{path}: payload contains NaN or Inf")
    return data


def read_feature_header(path) -> tuple[int, int]:
    """(n_rows, dim) from a VEF1 header without loading the payload."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: file shorter than the 12-byte header")
    magic, n_rows, dim = _HEADER.unpack(header)
    if magic != VEF_MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {VEF_MAGIC!r}")
    return n_rows, dim


@dataclass(frozen=True)
class VideoRecord:
    """One video of a dataset: a frame-feature bag plus optional label/clips."""

    video_id: str
    features_path: Path
    n_frames: int
    label: str | None = None
    clips: tuple[tuple[int, int], ...] | None = None

    def load_features(self) -> np.ndarray:
        return read_feature_file(self.features_path)


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[VideoRecord, ...]
    split: str
    class_set: tuple[str, ...]
    feature_dim: int
    frame_stride: int | None = None
    path: Path | None = field(default=None, compare=False)

    def labels(self) -> list[str]:
        missing = [r.video_id for r in self.records if r.label is None]
        if missing:
            raise ManifestError(f"records without labels: {missing[:5]}")
        return [r.label for r in self.records]


@dataclass(frozen=True)
class AuxiliaryImageSet:
    """Feature vectors of the auxiliary emotional-image collection."""

    features: np.ndarray  # (n_images, dim)

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] < 1:
            raise ManifestError(f"auxiliary image set must be a nonempty 2-D matrix, got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise NonFiniteError("auxiliary image set contains NaN or Inf")
        object.__setattr__(self, "features", f)

    def __len__(self):
        return self.features.shape[0]


def load_auxiliary_images(path) -> AuxiliaryImageSet:
    return AuxiliaryImageSet(read_feature_file(path))


def _validate_clips(clips, n_frames, video_id):
    out = []
    prev_end = 0
    for pair in clips:
        if len(pair) != 2:
            raise ManifestError(f"{video_id}: clip ranges must be [start, end) pairs, got {pair}")
        start, end = int(pair[0]), int(pair[1])
        if not (0 <= start < end <= n_frames):
            raise ManifestError(f"{video_id}: clip [{start}, {end}) out of bounds for {n_frames} frames")
        if start < prev_end:
            raise ManifestError(f"{video_id}: clip [{start}, {end}) overlaps or is out of order")
        prev_end = end
        out.append((start, end))
    return tuple(out)


def load_manifest(path) -> DatasetManifest:
    """Load and fully validate a dataset manifest.

    Validation is total: every referenced feature file must exist and agree
    on feature_dim, every label must be in class_set, and clip ranges must
    be ordered, disjoint and in-bounds. Any violation raises; nothing is
    returned partially loaded.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: cannot read manifest: {exc}") from exc

    for key in ("split", "class_set", "feature_dim", "records"):
        if key not in doc:
            raise ManifestError(f"{path}: missing required key {key!r}")
    if doc.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise ManifestError(
            f"{path}: schema_version {doc.get('schema_version')!r} unsupported (expected {MANIFEST_SCHEMA_VERSION})"
        )
    class_set = tuple(doc["class_set"])
    if len(set(class_set)) != len(class_set):
        raise ManifestError(f"{path}: duplicate classes in class_set")
    feature_dim = int(doc["feature_dim"])
    base = path.parent
    records = []
    seen_ids = set()
    for entry in doc["records"]:
        vid = entry.get("video_id")
        if not vid:
            raise ManifestError(f"{path}: record without video_id")
        if vid in seen_ids:
            raise ManifestError(f"{path}: duplicate video_id {vid!r}")
        seen_ids.add(vid)
        fpath = base / entry["features"]
        if not fpath.exists():
            raise ManifestError(f"{path}: feature file {fpath} for {vid} does not exist")
        n_frames, dim = read_feature_header(fpath)
        if dim != feature_dim:
            raise DimensionMismatchError(f"{path}: {vid} has dim {dim}, manifest declares {feature_dim}")
        if n_frames < 1:
            raise ManifestError(f"{path}: {vid} has no frames")
        label = entry.get("label")
        if label is not None and label not in class_set:
            raise ManifestError(f"{path}: {vid} labelled {label!r}, not in class_set")
        clips = entry.get("clips")
        if clips is not None:
            clips = _validate_clips(clips, n_frames, vid)
        records.append(VideoRecord(vid, fpath, n_frames, label, clips))
    stride = doc.get("frame_stride")
    return DatasetManifest(
        records=tuple(records),
        split=str(doc["split"]),
        class_set=class_set,
        feature_dim=feature_dim,
        frame_stride=None if stride is None else int(stride),
        path=path,
    )


def save_manifest(path, split, class_set, feature_dim, records, frame_stride=None) -> None:
    """Write a manifest document. `records` are dicts in the schema above."""
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "split": split,
        "class_set": list(class_set),
        "feature_dim": int(feature_dim),
        "records": records,
    }
    if frame_stride is not None:
        doc["frame_stride"] = int(frame_stride)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def check_zero_shot_pair(train: DatasetManifest, test: DatasetManifest) -> None:
    """Enforce the zero-shot contract: train and test class sets are disjoint."""
    overlap = sorted(set(train.class_set) & set(test.class_set))
    if overlap:
        raise ClassOverlapError(f"zero-shot class sets must be disjoint; shared: {overlap}")


def load_embeddings_text(path):
    """Load a word-embedding text file into an EmbeddingSpace."""
    from .embeddings import EmbeddingSpace

    tokens = []
    seen = set()
    rows = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split()
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim < 1:
                    raise EmbeddingParseError(f"{path}:{lineno}: no vector components")
            elif len(values) != dim:
                raise EmbeddingParseError(
                    f"{path}:{lineno}: expected {dim} components, found {len(values)}"
                )
            if token in seen:
                raise EmbeddingParseError(f"{path}:{lineno}: duplicate token {token!r}")
            seen.add(token)
            try:
                rows.append([float(v) for v in values])
            except ValueError as exc:
                raise EmbeddingParseError(f"{path}:{lineno}: {exc}") from exc
            tokens.append(token)
    if not tokens:
        raise EmbeddingParseError(f"{path}: empty embedding file")
    return EmbeddingSpace(tuple(tokens), np.array(rows, dtype=np.float64))


def save_embeddings_text(path, space) -> None:
    """Write an EmbeddingSpace in the one-token-per-line text format."""
    with open(path, "w", encoding="utf-8") as fh:
        for token, row in zip(space.tokens, space.vectors):
            fh.write(token + " " + " ".join(repr(float(v)) for v in row) + "\n")
