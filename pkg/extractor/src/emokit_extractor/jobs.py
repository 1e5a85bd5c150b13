"""Extraction jobs: media files in, VEF1 files plus a manifest out.

A job decodes each input, samples frames at the stride, runs the
backbone on every sampled frame and writes one VEF1 file per input
named after the file stem, then a manifest.json covering the successes.
Undecodable inputs become per-file errors and the job continues; if two
inputs produce different feature dimensions the job aborts before any
file is written. Frame inference runs with per-video process-level
parallelism; every artifact is written atomically.
"""

import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backbone import TinyConvNet
from .errors import ConfigError, DimensionDriftError, MediaDecodeError
from .media import decode_media, preprocess
from .vef import write_vef1

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA_VERSION = 1
SPLIT_NAME = "extracted"
DEVICES = ("cpu", "auto")


@dataclass(frozen=True)
class ExtractionJob:
    media_paths: tuple
    out_dir: Path
    stride: int = 5
    layer: str = "penultimate"
    device: str = "cpu"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "media_paths", tuple(Path(p) for p in self.media_paths))
        object.__setattr__(self, "out_dir", Path(self.out_dir))


@dataclass(frozen=True)
class ExtractionResult:
    out_dir: Path
    manifest_path: Path
    feature_dim: int
    records: tuple = field(default_factory=tuple)  # (video_id, filename, n_frames)
    failures: tuple = field(default_factory=tuple)  # (path, message)

    @property
    def total_rows(self) -> int:
        return sum(r[2] for r in self.records)


_PROC_BACKBONE = None


def _default_backbone() -> TinyConvNet:
    global _PROC_BACKBONE
    if _PROC_BACKBONE is None:
        _PROC_BACKBONE = TinyConvNet.load()
    return _PROC_BACKBONE


def _extract_one(path_str: str, stride: int, layer: str, backbone):
    """Compute the feature matrix for one media file. Runs in a worker."""
    if backbone is None:
        backbone = _default_backbone()
    try:
        frames, _total = decode_media(path_str, stride)
    except MediaDecodeError as exc:
        return ("err", str(exc))
    feats = np.stack([backbone.forward(preprocess(f), layer) for f in frames])
    return ("ok", feats)


def _validate(job: ExtractionJob, backbone) -> None:
    if not job.media_paths:
        raise ConfigError("job has no input media paths")
    if job.stride < 1:
        raise ConfigError(f"stride must be >= 1, got {job.stride}")
    if job.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {job.workers}")
    if job.device not in DEVICES:
        raise ConfigError(f"unknown device {job.device!r}; choose from {list(DEVICES)}")
    if job.layer not in backbone.layers:
        raise ConfigError(f"unknown layer {job.layer!r}; choose from {list(backbone.layers)}")
    stems = [p.stem for p in job.media_paths]
    dupes = sorted({s for s in stems if stems.count(s) > 1})
    if dupes:
        raise ConfigError(f"duplicate video ids from input stems: {dupes}")


def extract(job: ExtractionJob, backbone=None) -> ExtractionResult:
    """Run a job and return what was written and what failed."""
    own_backbone = backbone is None
    ref = _default_backbone() if own_backbone else backbone
    _validate(job, ref)

    worker_backbone = None if own_backbone else backbone
    args = [(str(p), job.stride, job.layer, worker_backbone) for p in job.media_paths]
    if job.workers == 1 or len(args) == 1:
        outcomes = [_extract_one(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=min(job.workers, len(args))) as pool:
            outcomes = list(pool.map(_extract_one, *zip(*args)))

    failures = []
    computed = []  # (video_id, features) in input order
    for path, (status, payload) in zip(job.media_paths, outcomes):
        if status == "err":
            failures.append((str(path), payload))
        else:
            computed.append((path.stem, payload))
    if not computed:
        details = "; ".join(msg for _, msg in failures)
        raise MediaDecodeError(f"no input could be decoded: {details}")

    dim = computed[0][1].shape[1]
    for vid, feats in computed:
        if feats.shape[1] != dim:
            raise DimensionDriftError(
                f"{vid}: feature dim {feats.shape[1]} differs from {computed[0][0]}'s {dim}; aborting job"
            )

    job.out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for vid, feats in computed:
        fname = f"{vid}.vef"
        write_vef1(job.out_dir / fname, feats)
        records.append((vid, fname, int(feats.shape[0])))

    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "split": SPLIT_NAME,
        "class_set": [],
        "feature_dim": int(dim),
        "frame_stride": int(job.stride),
        "records": [{"video_id": vid, "features": fname} for vid, fname, _ in records],
    }
    manifest_path = job.out_dir / MANIFEST_NAME
    _write_json_atomic(manifest_path, manifest)
    return ExtractionResult(
        out_dir=job.out_dir,
        manifest_path=manifest_path,
        feature_dim=int(dim),
        records=tuple(records),
        failures=tuple(failures),
    )


def _write_json_atomic(path: Path, doc) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
