"""Job-level behavior: outputs, error handling, drift, parallelism."""

import json

import numpy as np
import pytest

from emokit_extractor import (
    ConfigError,
    DimensionDriftError,
    ExtractionJob,
    MediaDecodeError,
    extract,
)


class DriftingBackbone:
    """Returns 8-dim features for the first 3 frames, 16-dim after."""

    layers = ("penultimate",)

    def __init__(self):
        self.seen = 0

    def feature_dim(self, layer):
        return 8

    def forward(self, frame, layer):
        self.seen += 1
        return np.ones(8 if self.seen <= 3 else 16, dtype=np.float32)


def test_end_to_end(tmp_path, media_paths):
    job = ExtractionJob(media_paths=media_paths, out_dir=tmp_path / "out")
    result = extract(job)
    assert result.failures == ()
    assert result.feature_dim == 64
    assert [(vid, n) for vid, _, n in result.records] == [("clip_a", 3), ("clip_b", 2), ("still_c", 1)]
    assert result.total_rows == 6
    doc = json.loads(result.manifest_path.read_text())
    assert doc["schema_version"] == 1
    assert doc["feature_dim"] == 64
    assert doc["frame_stride"] == 5
    assert doc["class_set"] == []
    assert [r["video_id"] for r in doc["records"]] == ["clip_a", "clip_b", "still_c"]
    for r in doc["records"]:
        assert (tmp_path / "out" / r["features"]).is_file()


def test_stride_changes_row_count(tmp_path, media_paths):
    result = extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path, stride=1))
    assert [(vid, n) for vid, _, n in result.records] == [("clip_a", 12), ("clip_b", 7), ("still_c", 1)]


def test_per_file_error_continues(tmp_path, media_paths):
    broken = tmp_path / "broken.avi"
    broken.write_text("not a video")
    job = ExtractionJob(media_paths=(media_paths[0], broken, media_paths[2]), out_dir=tmp_path / "out")
    result = extract(job)
    assert [vid for vid, _, _ in result.records] == ["clip_a", "still_c"]
    assert len(result.failures) == 1
    assert result.failures[0][0] == str(broken)
    doc = json.loads(result.manifest_path.read_text())
    assert [r["video_id"] for r in doc["records"]] == ["clip_a", "still_c"]
    assert not (tmp_path / "out" / "broken.vef").exists()


def test_all_files_failing_raises(tmp_path):
    broken = tmp_path / "broken.avi"
    broken.write_text("not a video")
    with pytest.raises(MediaDecodeError):
        extract(ExtractionJob(media_paths=(broken, tmp_path / "absent.avi"), out_dir=tmp_path / "out"))
    assert not (tmp_path / "out").exists()


def test_dimension_drift_aborts_before_writing(tmp_path, media_paths):
    job = ExtractionJob(media_paths=media_paths[:2], out_dir=tmp_path / "out")
    with pytest.raises(DimensionDriftError):
        extract(job, backbone=DriftingBackbone())
    assert not (tmp_path / "out").exists()


def test_config_validation(tmp_path, media_paths):
    with pytest.raises(ConfigError):
        extract(ExtractionJob(media_paths=(), out_dir=tmp_path))
    with pytest.raises(ConfigError):
        extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path, stride=0))
    with pytest.raises(ConfigError):
        extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path, workers=0))
    with pytest.raises(ConfigError):
        extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path, layer="fc7"))
    with pytest.raises(ConfigError):
        extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path, device="tpu"))
    dupe = (media_paths[0], media_paths[0].parent.parent / "media" / "clip_a.avi")
    with pytest.raises(ConfigError):
        extract(ExtractionJob(media_paths=dupe, out_dir=tmp_path))


def test_logits_layer_allows_negatives(tmp_path, media_paths):
    result = extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path, layer="logits"))
    assert result.feature_dim == 10


def test_worker_count_does_not_change_bytes(tmp_path, media_paths):
    serial = extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path / "s", workers=1))
    parallel = extract(ExtractionJob(media_paths=media_paths, out_dir=tmp_path / "p", workers=3))
    for (_, fname, _), _ in zip(serial.records, parallel.records):
        assert (tmp_path / "s" / fname).read_bytes() == (tmp_path / "p" / fname).read_bytes()
    assert (tmp_path / "s" / "manifest.json").read_text() == (tmp_path / "p" / "manifest.json").read_text()
