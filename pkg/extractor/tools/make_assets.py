"""Regenerate the extractor's checked-in assets.

Creates the fixed backbone weights, the three tiny media files under
media/, and the golden VEF1 outputs under golden/ by running a default
extraction (stride 5, penultimate layer) on those media files. Run from
anywhere; paths are anchored to this file.
"""

import sys
from pathlib import Path

import cv2
import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from emokit_extractor.backbone import make_weights  # noqa: E402
from emokit_extractor.jobs import ExtractionJob, extract  # noqa: E402


def write_weights():
    out = ROOT / "src" / "emokit_extractor" / "weights"
    out.mkdir(parents=True, exist_ok=True)
    np.savez(out / "tinyconv.npz", **make_weights(seed=7))
    print(f"wrote {out / 'tinyconv.npz'}")


def _frame(rng, w, h, t, n_frames):
    """One synthetic frame: color gradient plus a square sweeping left to right."""
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.stack(
        [
            40 + 120 * xx / max(w - 1, 1),
            60 + 100 * yy / max(h - 1, 1),
            np.full((h, w), 90 + 40 * np.sin(2 * np.pi * t / max(n_frames, 1))),
        ],
        axis=-1,
    )
    side = max(4, h // 4)
    x0 = int((w - side) * t / max(n_frames - 1, 1))
    y0 = (h - side) // 2
    img[y0 : y0 + side, x0 : x0 + side] = [230, 200, 60]
    img += rng.uniform(-8, 8, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def write_media():
    out = ROOT / "media"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(19)
    for name, (w, h, n) in {"clip_a": (32, 24, 12), "clip_b": (40, 30, 7)}.items():
        path = out / f"{name}.avi"
        writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), 10.0, (w, h))
        if not writer.isOpened():
            raise RuntimeError(f"cannot open VideoWriter for {path}")
        for t in range(n):
            writer.write(_frame(rng, w, h, t, n))
        writer.release()
        print(f"wrote {path} ({n} frames, {w}x{h})")
    still = _frame(rng, 48, 32, 2, 8)
    cv2.imwrite(str(out / "still_c.png"), still)
    print(f"wrote {out / 'still_c.png'} (48x32)")


def write_golden():
    media = sorted((ROOT / "media").iterdir())
    job = ExtractionJob(media_paths=tuple(media), out_dir=ROOT / "golden")
    result = extract(job)
    for vid, fname, n in result.records:
        print(f"golden {fname}: {n} rows x {result.feature_dim}")
    if result.failures:
        raise RuntimeError(f"golden extraction had failures: {result.failures}")


if __name__ == "__main__":
    write_weights()
    write_media()
    write_golden()
