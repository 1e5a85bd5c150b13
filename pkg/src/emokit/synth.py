"""Synthetic datasets with planted structure for tests and demos.

The generators mimic the transfer setting: an auxiliary image set holds
clean emotional patterns, while videos mix a small fraction of emotional
frames into heavy, intensity-jittered background sprinkled with weak
distractor content from other classes. Frame-level cosine voting stays
scale-invariant and ignores the distractors (they have near-zero cosine
against the heavy background), while average pooling dilutes the sparse
true signal until the accumulated distractors drown it.

Recognition data plants per-class patterns on disjoint coordinate
blocks (nonnegative vectors on shared support would all look alike in
cosine). Zero-shot data composes classes out of shared attribute
blocks: train classes use attribute pairs, unseen classes use the union
of two pairs, and prototypes are linear in attribute weights, so a
linear regressor followed by cosine matching generalizes to them.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import write_feature_file
from .errors import ValidationError

EMOTION_NAMES = ("anger", "joy", "fear", "sadness", "surprise", "disgust", "trust", "anticipation")
COMPOUND_NAMES = ("awe", "love", "remorse", "optimism")


@dataclass(frozen=True)
class SynthVideo:
    video_id: str
    features: np.ndarray
    label: str
    emotional_frames: tuple


@dataclass(frozen=True)
class RecognitionDataset:
    class_names: tuple
    aux_images: np.ndarray
    train: tuple
    test: tuple
    feature_dim: int
    params: dict


@dataclass(frozen=True)
class ZeroShotDataset:
    train_classes: tuple
    test_classes: tuple
    aux_images: np.ndarray
    train: tuple
    test: tuple
    prototype_tokens: tuple
    prototype_vectors: np.ndarray
    feature_dim: int
    params: dict


def _leak(rng, shape, scale=0.02):
    return rng.uniform(0.0, 2.0 * scale, size=shape)


def _pattern_bank(rng, n_patterns, width):
    """Tight directional patterns: gamma draws, one row per pattern."""
    return rng.gamma(2.0, 1.0, size=(n_patterns, width)) + 0.05


def _jittered(rng, pattern, scale):
    return pattern * scale * rng.uniform(0.8, 1.2, size=pattern.shape)


def _emotional_count(sparsity: float, n_frames: int) -> int:
    return max(1, int(round(sparsity * n_frames)))


def generate_recognition(
    n_classes: int = 4,
    n_videos_per_class: int = 60,
    n_frames: int = 30,
    sparsity: float = 0.1,
    block_width: int = 8,
    bg_width: int = 16,
    n_patterns: int = 3,
    n_aux_per_pattern: int = 30,
    bg_magnitude: float = 6.0,
    clutter_low: float = 0.1,
    clutter_high: float = 0.35,
    seed: int = 0,
) -> RecognitionDataset:
    """Labeled videos plus the auxiliary emotional-image set.

    Each class owns one coordinate block; its videos carry the class
    pattern in a `sparsity` fraction of frames at a random per-video
    emotional magnitude. The remaining frames are background: a heavy
    shared block scaled by a per-video intensity draw, plus weak
    distractor content from other classes' patterns at a per-video
    clutter scale drawn from [clutter_low, clutter_high] with per-video
    random class weights. The auxiliary set contains only emotional
    patterns (that is the transfer premise). Frame-level cosine voting
    shrugs the clutter off: against the heavy background block it has
    near-zero cosine to every center, and its votes land on other
    classes' bins, never the video's own. Mean pooling has no such
    defence: the sparse true signal is diluted by the sparsity factor
    while the clutter accumulates over most frames, so the mean of a
    video no longer agrees with its class about which blocks are hot.
    """
    if not 2 <= n_classes <= len(EMOTION_NAMES):
        raise ValidationError(f"n_classes must be in [2, {len(EMOTION_NAMES)}]")
    if not 0.0 < sparsity <= 1.0:
        raise ValidationError("sparsity must be in (0, 1]")
    if n_videos_per_class < 2:
        raise ValidationError("need at least 2 videos per class to split train/test")
    rng = np.random.default_rng(seed)
    class_names = EMOTION_NAMES[:n_classes]
    dim = n_classes * block_width + bg_width

    banks = [_pattern_bank(rng, n_patterns, block_width) for _ in range(n_classes)]
    bg_bank = _pattern_bank(rng, 6, bg_width)

    aux_rows = []
    for c in range(n_classes):
        for p in range(n_patterns):
            for _ in range(n_aux_per_pattern):
                img = _leak(rng, dim)
                img[c * block_width:(c + 1) * block_width] += _jittered(rng, banks[c][p], 1.0)
                aux_rows.append(img)
    aux_images = np.stack(aux_rows)

    n_emo = _emotional_count(sparsity, n_frames)
    videos = []
    for c, name in enumerate(class_names):
        others = [b for b in range(n_classes) if b != c]
        for v in range(n_videos_per_class):
            frames = _leak(rng, (n_frames, dim))
            emo_idx = np.sort(rng.choice(n_frames, size=n_emo, replace=False))
            emo_scale = rng.uniform(0.3, 1.0)
            intensity = rng.uniform(0.5, 2.0)
            clutter = rng.uniform(clutter_low, clutter_high)
            weights = rng.uniform(0.05, 1.0, size=len(others))
            weights = weights / weights.sum()
            emo_set = set(int(j) for j in emo_idx)
            for j in range(n_frames):
                if j in emo_set:
                    pat = banks[c][rng.integers(n_patterns)]
                    frames[j, c * block_width:(c + 1) * block_width] += _jittered(rng, pat, emo_scale)
                else:
                    pat = bg_bank[rng.integers(bg_bank.shape[0])]
                    frames[j, n_classes * block_width:] += _jittered(rng, pat, bg_magnitude * intensity)
                    b = others[rng.choice(len(others), p=weights)]
                    dis = banks[b][rng.integers(n_patterns)]
                    frames[j, b * block_width:(b + 1) * block_width] += _jittered(rng, dis, clutter)
            videos.append(SynthVideo(f"{name}_{v:04d}", frames, name, tuple(int(j) for j in emo_idx)))

    # even per-class split: first half train, second half test
    train, test = [], []
    half = n_videos_per_class // 2
    for c in range(n_classes):
        block = videos[c * n_videos_per_class:(c + 1) * n_videos_per_class]
        train.extend(block[:half])
        test.extend(block[half:])

    params = {
        "kind": "recognition",
        "n_classes": n_classes,
        "n_videos_per_class": n_videos_per_class,
        "n_frames": n_frames,
        "sparsity": sparsity,
        "block_width": block_width,
        "bg_width": bg_width,
        "n_patterns": n_patterns,
        "n_aux_per_pattern": n_aux_per_pattern,
        "bg_magnitude": bg_magnitude,
        "clutter_low": clutter_low,
        "clutter_high": clutter_high,
        "seed": seed,
    }
    return RecognitionDataset(
        class_names=tuple(class_names),
        aux_images=aux_images,
        train=tuple(train),
        test=tuple(test),
        feature_dim=dim,
        params=params,
    )


def _allocate_counts(weights, total):
    """Largest-remainder rounding of total * weights (deterministic)."""
    weights = np.asarray(weights, dtype=np.float64)
    weights = weights / weights.sum()
    raw = weights * total
    counts = np.floor(raw).astype(np.int64)
    short = total - int(counts.sum())
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def generate_zeroshot(
    n_videos_per_class: int = 30,
    n_frames: int = 40,
    sparsity: float = 0.25,
    attr_width: int = 6,
    bg_width: int = 16,
    embed_dim: int = 16,
    n_aux_per_attr: int = 60,
    bg_magnitude: float = 6.0,
    jitter: float = 0.15,
    seed: int = 0,
) -> ZeroShotDataset:
    """Compositional zero-shot data over 8 shared attributes.

    Train classes express attribute pairs (0,1), (2,3), (4,5), (6,7);
    the two unseen classes express unions of pairs, so their prototypes
    are linear combinations of directions the regressor can learn from
    training classes. Prototypes are B @ a for a fixed random B, making
    the encoding-to-embedding map linear up to voting noise.
    """
    n_attrs = 8
    rng = np.random.default_rng(seed)
    train_classes = EMOTION_NAMES[:4]
    test_classes = COMPOUND_NAMES[:2]
    attr_of = {
        train_classes[0]: (0, 1),
        train_classes[1]: (2, 3),
        train_classes[2]: (4, 5),
        train_classes[3]: (6, 7),
        test_classes[0]: (0, 1, 2, 3),
        test_classes[1]: (4, 5, 6, 7),
    }
    dim = n_attrs * attr_width + bg_width

    attr_patterns = [_pattern_bank(rng, 2, attr_width) for _ in range(n_attrs)]
    bg_bank = _pattern_bank(rng, 6, bg_width)
    basis = rng.normal(0.0, 1.0, size=(embed_dim, n_attrs))

    aux_rows = []
    for a in range(n_attrs):
        for p in range(2):
            for _ in range(n_aux_per_attr):
                img = _leak(rng, dim)
                img[a * attr_width:(a + 1) * attr_width] += _jittered(rng, attr_patterns[a][p], 1.0)
                aux_rows.append(img)
    aux_images = np.stack(aux_rows)

    def class_weights(name):
        w = np.zeros(n_attrs)
        w[list(attr_of[name])] = 1.0
        return w / w.sum()

    tokens = list(train_classes) + list(test_classes)
    prototype_vectors = np.stack([basis @ class_weights(t) for t in tokens])

    n_emo = _emotional_count(sparsity, n_frames)

    def make_video(name, v):
        weights = class_weights(name) + rng.uniform(0.0, jitter, size=n_attrs)
        weights = np.clip(weights, 0.0, None)
        counts = _allocate_counts(weights, n_emo)
        frames = _leak(rng, (n_frames, dim))
        emo_idx = np.sort(rng.choice(n_frames, size=n_emo, replace=False))
        emo_scale = rng.uniform(0.3, 1.0)
        intensity = rng.uniform(0.5, 2.0)
        slots = list(emo_idx)
        cursor = 0
        for a in range(n_attrs):
            for _ in range(int(counts[a])):
                j = int(slots[cursor])
                cursor += 1
                pat = attr_patterns[a][rng.integers(2)]
                frames[j, a * attr_width:(a + 1) * attr_width] += _jittered(rng, pat, emo_scale)
        emo_set = set(int(j) for j in emo_idx)
        for j in range(n_frames):
            if j not in emo_set:
                pat = bg_bank[rng.integers(bg_bank.shape[0])]
                frames[j, n_attrs * attr_width:] += _jittered(rng, pat, bg_magnitude * intensity)
        return SynthVideo(f"{name}_{v:04d}", frames, name, tuple(int(j) for j in emo_idx))

    train = [make_video(name, v) for name in train_classes for v in range(n_videos_per_class)]
    test = [make_video(name, v) for name in test_classes for v in range(n_videos_per_class)]

    params = {
        "kind": "zeroshot",
        "n_videos_per_class": n_videos_per_class,
        "n_frames": n_frames,
        "sparsity": sparsity,
        "attr_width": attr_width,
        "bg_width": bg_width,
        "embed_dim": embed_dim,
        "n_aux_per_attr": n_aux_per_attr,
        "bg_magnitude": bg_magnitude,
        "jitter": jitter,
        "seed": seed,
        "attributes": {k: list(v) for k, v in attr_of.items()},
    }
    return ZeroShotDataset(
        train_classes=tuple(train_classes),
        test_classes=tuple(test_classes),
        aux_images=aux_images,
        train=tuple(train),
        test=tuple(test),
        prototype_tokens=tuple(tokens),
        prototype_vectors=prototype_vectors,
        feature_dim=dim,
        params=params,
    )


def _write_split(videos, class_names, dim, split, out_dir: Path) -> Path:
    feature_dir = out_dir / "features"
    feature_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for v in videos:
        rel = f"features/{v.video_id}.vef"
        write_feature_file(out_dir / rel, v.features)
        records.append({"video_id": v.video_id, "features": rel, "label": v.label})
    manifest = {
        "schema_version": 1,
        "split": split,
        "class_set": sorted(class_names),
        "feature_dim": dim,
        "records": records,
    }
    path = out_dir / f"manifest_{split}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_truth(ds, out_dir: Path) -> Path:
    truth = {
        "params": ds.params,
        "videos": {
            v.video_id: {"label": v.label, "emotional_frames": list(v.emotional_frames)}
            for v in tuple(ds.train) + tuple(ds.test)
        },
    }
    path = out_dir / "truth.json"
    path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_recognition(ds: RecognitionDataset, out_dir) -> dict:
    """Write aux images, both manifest splits, and the truth sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_feature_file(out_dir / "aux_images.vef", ds.aux_images)
    train = _write_split(ds.train, ds.class_names, ds.feature_dim, "train", out_dir)
    test = _write_split(ds.test, ds.class_names, ds.feature_dim, "test", out_dir)
    truth = _write_truth(ds, out_dir)
    return {
        "aux_images": str(out_dir / "aux_images.vef"),
        "manifest_train": str(train),
        "manifest_test": str(test),
        "truth": str(truth),
    }


def write_zeroshot(ds: ZeroShotDataset, out_dir) -> dict:
    """Zero-shot layout: adds the prototype embedding text file."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_feature_file(out_dir / "aux_images.vef", ds.aux_images)
    train = _write_split(ds.train, ds.train_classes, ds.feature_dim, "train", out_dir)
    test = _write_split(ds.test, ds.test_classes, ds.feature_dim, "test", out_dir)
    truth = _write_truth(ds, out_dir)
    lines = []
    for k, tok in enumerate(ds.prototype_tokens):
        lines.append(" ".join([tok] + [repr(float(x)) for x in ds.prototype_vectors[k]]))
    emb_path = out_dir / "embeddings.txt"
    emb_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {
        "aux_images": str(out_dir / "aux_images.vef"),
        "manifest_train": str(train),
        "manifest_test": str(test),
        "embeddings": str(emb_path),
        "truth": str(truth),
    }
