"""Fixed-weight convolutional backbone.

A small conv net with weights shipped in the package as data
(weights/tinyconv.npz), so inference settings are fixed and extraction
is bit-reproducible. Pretrained classification weights are deliberately
not fetched at runtime; any backbone works for the pipeline because the
file format carries its own dimension. The net mirrors the usual
classifier shape in miniature: two conv+pool stages, a fully connected
layer whose post-ReLU activations are the "penultimate" features
(nonnegative, as the chi-square path downstream requires), and a linear
"logits" head.

Input contract: one frame as (32, 32, 3) float32 in [-0.5, 0.5]
(see media.preprocess). Layer names: "penultimate" (64-d), "logits" (10-d).
"""

from importlib import resources

import numpy as np

from .errors import ConfigError

INPUT_SIZE = 32
LAYERS = ("penultimate", "logits")
_WEIGHTS_FILE = "tinyconv.npz"


def _conv2d(x, w, b):
    # x (H, W, Cin), w (k, k, Cin, Cout); zero padding keeps H, W.
    k = w.shape[0]
    pad = k // 2
    xp = np.pad(x, ((pad, pad), (pad, pad), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (k, k), axis=(0, 1))
    return np.einsum("hwcij,ijco->hwo", win, w) + b


def _maxpool2(x):
    h, w, c = x.shape
    return x.reshape(h // 2, 2, w // 2, 2, c).max(axis=(1, 3))


class TinyConvNet:
    """Two conv stages, global average pool, fc + ReLU, linear head."""

    layers = LAYERS

    def __init__(self, weights: dict):
        expected = ("conv1_w", "conv1_b", "conv2_w", "conv2_b", "fc_w", "fc_b", "head_w", "head_b")
        missing = [k for k in expected if k not in weights]
        if missing:
            raise ConfigError(f"backbone weights missing arrays: {missing}")
        self.w = {k: np.asarray(weights[k], dtype=np.float32) for k in expected}

    @classmethod
    def load(cls) -> "TinyConvNet":
        ref = resources.files(__package__) / "weights" / _WEIGHTS_FILE
        with resources.as_file(ref) as path:
            with np.load(path) as npz:
                return cls({k: npz[k] for k in npz.files})

    def feature_dim(self, layer: str) -> int:
        if layer == "penultimate":
            return self.w["fc_w"].shape[1]
        if layer == "logits":
            return self.w["head_w"].shape[1]
        raise ConfigError(f"unknown layer {layer!r}; choose from {list(self.layers)}")

    def forward(self, frame: np.ndarray, layer: str) -> np.ndarray:
        if layer not in self.layers:
            raise ConfigError(f"unknown layer {layer!r}; choose from {list(self.layers)}")
        x = np.asarray(frame, dtype=np.float32)
        if x.shape != (INPUT_SIZE, INPUT_SIZE, 3):
            raise ConfigError(f"backbone expects ({INPUT_SIZE}, {INPUT_SIZE}, 3) input, got {x.shape}")
        x = np.maximum(_conv2d(x, self.w["conv1_w"], self.w["conv1_b"]), 0.0)
        x = _maxpool2(x)
        x = np.maximum(_conv2d(x, self.w["conv2_w"], self.w["conv2_b"]), 0.0)
        x = _maxpool2(x)
        pooled = x.mean(axis=(0, 1))
        fc = np.maximum(pooled @ self.w["fc_w"] + self.w["fc_b"], 0.0)
        if layer == "penultimate":
            return fc.astype(np.float32)
        return (fc @ self.w["head_w"] + self.w["head_b"]).astype(np.float32)


def make_weights(seed: int = 7) -> dict:
    """Generate the fixed weight set (used once by tools/make_assets.py)."""
    rng = np.random.default_rng(seed)

    def he(shape, fan_in):
        return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(np.float32)

    return {
        "conv1_w": he((3, 3, 3, 8), 3 * 9),
        "conv1_b": np.full(8, 0.01, dtype=np.float32),
        "conv2_w": he((3, 3, 8, 16), 8 * 9),
        "conv2_b": np.full(16, 0.01, dtype=np.float32),
        "fc_w": he((16, 64), 16),
        "fc_b": np.full(64, 0.01, dtype=np.float32),
        "head_w": he((64, 10), 64),
        "head_b": np.zeros(10, dtype=np.float32),
    }
