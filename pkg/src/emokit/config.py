"""Pipeline configuration: one dataclass, JSON-loadable, fully validated.

Hyperparameter defaults follow the reference operating point (2000
clusters, frame top-K at 10% of the dictionary, 500-dim embeddings);
desk-scale runs override them per command.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError


@dataclass
class PipelineConfig:
    # paths
    aux_features: str = ""
    manifest: str = ""
    train_manifest: str = ""
    test_manifest: str = ""
    embeddings: str = ""
    dictionary: str = ""
    model: str = ""
    encodings: str = ""
    out_dir: str = "out"
    # hyperparameters
    n_clusters: int = 2000
    frame_knn: int = 0            # 0 means ceil(0.10 * n_clusters)
    embed_dim: int = 500
    C: float = 1.0
    tol: float = 1e-3
    epsilon: float = 0.1
    ridge_lam: float = 1e-3
    trade_off: float = 0.5
    k_t1s: int = 0                # 0 means max(3, ceil(0.10 * n_test)), clamped
    kmeans_iters: int = 100
    seed: int = 0
    workers: int = 0              # 0 means EMOKIT_WORKERS or cpu count
    # mode flags
    kernel: str = "chi2"
    regressor: str = "svr"
    encoding: str = "ite"
    method: str = "t1s"
    normalize_s: bool = False
    clamp_negative: bool = False
    unnormalized_summary: bool = False
    balanced: bool = False
    clip_seconds: float = 2.0
    fps: float = 25.0

    def resolved_frame_knn(self) -> int:
        return self.frame_knn if self.frame_knn > 0 else max(1, math.ceil(0.10 * self.n_clusters))

    def resolved_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        env = os.environ.get("EMOKIT_WORKERS", "").strip()
        if env:
            try:
                return max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"EMOKIT_WORKERS={env!r} is not an integer") from exc
        return os.cpu_count() or 1

    def validate(self, required_paths=()) -> None:
        """Range-check hyperparameters and existence-check the named paths."""
        if self.n_clusters < 1:
            raise ConfigError("n_clusters must be >= 1")
        if self.frame_knn < 0 or self.frame_knn > self.n_clusters:
            raise ConfigError(f"frame_knn must be in [0, n_clusters], got {self.frame_knn}")
        if self.embed_dim < 2:
            raise ConfigError("embed_dim must be >= 2")
        if self.C <= 0 or self.tol <= 0 or self.ridge_lam <= 0:
            raise ConfigError("C, tol and ridge_lam must be positive")
        if self.epsilon < 0 or self.trade_off < 0:
            raise ConfigError("epsilon and trade_off must be nonnegative")
        if self.k_t1s < 0 or self.kmeans_iters < 1 or self.workers < 0:
            raise ConfigError("k_t1s >= 0, kmeans_iters >= 1 and workers >= 0 required")
        if self.kernel not in ("chi2", "linear"):
            raise ConfigError(f"kernel must be chi2 or linear, got {self.kernel!r}")
        if self.regressor not in ("svr", "ridge"):
            raise ConfigError(f"regressor must be svr or ridge, got {self.regressor!r}")
        if self.encoding not in ("ite", "avgp"):
            raise ConfigError(f"encoding must be ite or avgp, got {self.encoding!r}")
        if self.method not in ("t1s", "dap"):
            raise ConfigError(f"method must be t1s or dap, got {self.method!r}")
        if self.clip_seconds <= 0 or self.fps <= 0:
            raise ConfigError("clip_seconds and fps must be positive")
        for name in required_paths:
            value = getattr(self, name)
            if not value:
                raise ConfigError(f"config field {name!r} is required for this command")
            if not Path(value).exists():
                raise ConfigError(f"{name}: path {value!r} does not exist")

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> PipelineConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw, source=str(path))


def config_from_dict(raw: dict, source: str = "<dict>") -> PipelineConfig:
    known = {f.name: f.type for f in fields(PipelineConfig)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"{source}: unknown config fields {unknown}")
    return PipelineConfig(**raw)
