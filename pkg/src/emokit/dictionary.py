"""Spherical k-means dictionary over auxiliary image features.

The dictionary is the transfer vehicle of the whole pipeline: cluster centers
learned from emotional images become the encoding bins for video frames.
Centers live on the unit sphere and the fitted objective is
``sum_i (1 - max_d cos(image_i, center_d))``, which alternate assignment /
mean-direction updates never increase.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import AuxiliaryImageSet, read_feature_file, write_feature_file
from .errors import DimensionMismatchError, ValidationError
from .linalg import as_matrix, normalize_rows

DEFAULT_N_CLUSTERS = 2000  # auxiliary-image cluster count used at production scale
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class EmotionDictionary:
    """Unit-norm cluster centers plus fitting provenance."""

    centers: np.ndarray  # (n_clusters, dim)
    seed: int | None = None
    iterations: int = 0
    objective: float = float("nan")
    objective_history: tuple = ()  # objective after seeding, then after each iteration

    def __post_init__(self):
        c = as_matrix(self.centers)
        norms = np.linalg.norm(c, axis=1)
        if c.shape[0] < 1:
            raise ValidationError("dictionary needs at least one center")
        if np.any(np.abs(norms - 1.0) > _NORM_TOL):
            raise ValidationError("dictionary centers must be unit-norm")
        object.__setattr__(self, "centers", c)

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


def _validate_inputs(images, n_clusters: int) -> np.ndarray:
    if not isinstance(images, AuxiliaryImageSet):
        images = AuxiliaryImageSet(as_matrix(images))
    feats = images.features
    if n_clusters < 1:
        raise ValidationError(f"n_clusters must be >= 1, got {n_clusters}")
    if len(images) < n_clusters:
        raise ValidationError(f"need at least {n_clusters} images, got {len(images)}")
    zero_rows = np.flatnonzero(np.linalg.norm(feats, axis=1) == 0)
    if zero_rows.size:
        raise ValidationError(f"all-zero image rows at indices {zero_rows[:5].tolist()}")
    # normalizing once turns every cosine below into a plain dot product
    return normalize_rows(feats)


def _seed_centers(unit: np.ndarray, n_clusters: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++-style seeding under cosine distance.

    Next seed drawn with probability proportional to 1 - (best cosine to the
    seeds picked so far); falls back to the least-covered point if all
    weights vanish (duplicate-heavy data).
    """
    n = unit.shape[0]
    centers = np.empty((n_clusters, unit.shape[1]))
    first = int(rng.integers(n))
    centers[0] = unit[first]
    best = unit @ centers[0]
    for c in range(1, n_clusters):
        weights = np.clip(1.0 - best, 0.0, None)
        total = weights.sum()
        if total <= 0:
            pick = int(np.argmin(best))
        else:
            pick = int(rng.choice(n, p=weights / total))
        centers[c] = unit[pick]
        np.maximum(best, unit @ centers[c], out=best)
    return centers


def _assign_chunked(unit, centers, workers):
    """argmax-cosine assignment, chunked so a worker pool can share the load."""
    n = unit.shape[0]
    if workers is None or workers <= 1 or n < 2048:
        sims = unit @ centers.T
        return np.argmax(sims, axis=1), np.max(sims, axis=1)
    bounds = np.linspace(0, n, workers + 1, dtype=int)
    gamma = np.empty(n, dtype=np.int64)
    best = np.empty(n)

    def work(lo, hi):
        sims = unit[lo:hi] @ centers.T
        gamma[lo:hi] = np.argmax(sims, axis=1)
        best[lo:hi] = np.max(sims, axis=1)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda b: work(*b), zip(bounds[:-1], bounds[1:])))
    return gamma, best


def fit_spherical_kmeans(
    images: AuxiliaryImageSet,
    n_clusters: int,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-6,
    workers: int | None = None,
) -> EmotionDictionary:
    """Cluster auxiliary image features into unit-norm emotion bins.

    Stops when the objective improves by less than `tol` between iterations
    or after `max_iters`. Empty clusters are re-seeded from the currently
    worst-covered image, so the dictionary always keeps exactly
    `n_clusters` centers. Identical (inputs, n_clusters, seed) produce an
    identical dictionary.
    """
    unit = _validate_inputs(images, n_clusters)
    rng = np.random.default_rng(seed)
    centers = _seed_centers(unit, n_clusters, rng)
    prev_objective = np.inf
    gamma, best = _assign_chunked(unit, centers, workers)
    iterations = 0
    objective = float(np.sum(1.0 - best))
    history = [objective]
    for iterations in range(1, max_iters + 1):
        # mean-direction update; np.add.at keeps the reduction order fixed
        sums = np.zeros_like(centers)
        np.add.at(sums, gamma, unit)
        norms = np.linalg.norm(sums, axis=1)
        counts = np.bincount(gamma, minlength=centers.shape[0])
        # zero-sum updates keep their previous center: empty clusters are
        # re-seeded below, exact antipodal cancellation keeps the old direction
        # (replacing it could push the objective up)
        keep = norms == 0
        centers = np.divide(sums, norms[:, None], out=centers.copy(), where=~keep[:, None])
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            worst_order = np.argsort(best, kind="stable")
            for slot, image_idx in zip(empty, worst_order):
                centers[slot] = unit[image_idx]
        gamma, best = _assign_chunked(unit, centers, workers)
        prev_objective, objective = objective, float(np.sum(1.0 - best))
        history.append(objective)
        if prev_objective - objective < tol:
            break
    return EmotionDictionary(
        centers=normalize_rows(centers),
        seed=seed,
        iterations=iterations,
        objective=objective,
        objective_history=tuple(history),
    )


def _image_matrix(images) -> np.ndarray:
    return images.features if isinstance(images, AuxiliaryImageSet) else as_matrix(images)


def assign(images, dictionary: EmotionDictionary) -> np.ndarray:
    """Max-cosine center index per image, ties to the lower index."""
    feats = _image_matrix(images)
    if feats.shape[1] != dictionary.dim:
        raise DimensionMismatchError(f"images have dim {feats.shape[1]}, dictionary {dictionary.dim}")
    unit = normalize_rows(feats)
    return np.argmax(unit @ dictionary.centers.T, axis=1)


def objective_value(images, dictionary: EmotionDictionary) -> float:
    """Clustering objective sum_i (1 - max_d cos) for the given dictionary."""
    unit = normalize_rows(_image_matrix(images))
    return float(np.sum(1.0 - np.max(unit @ dictionary.centers.T, axis=1)))


def save_dictionary(path, dictionary: EmotionDictionary) -> None:
    """Persist as a VEF1 center matrix plus a JSON sidecar (same stem)."""
    path = Path(path)
    write_feature_file(path, dictionary.centers)
    sidecar = {
        "schema_version": 1,
        "n_clusters": dictionary.n_clusters,
        "dim": dictionary.dim,
        "seed": dictionary.seed,
        "iterations": dictionary.iterations,
        "objective": dictionary.objective,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_dictionary(path) -> EmotionDictionary:
    """Load a saved dictionary; centers are re-normalized in float64 to undo
    the float32 storage rounding."""
    path = Path(path)
    centers = normalize_rows(read_feature_file(path))
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    if meta.get("n_clusters") != centers.shape[0] or meta.get("dim") != centers.shape[1]:
        raise ValidationError(f"{path}: sidecar metadata disagrees with VEF1 payload shape")
    return EmotionDictionary(
        centers=centers,
        seed=meta.get("seed"),
        iterations=int(meta.get("iterations", 0)),
        objective=float(meta.get("objective", float("nan"))),
    )
