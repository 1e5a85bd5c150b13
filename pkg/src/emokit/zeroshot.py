"""Zero-shot recognition: encoding-to-embedding regression plus prototypes.

A bank of independent per-coordinate linear regressors maps video
encodings into the word-vector space. Unseen-class prototypes are then
either used raw (DAP) or smoothed once by averaging each prototype's
nearest projected test vectors (T1S). All similarity is cosine.
"""

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import read_feature_file, write_feature_file
from .errors import ValidationError
from .linalg import as_matrix, as_vector, cosine_matrix

SVR_DEFAULTS = {"C": 1.0, "epsilon": 0.1, "tol": 1e-4, "max_epochs": 1000}
RIDGE_DEFAULTS = {"lam": 1e-3}


@dataclass(frozen=True)
class ZeroShotRegressor:
    """K independent linear maps stacked as rows of a weight matrix."""

    kind: str
    weights: np.ndarray
    biases: np.ndarray
    hyperparams: dict
    fallback_coords: tuple = ()

    def __post_init__(self):
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise ValidationError("weights must be (K, D) with one bias per row")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValidationError("regressor parameters must be finite")

    @property
    def input_dim(self) -> int:
        return int(self.weights.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True)
class ClassPrototype:
    class_name: str
    raw: np.ndarray
    smoothed: np.ndarray
    k_t1s: int


def default_k_t1s(n_test: int) -> int:
    """max(3, 10% of the test set), clamped to the test-set size."""
    return min(n_test, max(3, int(np.ceil(0.10 * n_test))))


def _svr_coordinate_descent(x, t, C, epsilon, tol, max_epochs, rng):
    """Dual coordinate descent for linear epsilon-SVR.

    The bias is folded in as an always-on feature (regularized bias), so
    the dual has a box constraint only: beta in [-C, C]^n, minimizing
    0.5 b'Qb - t'b + eps*|b|_1 with Q = (X|1)(X|1)'.
    """
    n, d = x.shape
    beta = np.zeros(n)
    w = np.zeros(d)
    b = 0.0
    qii = np.einsum("ij,ij->i", x, x) + 1.0
    for _ in range(max_epochs):
        worst = 0.0
        for i in rng.permutation(n):
            g = x[i] @ w + b - t[i]
            bi = beta[i]
            if bi == 0.0:
                viol = max(0.0, abs(g) - epsilon)
            elif bi >= C:
                viol = max(0.0, g + epsilon)
            elif bi <= -C:
                viol = max(0.0, -(g - epsilon))
            elif bi > 0:
                viol = abs(g + epsilon)
            else:
                viol = abs(g - epsilon)
            worst = max(worst, viol)
            if qii[i] * bi > g + epsilon:
                new = bi - (g + epsilon) / qii[i]
            elif qii[i] * bi < g - epsilon:
                new = bi - (g - epsilon) / qii[i]
            else:
                new = 0.0
            new = min(max(new, -C), C)
            delta = new - bi
            if delta != 0.0:
                beta[i] = new
                w += delta * x[i]
                b += delta
        if worst <= tol:
            break
    return w, b


def _fit_ridge(x, t, lam):
    """Closed-form ridge with centered data and an unpenalized intercept."""
    x_mean = x.mean(axis=0)
    t_mean = t.mean()
    xc = x - x_mean
    a = xc.T @ xc + lam * np.eye(x.shape[1])
    w = np.linalg.solve(a, xc.T @ (t - t_mean))
    return w, float(t_mean - x_mean @ w)


def fit_regressor(encodings, targets, kind: str = "svr", hyperparams=None, seed: int = 0, workers=None) -> ZeroShotRegressor:
    """Fit one linear regressor per embedding coordinate.

    Any coordinate whose fit ends up worse than predicting the target
    mean is replaced by that mean predictor (with a warning), so the
    training MSE never exceeds the mean-predictor floor.
    """
    x = as_matrix(encodings)
    t = as_matrix(targets)
    if x.shape[0] != t.shape[0]:
        raise ValidationError(f"{x.shape[0]} encodings but {t.shape[0]} target rows")
    if x.shape[0] < 2:
        raise ValidationError("need at least 2 training videos")
    if kind == "svr":
        hp = {**SVR_DEFAULTS, **(hyperparams or {})}
    elif kind == "ridge":
        hp = {**RIDGE_DEFAULTS, **(hyperparams or {})}
    else:
        raise ValidationError(f"unknown regressor kind {kind!r}; expected 'svr' or 'ridge'")

    def fit_coord(k):
        tk = t[:, k]
        if kind == "svr":
            rng = np.random.default_rng((seed, k))
            w, b = _svr_coordinate_descent(x, tk, hp["C"], hp["epsilon"], hp["tol"], hp["max_epochs"], rng)
        else:
            w, b = _fit_ridge(x, tk, hp["lam"])
        mse = float(np.mean((x @ w + b - tk) ** 2))
        floor = float(np.mean((tk - tk.mean()) ** 2))
        if mse > floor * (1.0 + 1e-12) + 1e-15:
            return np.zeros(x.shape[1]), float(tk.mean()), True
        return w, b, False

    n_coords = t.shape[1]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=min(int(workers), n_coords)) as pool:
            fits = list(pool.map(fit_coord, range(n_coords)))
    else:
        fits = [fit_coord(k) for k in range(n_coords)]

    fell_back = tuple(k for k, f in enumerate(fits) if f[2])
    if fell_back:
        warnings.warn(f"coordinates {list(fell_back)} fell back to the mean predictor")
    return ZeroShotRegressor(
        kind=kind,
        weights=np.stack([f[0] for f in fits]),
        biases=np.array([f[1] for f in fits]),
        hyperparams=hp,
        fallback_coords=fell_back,
    )


def project(reg: ZeroShotRegressor, encodings) -> np.ndarray:
    """Map encodings into the embedding space; 1-D in, 1-D out."""
    single = np.asarray(encodings).ndim == 1
    x = as_matrix(np.atleast_2d(np.asarray(encodings, dtype=np.float64)))
    if x.shape[1] != reg.input_dim:
        raise ValidationError(f"encodings have dim {x.shape[1]}, regressor expects {reg.input_dim}")
    out = x @ reg.weights.T + reg.biases
    return out[0] if single else out


def _as_raw_pairs(prototypes):
    """Normalize prototype input to [(name, raw vector)] sorted by name."""
    if isinstance(prototypes, dict):
        pairs = [(str(k), as_vector(v)) for k, v in prototypes.items()]
    else:
        pairs = []
        for p in prototypes:
            if isinstance(p, ClassPrototype):
                pairs.append((p.class_name, as_vector(p.raw)))
            else:
                name, vec = p
                pairs.append((str(name), as_vector(vec)))
    if not pairs:
        raise ValidationError("need at least one unseen-class prototype")
    pairs.sort(key=lambda kv: kv[0])
    names = [n for n, _ in pairs]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate prototype class names")
    return pairs


def t1s_smooth(prototypes, projected, k_t1s: int | None = None):
    """One smoothing pass: each prototype becomes the mean of its k_t1s
    cosine-nearest projected test vectors. Never iterated; neighbor pools
    may overlap between classes."""
    pairs = _as_raw_pairs(prototypes)
    p = as_matrix(projected)
    if k_t1s is None:
        k_t1s = default_k_t1s(p.shape[0])
    if not 1 <= k_t1s <= p.shape[0]:
        raise ValidationError(f"k_t1s={k_t1s} out of range [1, {p.shape[0]}]")
    raw = np.stack([v for _, v in pairs])
    sims = cosine_matrix(raw, p)
    out = []
    for row, (name, vec) in enumerate(pairs):
        nearest = np.argsort(-sims[row], kind="stable")[:k_t1s]
        out.append(ClassPrototype(class_name=name, raw=vec, smoothed=p[nearest].mean(axis=0), k_t1s=int(k_t1s)))
    return out


def _predict_against(names, matrix, projected):
    single = np.asarray(projected).ndim == 1
    p = as_matrix(np.atleast_2d(np.asarray(projected, dtype=np.float64)))
    sims = cosine_matrix(p, matrix)
    picks = [names[int(k)] for k in np.argmax(sims, axis=1)]
    return picks[0] if single else picks


def zsl_predict(prototypes, projected):
    """argmax cosine against smoothed prototypes; ties break to the
    lexicographically smallest class (prototypes are name-sorted)."""
    protos = sorted(prototypes, key=lambda p: p.class_name)
    names = [p.class_name for p in protos]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate prototype class names")
    return _predict_against(names, np.stack([p.smoothed for p in protos]), projected)


def dap_predict(prototypes, projected):
    """Same argmax against raw (unsmoothed) prototypes."""
    pairs = _as_raw_pairs(prototypes)
    return _predict_against([n for n, _ in pairs], np.stack([v for _, v in pairs]), projected)


def save_regressor(reg: ZeroShotRegressor, path) -> None:
    path = Path(path)
    vef_path = path.with_suffix(".vef")
    write_feature_file(vef_path, np.column_stack([reg.weights, reg.biases]))
    header = {
        "schema_version": 1,
        "kind": "zeroshot_regressor",
        "regressor": reg.kind,
        "input_dim": reg.input_dim,
        "output_dim": reg.output_dim,
        "hyperparams": reg.hyperparams,
        "fallback_coords": list(reg.fallback_coords),
        "vef": vef_path.name,
    }
    path.write_text(json.dumps(header, indent=2) + "\n", encoding="utf-8")


def load_regressor(path) -> ZeroShotRegressor:
    path = Path(path)
    header = json.loads(path.read_text(encoding="utf-8"))
    if header.get("kind") != "zeroshot_regressor":
        raise ValidationError(f"{path}: not a regressor file")
    block = read_feature_file(path.parent / header["vef"])
    if block.shape != (header["output_dim"], header["input_dim"] + 1):
        raise ValidationError(f"{path}: weight block shape {block.shape} disagrees with header")
    return ZeroShotRegressor(
        kind=header["regressor"],
        weights=block[:, :-1].copy(),
        biases=block[:, -1].copy(),
        hyperparams=dict(header["hyperparams"]),
        fallback_coords=tuple(header.get("fallback_coords", [])),
    )


def save_prototypes(prototypes, path) -> None:
    """Embedding-like text rows `<class> <raw|smoothed> <v...>`."""
    protos = sorted(prototypes, key=lambda p: p.class_name)
    if not protos:
        raise ValidationError("no prototypes to save")
    lines = [f"# prototypes schema_version=1 k_t1s={protos[0].k_t1s}"]
    for p in protos:
        lines.append(" ".join([p.class_name, "raw"] + [repr(float(v)) for v in p.raw]))
        lines.append(" ".join([p.class_name, "smoothed"] + [repr(float(v)) for v in p.smoothed]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_prototypes(path):
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    k_t1s = 0
    rows: dict = {}
    order = []
    for ln, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            for part in line.split():
                if part.startswith("k_t1s="):
                    k_t1s = int(part.split("=", 1)[1])
            continue
        parts = line.split()
        if len(parts) < 3 or parts[1] not in ("raw", "smoothed"):
            raise ValidationError(f"{path}:{ln}: expected '<class> <raw|smoothed> <values...>'")
        name, tag = parts[0], parts[1]
        vec = np.array([float(v) for v in parts[2:]])
        if name not in rows:
            rows[name] = {}
            order.append(name)
        rows[name][tag] = vec
    out = []
    for name in order:
        if set(rows[name]) != {"raw", "smoothed"}:
            raise ValidationError(f"{path}: class {name!r} is missing a raw or smoothed row")
        out.append(ClassPrototype(class_name=name, raw=rows[name]["raw"], smoothed=rows[name]["smoothed"], k_t1s=k_t1s))
    return out
