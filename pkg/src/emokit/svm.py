"""One-vs-rest kernel SVM trained with two-variable SMO.

The binary dual is solved in minimization form

    min_a  0.5 a'Qa - sum(a)   s.t.  0 <= a_t <= C_t,  y'a = 0

with Q = (y y') * K. Working pairs are chosen by maximal violation
(first-order selection), stopping when m(a) - M(a) <= tol. A projected
gradient solver for the same problem is included as an independent
reference; both report the dual objective in maximization form so they
can be compared directly.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import read_feature_file, write_feature_file
from .encoding import load_encodings
from .errors import NumericalError, ValidationError
from .linalg import as_matrix, chi_square_gram, _check_nonnegative

KERNELS = ("chi2", "linear")


def kernel_gram(kernel: str, a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if kernel == "chi2":
        return chi_square_gram(a, b)
    if kernel == "linear":
        return a @ b.T
    raise ValidationError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")


def _as_cvec(C, n: int) -> np.ndarray:
    c = np.asarray(C, dtype=np.float64)
    c = np.full(n, float(c)) if c.ndim == 0 else c.copy()
    if c.shape != (n,) or not np.all(c > 0):
        raise ValidationError("C must be a positive scalar or length-n positive vector")
    return c


def smo_solve(gram, y, C, tol: float = 1e-3, max_iter: int = 400000):
    """Solve the binary dual by maximal-violating-pair SMO.

    Returns (alpha, bias, info). info carries the iteration count, the
    final maximization-form dual objective, and the per-iteration
    minimization objective history (non-increasing by construction).
    """
    gram = as_matrix(gram)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if gram.shape != (n, n):
        raise ValidationError(f"gram is {gram.shape}, labels have length {n}")
    if not np.all(np.abs(y) == 1.0):
        raise ValidationError("labels for the binary dual must be +1/-1")
    cvec = _as_cvec(C, n)

    alpha = np.zeros(n)
    grad = np.full(n, -1.0)
    history = []
    converged = False
    iterations = 0
    for _ in range(max_iter):
        g = -y * grad
        up = np.where(y > 0, alpha < cvec, alpha > 0.0)
        low = np.where(y > 0, alpha > 0.0, alpha < cvec)
        if not up.any() or not low.any():
            converged = True
            break
        gu = np.where(up, g, -np.inf)
        gl = np.where(low, g, np.inf)
        i = int(np.argmax(gu))
        j = int(np.argmin(gl))
        if gu[i] - gl[j] <= tol:
            converged = True
            break
        quad = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
        if quad <= 0.0:
            quad = 1e-12
        lim_i = cvec[i] - alpha[i] if y[i] > 0 else alpha[i]
        lim_j = alpha[j] if y[j] > 0 else cvec[j] - alpha[j]
        delta = min((gu[i] - gl[j]) / quad, lim_i, lim_j)
        old_i = alpha[i]
        old_j = alpha[j]
        ai = old_i + y[i] * delta
        aj = old_j - y[j] * delta
        # land exactly on the box so the index sets stay clean
        if ai < 1e-12 * max(1.0, cvec[i]):
            ai = 0.0
        elif ai > cvec[i] * (1.0 - 1e-12):
            ai = cvec[i]
        if aj < 1e-12 * max(1.0, cvec[j]):
            aj = 0.0
        elif aj > cvec[j] * (1.0 - 1e-12):
            aj = cvec[j]
        alpha[i] = ai
        alpha[j] = aj
        grad += y * (gram[:, i] * (y[i] * (ai - old_i)) + gram[:, j] * (y[j] * (aj - old_j)))
        history.append(0.5 * (alpha @ grad - alpha.sum()))
        iterations += 1
    if not converged:
        raise NumericalError(f"SMO did not reach tolerance {tol} within {max_iter} iterations")

    bias = _bias_from_gradient(grad, y, alpha, cvec)
    obj_min = 0.5 * (alpha @ grad - alpha.sum())
    info = {
        "iterations": iterations,
        "dual_objective": -obj_min,
        "objective_history": np.asarray(history),
    }
    return alpha, bias, info


def _index_sets(y, alpha, cvec, atol):
    at_lo = alpha <= atol
    at_hi = alpha >= cvec - atol
    up = np.where(y > 0, ~at_hi, ~at_lo)
    low = np.where(y > 0, ~at_lo, ~at_hi)
    return up, low


def _bias_from_gradient(grad, y, alpha, cvec):
    g = -y * grad
    up, low = _index_sets(y, alpha, cvec, atol=1e-10 * max(1.0, float(cvec.max())))
    if up.any() and low.any():
        return 0.5 * (np.max(g[up]) + np.min(g[low]))
    if up.any():
        return float(np.max(g[up]))
    if low.any():
        return float(np.min(g[low]))
    return 0.0


def kkt_violation(gram, y, alpha, C, bias=None):
    """Per-point complementary-slackness violation of the binary dual.

    Works for any feasible alpha, not just SMO output, so it can score
    the reference solver too. With the centered bias the maximum equals
    (m - M)/2, half the SMO stopping quantity.
    """
    gram = as_matrix(gram)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    cvec = _as_cvec(C, n)
    alpha = np.asarray(alpha, dtype=np.float64)
    grad = y * (gram @ (alpha * y)) - 1.0
    g = -y * grad
    up, low = _index_sets(y, alpha, cvec, atol=1e-8 * max(1.0, float(cvec.max())))
    if bias is None:
        bias = _bias_from_gradient(grad, y, alpha, cvec)
    viol = np.zeros(n)
    viol[up] = np.maximum(viol[up], g[up] - bias)
    viol[low] = np.maximum(viol[low], bias - g[low])
    return np.maximum(viol, 0.0)


def project_box_hyperplane(v, y, C) -> np.ndarray:
    """Euclidean projection onto {0 <= a <= C, y'a = 0} by bisection.

    a(theta) = clip(v - theta*y, 0, C) makes y'a(theta) non-increasing
    in theta, so the root is found by plain bisection.
    """
    v = np.asarray(v, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    cvec = _as_cvec(C, v.shape[0])

    def constraint(theta):
        return y @ np.clip(v - theta * y, 0.0, cvec)

    span = float(np.max(np.abs(v)) + cvec.max() + 1.0)
    lo, hi = -span, span
    for _ in range(128):
        mid = 0.5 * (lo + hi)
        if constraint(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return np.clip(v - theta * y, 0.0, cvec)


def projected_gradient_solve(gram, y, C, tol: float = 1e-6, max_iter: int = 200000):
    """Reference solver: accelerated projected gradient on the same dual.

    Restarts the momentum whenever the objective rises, which keeps the
    iterate sequence monotone. Stops when the KKT violation drops to tol.
    """
    gram = as_matrix(gram)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    cvec = _as_cvec(C, n)
    Q = (y[:, None] * y[None, :]) * gram
    lam_max = float(np.linalg.eigvalsh(Q)[-1])
    step = 1.0 / max(lam_max, 1e-12)

    def objective(a):
        return 0.5 * a @ (Q @ a) - a.sum()

    alpha = np.zeros(n)
    z = alpha.copy()
    t = 1.0
    f_prev = objective(alpha)
    iterations = 0
    converged = False
    for it in range(max_iter):
        nxt = project_box_hyperplane(z - step * (Q @ z - 1.0), y, cvec)
        f_next = objective(nxt)
        if f_next > f_prev:
            # momentum overshot; restart from the last good point
            z = alpha.copy()
            t = 1.0
            nxt = project_box_hyperplane(z - step * (Q @ z - 1.0), y, cvec)
            f_next = objective(nxt)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = nxt + ((t - 1.0) / t_next) * (nxt - alpha)
        alpha = nxt
        t = t_next
        f_prev = f_next
        iterations = it + 1
        if it % 16 == 0 and float(kkt_violation(gram, y, alpha, cvec).max()) <= tol:
            converged = True
            break
    if not converged and float(kkt_violation(gram, y, alpha, cvec).max()) > tol:
        raise NumericalError(f"projected gradient did not reach KKT tolerance {tol} within {max_iter} iterations")

    grad = Q @ alpha - 1.0
    bias = _bias_from_gradient(grad, y, alpha, cvec)
    info = {"iterations": iterations, "dual_objective": -objective(alpha)}
    return alpha, bias, info


@dataclass(frozen=True)
class BinaryMachine:
    """One one-vs-rest binary SVM: duals are stored pre-signed (alpha*y)."""

    class_name: str
    support_idx: np.ndarray
    signed_dual: np.ndarray
    support_vectors: np.ndarray
    bias: float
    iterations: int
    dual_objective: float


@dataclass(frozen=True)
class SupervisedModel:
    class_names: tuple
    kernel: str
    C: float
    tol: float
    seed: int
    dim: int
    n_train: int
    machines: tuple
    training_archive: str = ""
    balanced: bool = False


def validate_model(model: SupervisedModel, atol: float = 1e-6) -> None:
    """Check the dual constraints: sum(alpha*y) ~ 0 and 0 <= alpha <= C.

    Freshly trained models satisfy these to ~1e-12; models reloaded from
    float32 storage need atol scaled by the storage epsilon. Balanced
    models widen the box per side, so only the equality check applies.
    """
    for m in model.machines:
        if abs(float(m.signed_dual.sum())) > atol:
            raise NumericalError(f"class {m.class_name!r}: dual equality constraint violated")
        if not model.balanced:
            mags = np.abs(m.signed_dual)
            if mags.size and float(mags.max()) > model.C * (1.0 + 1e-6):
                raise NumericalError(f"class {m.class_name!r}: dual coefficient exceeds the box bound {model.C}")


def _encoding_matrix(encodings) -> np.ndarray:
    if isinstance(encodings, np.ndarray):
        return as_matrix(encodings)
    rows = [e.s if hasattr(e, "s") else e for e in encodings]
    return as_matrix(np.stack([np.asarray(r, dtype=np.float64) for r in rows]))


def gram_psd_check(gram, n_sample: int = 64, seed: int = 0) -> float:
    """Smallest eigenvalue of a sampled principal submatrix (must be ~>= 0)."""
    gram = as_matrix(gram)
    n = gram.shape[0]
    if n > n_sample:
        idx = np.sort(np.random.default_rng(seed).choice(n, size=n_sample, replace=False))
        gram = gram[np.ix_(idx, idx)]
    return float(np.linalg.eigvalsh(gram)[0])


def _resolve_workers(workers, n_tasks: int) -> int:
    if workers is None:
        env = os.environ.get("EMOKIT_WORKERS", "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(int(workers), n_tasks))


def train(
    encodings,
    labels,
    kernel: str = "chi2",
    C: float = 1.0,
    tol: float = 1e-3,
    seed: int = 0,
    balanced: bool = False,
    workers=None,
    training_archive: str = "",
) -> SupervisedModel:
    """Train one binary SVM per class on a shared Gram matrix.

    `balanced` scales each side's box by inverse class frequency. The
    seed is recorded for provenance; the solver itself is deterministic
    (ties break to the lowest index).
    """
    x = _encoding_matrix(encodings)
    labels = [str(v) for v in labels]
    if x.shape[0] != len(labels):
        raise ValidationError(f"{x.shape[0]} encodings but {len(labels)} labels")
    class_names = sorted(set(labels))
    if len(class_names) < 2:
        raise ValidationError("need at least 2 classes to train a recognizer")
    if kernel == "chi2":
        try:
            _check_nonnegative(x, "encodings")
        except ValidationError as exc:
            raise ValidationError(
                f"{exc} (chi-square needs nonnegative features: re-encode with "
                "clamp_negative=True or switch to the linear kernel)"
            ) from exc
    gram = kernel_gram(kernel, x, x)
    min_eig = gram_psd_check(gram, seed=seed)
    scale = max(1.0, float(np.trace(gram)) / gram.shape[0])
    if min_eig < -1e-8 * scale:
        raise NumericalError(f"kernel Gram fails the PSD check (min sampled eigenvalue {min_eig:.3e})")

    y_all = np.asarray(labels)

    def fit_one(name):
        y = np.where(y_all == name, 1.0, -1.0)
        n_pos = int((y > 0).sum())
        if n_pos == 0:
            raise ValidationError(f"class {name!r} has no positive examples")
        if n_pos == len(y):
            raise ValidationError(f"class {name!r} has no negative examples")
        if balanced:
            n = len(y)
            cvec = np.where(y > 0, C * n / (2.0 * n_pos), C * n / (2.0 * (n - n_pos)))
        else:
            cvec = C
        alpha, bias, info = smo_solve(gram, y, cvec, tol=tol)
        sv = np.flatnonzero(alpha > 1e-12 * max(1.0, C))
        return BinaryMachine(
            class_name=name,
            support_idx=sv,
            signed_dual=alpha[sv] * y[sv],
            support_vectors=x[sv],
            bias=float(bias),
            iterations=info["iterations"],
            dual_objective=float(info["dual_objective"]),
        )

    n_workers = _resolve_workers(workers, len(class_names))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            machines = list(pool.map(fit_one, class_names))
    else:
        machines = [fit_one(name) for name in class_names]

    model = SupervisedModel(
        class_names=tuple(class_names),
        kernel=kernel,
        C=float(C),
        tol=float(tol),
        seed=int(seed),
        dim=int(x.shape[1]),
        n_train=int(x.shape[0]),
        machines=tuple(machines),
        training_archive=str(training_archive),
        balanced=bool(balanced),
    )
    validate_model(model)
    return model


def decision_values(model: SupervisedModel, encodings) -> np.ndarray:
    """Matrix of per-class decision values, columns ordered as class_names."""
    x = _encoding_matrix(encodings)
    if x.shape[1] != model.dim:
        raise ValidationError(f"encodings have dim {x.shape[1]}, model expects {model.dim}")
    cols = []
    for m in model.machines:
        if m.support_idx.size == 0:
            cols.append(np.full(x.shape[0], m.bias))
            continue
        k = kernel_gram(model.kernel, x, m.support_vectors)
        cols.append(k @ m.signed_dual + m.bias)
    return np.column_stack(cols)


def predict(model: SupervisedModel, encoding):
    """(class name, per-class decision scores) for one encoded video."""
    vec = encoding.s if hasattr(encoding, "s") else np.asarray(encoding, dtype=np.float64)
    scores = decision_values(model, vec[None, :])[0]
    return model.class_names[int(np.argmax(scores))], scores


def predict_batch(model: SupervisedModel, encodings):
    scores = decision_values(model, encodings)
    picks = np.argmax(scores, axis=1)
    return [model.class_names[int(p)] for p in picks], scores


def classification_metrics(y_true, y_pred, class_names) -> dict:
    """Accuracy metrics plus the confusion matrix (rows true, cols predicted).

    Mean per-class accuracy is the unweighted mean of per-class recalls,
    taken over classes that appear in y_true.
    """
    y_true = [str(v) for v in y_true]
    y_pred = [str(v) for v in y_pred]
    if len(y_true) != len(y_pred):
        raise ValidationError(f"{len(y_pred)} predictions for {len(y_true)} labels")
    class_names = list(class_names)
    order = {name: k for k, name in enumerate(class_names)}
    for v in y_true:
        if v not in order:
            raise ValidationError(f"test label {v!r} is not in the class set")
    for v in y_pred:
        if v not in order:
            raise ValidationError(f"predicted label {v!r} is not in the class set")
    confusion = np.zeros((len(order), len(order)), dtype=np.int64)
    for truth, guess in zip(y_true, y_pred):
        confusion[order[truth], order[guess]] += 1
    row_totals = confusion.sum(axis=1)
    seen = row_totals > 0
    per_class = np.zeros(len(order))
    per_class[seen] = confusion.diagonal()[seen] / row_totals[seen]
    return {
        "overall_accuracy": float(confusion.diagonal().sum() / max(1, confusion.sum())),
        "per_class_accuracy": {name: float(per_class[order[name]]) for name in class_names if seen[order[name]]},
        "mean_per_class_accuracy": float(per_class[seen].mean()) if seen.any() else 0.0,
        "confusion_matrix": confusion.tolist(),
        "class_names": class_names,
        "n_test": len(y_true),
    }


def evaluate(model: SupervisedModel, encodings, labels) -> dict:
    """Run predict over a labeled test set and compute the metrics."""
    predicted, _ = predict_batch(model, encodings)
    return classification_metrics(labels, predicted, model.class_names)


def save_model(model: SupervisedModel, path) -> None:
    """JSON header + VEF1 block of (training index, signed dual) rows."""
    path = Path(path)
    rows = []
    spans = []
    start = 0
    for m in model.machines:
        block = np.column_stack([m.support_idx.astype(np.float64), m.signed_dual])
        rows.append(block if block.size else np.zeros((0, 2)))
        spans.append((start, start + m.support_idx.size))
        start += m.support_idx.size
    table = np.vstack(rows) if start else np.zeros((1, 2))
    vef_path = path.with_suffix(".vef")
    write_feature_file(vef_path, table)
    header = {
        "schema_version": 1,
        "kind": "svm_model",
        "classes": list(model.class_names),
        "kernel": model.kernel,
        "C": model.C,
        "tol": model.tol,
        "seed": model.seed,
        "dim": model.dim,
        "n_train": model.n_train,
        "training_archive": model.training_archive,
        "balanced": model.balanced,
        "vef": vef_path.name,
        "machines": [
            {
                "class": m.class_name,
                "bias": m.bias,
                "row_start": spans[k][0],
                "row_end": spans[k][1],
                "iterations": m.iterations,
                "dual_objective": m.dual_objective,
            }
            for k, m in enumerate(model.machines)
        ],
    }
    path.write_text(json.dumps(header, indent=2) + "\n", encoding="utf-8")


def load_model(path, training_matrix=None) -> SupervisedModel:
    """Rebuild a model; support vectors come from the referenced archive.

    Pass `training_matrix` to materialize support vectors directly and
    skip the archive lookup.
    """
    path = Path(path)
    header = json.loads(path.read_text(encoding="utf-8"))
    if header.get("kind") != "svm_model":
        raise ValidationError(f"{path}: not a recognizer model file")
    table = read_feature_file(path.with_suffix(".vef"))
    if training_matrix is None:
        archive = header.get("training_archive", "")
        if not archive:
            raise ValidationError(f"{path}: model stores no training archive and none was supplied")
        archive_path = Path(archive)
        if not archive_path.is_absolute():
            archive_path = path.parent / archive_path
        training_matrix, _, _ = load_encodings(archive_path)
    x = as_matrix(training_matrix)
    machines = []
    for entry in header["machines"]:
        rows = table[entry["row_start"]:entry["row_end"]]
        idx = rows[:, 0].astype(np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
            raise ValidationError(f"{path}: support index out of range for the training archive")
        machines.append(
            BinaryMachine(
                class_name=entry["class"],
                support_idx=idx,
                signed_dual=rows[:, 1].copy(),
                support_vectors=x[idx],
                bias=float(entry["bias"]),
                iterations=int(entry["iterations"]),
                dual_objective=float(entry["dual_objective"]),
            )
        )
    model = SupervisedModel(
        class_names=tuple(header["classes"]),
        kernel=header["kernel"],
        C=float(header["C"]),
        tol=float(header["tol"]),
        seed=int(header["seed"]),
        dim=int(header["dim"]),
        n_train=int(header["n_train"]),
        machines=tuple(machines),
        training_archive=header.get("training_archive", ""),
        balanced=bool(header.get("balanced", False)),
    )
    # float32 storage rounds each dual, so the equality check scales with size
    slack = sum(m.support_idx.size for m in machines) * model.C * float(np.finfo(np.float32).eps)
    validate_model(model, atol=1e-6 + slack)
    return model
