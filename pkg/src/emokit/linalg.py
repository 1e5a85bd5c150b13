"""Vector/matrix primitives: cosine similarity, chi-square kernel, spherical KNN.

All accumulation happens in float64 regardless of on-disk storage precision.
Everything here is a pure function over immutable inputs; tie-breaking is
always "lowest index wins" so results are reproducible.
"""

import numpy as np

from .errors import DimensionMismatchError, NonFiniteError, ValidationError


def as_vector(a) -> np.ndarray:
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValidationError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("vector contains NaN or Inf")
    return v


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix contains NaN or Inf")
    return m


def cosine(a, b) -> float:
    """Cosine similarity a.b / (|a||b|), clamped into [-1, 1].

    Returns 0.0 if either vector has zero norm: a featureless input should
    contribute no similarity.
    """
    a = as_vector(a)
    b = as_vector(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"cosine: dims {a.shape[0]} != {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def normalize_rows(m) -> np.ndarray:
    """L2-normalize each row; all-zero rows stay zero."""
    m = as_matrix(m)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    out = np.divide(m, norms, out=np.zeros_like(m), where=norms > 0)
    return out


def cosine_matrix(a, b) -> np.ndarray:
    """Pairwise cosine similarities between rows of a and rows of b."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(f"cosine_matrix: dims {a.shape[1]} != {b.shape[1]}")
    return np.clip(normalize_rows(a) @ normalize_rows(b).T, -1.0, 1.0)


def chi_square_kernel(a, b) -> float:
    """Chi-square kernel sum_i 2*a_i*b_i / (a_i + b_i) on nonnegative vectors.

    Terms with a_i + b_i == 0 contribute 0. Note k(x, x) equals the L1 norm
    of x, so this kernel is not normalized to 1 on the diagonal.
    """
    a = as_vector(a)
    b = as_vector(b)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatchError(f"chi_square_kernel: dims {a.shape[0]} != {b.shape[0]}")
    _check_nonnegative(a, "a")
    _check_nonnegative(b, "b")
    den = a + b
    num = 2.0 * a * b
    return float(np.divide(num, den, out=np.zeros_like(num), where=den > 0).sum())


def chi_square_gram(a, b=None, block=256) -> np.ndarray:
    """Pairwise chi-square kernel matrix between rows of a and rows of b.

    Computed in row blocks to bound the (n_block, m, d) broadcast buffer.
    """
    a = as_matrix(a)
    b = a if b is None else as_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(f"chi_square_gram: dims {a.shape[1]} != {b.shape[1]}")
    _check_nonnegative(a, "a")
    if b is not a:
        _check_nonnegative(b, "b")
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for start in range(0, a.shape[0], block):
        chunk = a[start : start + block]
        num = 2.0 * chunk[:, None, :] * b[None, :, :]
        den = chunk[:, None, :] + b[None, :, :]
        terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        out[start : start + block] = terms.sum(axis=2)
    return out


def _check_nonnegative(v, name):
    neg = np.flatnonzero(v < 0)
    if neg.size:
        i = int(neg[0])
        idx = i if v.ndim == 1 else np.unravel_index(i, v.shape)
        raise ValidationError(
            f"chi-square kernel requires nonnegative components; {name}[{idx}] = {v.flat[i]}"
        )


def top_k_rows(sims: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries per row, descending, ties to lower index.

    Stable argsort on the negated values gives exactly the required ordering,
    and makes the k-selection a prefix of the (k+1)-selection.
    """
    return np.argsort(-sims, axis=1, kind="stable")[:, :k]


def knn_spherical(query, pool, k: int) -> list[tuple[int, float]]:
    """The k pool entries most cosine-similar to query.

    Returns (index, similarity) pairs sorted by descending similarity,
    ties broken by lower index.
    """
    pool = as_matrix(pool)
    if pool.shape[0] == 0:
        raise ValidationError("knn_spherical: empty pool")
    if not 1 <= k <= pool.shape[0]:
        raise ValidationError(f"knn_spherical: k={k} out of range for pool of {pool.shape[0]}")
    query = as_vector(query)
    if query.shape[0] != pool.shape[1]:
        raise DimensionMismatchError(f"knn_spherical: dims {query.shape[0]} != {pool.shape[1]}")
    sims = cosine_matrix(query[None, :], pool)[0]
    order = top_k_rows(sims[None, :], k)[0]
    return [(int(i), float(sims[i])) for i in order]
