import numpy as np
import pytest

from emokit.errors import ValidationError
from emokit.linalg import (
    as_matrix,
    as_vector,
    chi_square_gram,
    chi_square_kernel,
    cosine,
    cosine_matrix,
    knn_spherical,
    normalize_rows,
    top_k_rows,
)


def naive_cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def naive_chi2(a, b):
    total = 0.0
    for x, y in zip(a, b):
        if x + y > 0:
            total += (x * y) / (x + y)
    return 2.0 * total


class TestCosine:
    def test_matches_naive_on_random_pairs(self, rng):
        for _ in range(100):
            a = rng.normal(size=8)
            b = rng.normal(size=8)
            assert cosine(a, b) == pytest.approx(naive_cosine(a, b), abs=1e-12)

    def test_zero_vector_gives_zero(self):
        assert cosine(np.zeros(4), np.ones(4)) == 0.0

    def test_clipped_to_unit_range(self, rng):
        v = rng.normal(size=16)
        assert cosine(v, 3.0 * v) == 1.0
        assert cosine(v, -2.0 * v) == -1.0

    def test_matrix_matches_scalar(self, rng):
        a = rng.normal(size=(5, 6))
        b = rng.normal(size=(7, 6))
        m = cosine_matrix(a, b)
        for i in range(5):
            for j in range(7):
                assert m[i, j] == pytest.approx(cosine(a[i], b[j]), abs=1e-12)


class TestChiSquare:
    def test_matches_naive(self, rng):
        for _ in range(50):
            a = rng.uniform(0, 3, size=10)
            b = rng.uniform(0, 3, size=10)
            assert chi_square_kernel(a, b) == pytest.approx(naive_chi2(a, b), abs=1e-12)

    def test_shared_zero_coordinate_is_skipped(self):
        a = np.array([0.0, 1.0])
        b = np.array([0.0, 3.0])
        assert chi_square_kernel(a, b) == pytest.approx(2.0 * 3.0 / 4.0)

    def test_rejects_negative_input(self):
        with pytest.raises(ValidationError):
            chi_square_kernel(np.array([-0.1, 1.0]), np.array([1.0, 1.0]))

    def test_gram_matches_pairwise(self, rng):
        x = rng.uniform(0, 2, size=(9, 5))
        g = chi_square_gram(x)
        for i in range(9):
            for j in range(9):
                assert g[i, j] == pytest.approx(naive_chi2(x[i], x[j]), abs=1e-10)
        assert np.allclose(g, g.T)

    def test_gram_blocking_invariant(self, rng):
        x = rng.uniform(0, 2, size=(30, 4))
        assert np.allclose(chi_square_gram(x, block=7), chi_square_gram(x, block=256))

    def test_gram_psd_on_random_data(self, rng):
        x = rng.uniform(0, 1, size=(20, 6))
        eigs = np.linalg.eigvalsh(chi_square_gram(x))
        assert eigs.min() >= -1e-9 * max(1.0, eigs.max())


class TestHelpers:
    def test_normalize_rows_unit_norm(self, rng):
        m = normalize_rows(rng.normal(size=(6, 4)))
        assert np.allclose(np.linalg.norm(m, axis=1), 1.0)

    def test_top_k_rows_matches_sort(self, rng):
        sims = rng.normal(size=(10, 7))
        got = top_k_rows(sims, 3)
        for i in range(10):
            expect = np.argsort(-sims[i], kind="stable")[:3]
            assert np.array_equal(got[i], expect)

    def test_top_k_ties_prefer_lowest_index(self):
        sims = np.array([[0.5, 0.9, 0.9, 0.1]])
        assert np.array_equal(top_k_rows(sims, 2)[0], [1, 2])

    def test_knn_spherical_matches_cosine_sort(self, rng):
        pool = rng.normal(size=(12, 5))
        q = rng.normal(size=5)
        got = knn_spherical(q, pool, 4)
        sims = np.array([cosine(q, p) for p in pool])
        expect = np.argsort(-sims, kind="stable")[:4]
        assert [i for i, _ in got] == expect.tolist()

    def test_as_vector_rejects_matrix(self):
        with pytest.raises(ValidationError):
            as_vector(np.ones((2, 2)))

    def test_as_matrix_rejects_nonfinite(self):
        from emokit.errors import NonFiniteError

        with pytest.raises(NonFiniteError):
            as_matrix(np.array([[1.0, np.nan]]))
