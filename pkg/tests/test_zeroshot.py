import numpy as np
import pytest

from emokit.errors import ValidationError
from emokit.linalg import cosine
from emokit.zeroshot import (
    ClassPrototype,
    dap_predict,
    default_k_t1s,
    fit_regressor,
    load_prototypes,
    load_regressor,
    project,
    save_prototypes,
    save_regressor,
    t1s_smooth,
    zsl_predict,
)


def ridge_oracle(x, t, lam):
    """Closed-form ridge with unpenalized intercept via centering."""
    xm, tm = x.mean(axis=0), t.mean()
    xc, tc = x - xm, t - tm
    w = np.linalg.solve(xc.T @ xc + lam * np.eye(x.shape[1]), xc.T @ tc)
    return w, float(tm - xm @ w)


class TestRidge:
    def test_matches_closed_form(self, rng):
        x = rng.normal(size=(30, 6))
        t = rng.normal(size=(30, 3))
        reg = fit_regressor(x, t, kind="ridge", hyperparams={"lam": 0.01})
        for k in range(3):
            w, b = ridge_oracle(x, t[:, k], 0.01)
            assert np.allclose(reg.weights[k], w, atol=1e-9)
            assert reg.biases[k] == pytest.approx(b, abs=1e-9)

    def test_exact_recovery_on_linear_data(self, rng):
        w_true = rng.normal(size=(2, 5))
        b_true = rng.normal(size=2)
        x = rng.normal(size=(40, 5))
        t = x @ w_true.T + b_true
        reg = fit_regressor(x, t, kind="ridge", hyperparams={"lam": 1e-9})
        assert np.allclose(reg.weights, w_true, atol=1e-5)
        assert np.allclose(reg.biases, b_true, atol=1e-5)


class TestSvr:
    def test_dual_route_recovers_planted_map(self, rng):
        # exact linear targets: both SVR and ridge recover the same map
        w_true = rng.normal(size=(3, 6))
        b_true = rng.normal(size=3)
        x = rng.normal(size=(50, 6))
        t = x @ w_true.T + b_true
        svr = fit_regressor(x, t, kind="svr", hyperparams={"C": 50.0, "epsilon": 1e-3}, seed=0)
        ridge = fit_regressor(x, t, kind="ridge", hyperparams={"lam": 1e-8})
        p_svr = project(svr, x)
        p_ridge = project(ridge, x)
        assert np.allclose(p_svr, t, atol=5e-3)
        assert np.allclose(p_ridge, t, atol=1e-6)
        assert np.max(np.abs(p_svr - p_ridge)) <= 5e-3

    def test_epsilon_tube_flatness(self, rng):
        # targets inside the tube around a constant leave w at zero
        x = rng.normal(size=(20, 4))
        t = 3.0 + rng.uniform(-0.05, 0.05, size=(20, 1))
        reg = fit_regressor(x, t, kind="svr", hyperparams={"C": 1.0, "epsilon": 0.5}, seed=1)
        assert np.allclose(reg.weights, 0.0, atol=1e-6)
        assert reg.biases[0] == pytest.approx(3.0, abs=0.2)

    def test_training_mse_never_exceeds_mean_floor(self, rng):
        for seed in range(5):
            r = np.random.default_rng(seed)
            x = r.normal(size=(25, 5))
            t = r.normal(size=(25, 2))  # pure noise: mean predictor is strong
            reg = fit_regressor(x, t, kind="svr", hyperparams={"C": 0.01, "epsilon": 0.0}, seed=seed)
            p = project(reg, x)
            mse = float(np.mean((p - t) ** 2))
            floor = float(np.mean((t - t.mean(axis=0)) ** 2))
            assert mse <= floor * (1 + 1e-9) + 1e-12

    def test_deterministic(self, rng):
        x = rng.normal(size=(20, 4))
        t = rng.normal(size=(20, 2))
        a = fit_regressor(x, t, kind="svr", seed=3)
        b = fit_regressor(x, t, kind="svr", seed=3)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.biases, b.biases)


class TestT1S:
    def test_smoothing_oracle(self, rng):
        protos = {"b": rng.normal(size=4), "a": rng.normal(size=4)}
        projected = rng.normal(size=(7, 4))
        out = t1s_smooth(protos, projected, 3)
        assert [p.class_name for p in out] == ["a", "b"]
        for p in out:
            sims = np.array([cosine(p.raw, v) for v in projected])
            nearest = np.argsort(-sims, kind="stable")[:3]
            assert np.allclose(p.smoothed, projected[nearest].mean(axis=0), atol=1e-12)

    def test_default_k_rule(self):
        assert default_k_t1s(2) == 2
        assert default_k_t1s(10) == 3
        assert default_k_t1s(100) == 10

    def test_k_out_of_range(self, rng):
        protos = {"a": rng.normal(size=3)}
        with pytest.raises(ValidationError):
            t1s_smooth(protos, rng.normal(size=(4, 3)), 5)

    def test_fixed_point_matches_dap(self, rng):
        # projections identical to raw prototypes: smoothing with k=1 is identity
        raw = {"a": rng.normal(size=5), "b": rng.normal(size=5), "c": rng.normal(size=5)}
        projected = np.stack([raw[k] for k in sorted(raw)])
        protos = t1s_smooth(raw, projected, 1)
        for p in protos:
            assert np.allclose(p.smoothed, raw[p.class_name], atol=1e-12)
        queries = rng.normal(size=(40, 5))
        assert zsl_predict(protos, queries) == dap_predict(raw, queries)

    def test_predict_tie_breaks_lexicographic(self):
        raw = {"b": np.array([1.0, 0.0]), "a": np.array([1.0, 0.0])}
        assert dap_predict(raw, np.array([1.0, 0.0])) == "a"

    def test_single_query_returns_scalar_label(self, rng):
        raw = {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])}
        assert dap_predict(raw, np.array([0.9, 0.1])) == "a"
        assert dap_predict(raw, np.array([[0.9, 0.1]])) == ["a"]


class TestPersistence:
    def test_regressor_round_trip(self, tmp_path, rng):
        x = rng.normal(size=(20, 5))
        t = rng.normal(size=(20, 3))
        reg = fit_regressor(x, t, kind="ridge")
        p = tmp_path / "reg.json"
        save_regressor(reg, p)
        back = load_regressor(p)
        assert back.kind == "ridge"
        q = rng.normal(size=(4, 5))
        assert np.allclose(project(back, q), project(reg, q), atol=1e-5)

    def test_prototypes_round_trip(self, tmp_path, rng):
        protos = [
            ClassPrototype("awe", rng.normal(size=4), rng.normal(size=4), 3),
            ClassPrototype("love", rng.normal(size=4), rng.normal(size=4), 3),
        ]
        p = tmp_path / "protos.txt"
        save_prototypes(protos, p)
        back = load_prototypes(p)
        assert [b.class_name for b in back] == ["awe", "love"]
        for a, b in zip(protos, back):
            assert np.allclose(a.raw, b.raw, atol=0)
            assert np.allclose(a.smoothed, b.smoothed, atol=0)
            assert b.k_t1s == 3
