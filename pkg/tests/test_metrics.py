import math

import numpy as np
import pytest

from wavefarm.metrics import evaluate, evaluate_with_physical
from wavefarm.preprocess import fit_scaler, transform


class TestEvaluate:
    def test_perfect_fit(self):
        r = evaluate([1, 2, 3], [1, 2, 3])
        assert r.mse == 0.0
        assert r.rmse == 0.0
        assert r.mae == 0.0
        assert r.r2 == 1.0

    def test_unit_offset(self):
        r = evaluate([0, 0], [1, 1])
        assert r.mse == 1.0
        assert r.rmse == 1.0
        assert r.mae == 1.0

    def test_mean_predictor_r2_zero(self):
        y = np.array([1.0, 2.0, 3.0, 10.0])
        r = evaluate(y, np.full(4, y.mean()))
        assert r.r2 == pytest.approx(0.0, abs=1e-12)

    def test_constant_truth_r2_nan(self):
        r = evaluate([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        assert math.isnan(r.r2)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            evaluate([], [])

    def test_rmse_squares_to_mse(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            r = evaluate(rng.normal(size=30), rng.normal(size=30))
            assert r.rmse**2 == pytest.approx(r.mse, rel=1e-15)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        yt = rng.normal(size=40)
        yp = rng.normal(size=40)
        perm = rng.permutation(40)
        a = evaluate(yt, yp)
        b = evaluate(yt[perm], yp[perm])
        assert a.mse == pytest.approx(b.mse, rel=1e-15)
        assert a.mae == pytest.approx(b.mae, rel=1e-15)
        assert a.r2 == pytest.approx(b.r2, rel=1e-12)

    def test_mae_le_rmse(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            r = evaluate(rng.normal(size=15), rng.normal(size=15))
            assert r.mae <= r.rmse + 1e-15


class TestPhysicalUnits:
    def test_physical_scaling_minmax(self):
        raw = np.array([100.0, 300.0, 500.0, 900.0])
        scaler = fit_scaler(raw.reshape(-1, 1), "minmax")
        yt = transform(scaler, raw.reshape(-1, 1))[:, 0]
        yp = yt + 0.1  # constant normalized offset
        r = evaluate_with_physical(yt, yp, scaler)
        span = 900.0 - 100.0
        assert r.mae_physical == pytest.approx(0.1 * span, rel=1e-10)
        assert r.rmse_physical == pytest.approx(0.1 * span, rel=1e-10)
        assert r.mse_physical == pytest.approx((0.1 * span) ** 2, rel=1e-10)

    def test_json_fields(self):
        import json

        r = evaluate_with_physical(
            [0.1, 0.5], [0.2, 0.4], fit_scaler(np.array([[0.0], [10.0]]), "minmax")
        )
        doc = json.loads(r.to_json())
        assert set(doc) == {
            "mse", "rmse", "mae", "r2",
            "mse_physical", "rmse_physical", "mae_physical",
        }
