import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import lrfnet

DATA = Path(__file__).resolve().parents[1] / "data"


def test_series_and_normalization():
    s = lrfnet.Series.from_values(np.array([2.0, 4.0, 6.0]))
    assert len(s) == 3
    np.testing.assert_array_equal(s.xs, [1.0, 2.0, 3.0])
    n, params = lrfnet.normalize_01(s)
    np.testing.assert_allclose(n.ys, [0.0, 0.5, 1.0])
    assert (params.y_min, params.y_max) == (2.0, 6.0)
    back = lrfnet.denormalize_01(n, params)
    np.testing.assert_allclose(back.ys, s.ys, rtol=0, atol=1e-12)


def test_errors_carry_kind():
    with pytest.raises(lrfnet.LrfnetError) as info:
        lrfnet.normalize_01(lrfnet.Series.from_values(np.ones(4)))
    assert info.value.kind == "DegenerateRange"
    assert isinstance(info.value, ValueError)
    with pytest.raises(lrfnet.LrfnetError) as info:
        lrfnet.gen_function("f9", np.array([1.0]))
    assert info.value.kind == "UnknownFunction"


def test_stationary_branch_for_exponential():
    xs = np.arange(901) * 0.01 + 1.0
    n, _ = lrfnet.normalize_01(lrfnet.Series(xs, np.exp(xs)))
    model = lrfnet.fit_stationary(n)
    assert model.branch == lrfnet.StBranch.Exponential
    s = lrfnet.apply_stationary(model, n)
    restored = [lrfnet.invert_stationary(model, v, x) for v, x in zip(s.ys, s.xs)]
    np.testing.assert_allclose(restored, n.ys, rtol=0, atol=1e-9)


def test_lrf_encoding_shapes():
    ys = np.cumsum(np.random.default_rng(3).normal(size=80))
    model = lrfnet.fit_lrf(lrfnet.Series.from_values(ys), 4)
    feats, targets, positions = lrfnet.encode_training_set(model, lrfnet.Series.from_values(ys))
    assert feats.shape == (80 - 1 - model.first_position, 4)
    assert targets.shape == (feats.shape[0],)
    assert positions[0] == model.first_position
    np.testing.assert_allclose(lrfnet.encode(model, lrfnet.Series.from_values(ys), positions[0]), feats[0])


def test_regressors_predict():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 3))
    y = x @ np.array([1.0, -2.0, 0.5]) + 3.0
    lin = lrfnet.fit_linear(x, y)
    np.testing.assert_allclose(lin.predict(x), y, atol=1e-9)
    params = lrfnet.GbtParams()
    params.n_rounds = 20
    gbt = lrfnet.fit_gbt(x, y, params, 1)
    assert gbt.backend == lrfnet.Backend.Gbt
    assert np.isfinite(gbt.predict(x[0]))
    mlp = lrfnet.fit_mlp(x, y)
    assert mlp.predict(x).shape == (50,)


def test_pipeline_train_generalize_and_round_trip(tmp_path):
    xs = np.arange(0.0, 3051.0)
    series = lrfnet.gen_function("f5", xs)
    cfg = lrfnet.PipelineConfig()
    cfg.backend = lrfnet.Backend.Linear
    fitted = lrfnet.train(series, cfg)
    forecast = lrfnet.generalize(fitted, 100)
    assert len(forecast) == 100
    assert forecast.xs[0] == 3051.0
    truth = lrfnet.gen_function("f5", forecast.xs)
    assert lrfnet.mae(forecast, truth) < 0.4

    path = tmp_path / "model.json"
    fitted.save(path)
    loaded = lrfnet.FittedPipeline.load(path)
    assert loaded == fitted
    assert loaded.to_json() == fitted.to_json()
    again = lrfnet.generalize(loaded, 100)
    np.testing.assert_array_equal(again.ys, forecast.ys)
    assert json.loads(fitted.to_json())["format"] == "lrfnet-pipeline"


def test_load_csv_fixture():
    air = lrfnet.load_csv(DATA / "airline.csv", "passengers", True)
    assert len(air) == 144
    assert air.ys.sum() == 40363
    sun = lrfnet.load_csv(DATA / "sunspots.csv", 1, True)
    assert len(sun) == 309


def test_math_suite_report():
    cfg = lrfnet.PipelineConfig()
    cfg.backend = lrfnet.Backend.Linear
    rows, report = lrfnet.run_math_suite(cfg, "csv")
    assert [r["scenario"] for r in rows] == ["f1", "f2", "f3", "f4", "f5", "f6"]
    assert report.splitlines()[0].startswith("scenario,backend,seed")
    assert len(report.splitlines()) == 7
    for r in rows:
        if r["ok"]:
            assert all(math.isfinite(seg[2]) for seg in r["segments"])
        else:
            assert r["long_error"] or r["short_error"]
    assert rows[4]["ok"] and rows[5]["ok"]
