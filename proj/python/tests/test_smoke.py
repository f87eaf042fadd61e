import json
import math

import numpy as np
import pytest

import pad

SMALL = {
    "seed": 2,
    "model": {"hidden_dim": 4, "width_f": 8, "width_g": 8, "width_c": 8,
              "n_hidden_layers_f": 1, "n_hidden_layers_g": 1},
    "solver": {"scheme": "rk4", "steps_per_window": 1, "knot_aligned": True},
    "train": {"epochs": 1, "batch_size": 16, "window_size": 20, "poa_horizon": 5},
    "synthetic": {"length": 3000, "n_channels": 2, "anomaly_count": 3, "precursor_len": 20},
    "sweep": {"horizons": [1, 5]},
    "eval": {"drop": [0.0, 0.5]},
}


def test_config_defaults_and_unknown_keys():
    cfg = pad.resolve_config({"train": {"epochs": 3}})
    assert cfg["train"]["epochs"] == 3
    assert cfg["solver"]["scheme"] == "rk4"
    with pytest.raises(pad.ConfigError):
        pad.resolve_config({"train": {"epoch": 3}})


def test_spline_interpolates_and_is_natural():
    t = np.linspace(0.0, 2 * math.pi, 11)
    v = np.sin(t)[:, None]
    s = pad.CubicSpline(t, v)
    for ti, vi in zip(t, v[:, 0]):
        assert abs(s(ti)[0] - vi) < 1e-10
    assert abs(s.second_derivative(0.0)[0]) < 1e-7
    assert s.domain == (0.0, pytest.approx(2 * math.pi))
    with pytest.raises(pad.DomainError):
        s(-1.0)


def test_metrics():
    r = pad.evaluate_scores([0.9, 0.9, 0.9, 0.9, 0.1], [1, 1, 1, 0, 1])
    assert r["precision"] == pytest.approx(0.75)
    assert r["f1"] == pytest.approx(0.75)


def test_gradcheck(tmp_path):
    r = pad.gradcheck(None, tmp_path)
    assert r["passed"]
    assert r["max_rel_err"] <= 1e-4


def test_synthetic_shapes():
    d = pad.generate_synthetic(SMALL)
    assert d["values"].shape == (3000, 2)
    assert len(d["labels"]) == 3000
    assert sum(d["labels"]) > 0


def test_train_eval_predict(tmp_path):
    rep = pad.train(SMALL, tmp_path)
    assert len(rep["history"]) == 1
    ev = pad.evaluate(SMALL, tmp_path / "checkpoint.json", tmp_path)
    assert [row["drop"] for row in ev["results"]] == [0.0, 0.5]
    on_disk = json.loads((tmp_path / "eval.json").read_text())
    assert on_disk == ev

    pad.synth(SMALL, tmp_path / "data")
    seq = pad.load_csv(tmp_path / "data" / "test.csv")
    pa, pp = pad.predict(tmp_path / "checkpoint.json", seq["times"][:20], seq["values"][:20], SMALL)
    assert 0.0 < pa < 1.0 and 0.0 < pp < 1.0


def test_missing_data_raises(tmp_path):
    with pytest.raises(pad.InputError):
        pad.evaluate(SMALL, tmp_path / "missing.json", tmp_path)
