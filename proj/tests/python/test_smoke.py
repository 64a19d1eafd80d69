import math

import pytest

import shortgp


def sinc_series(n=7, replicate=0):
    cfg = shortgp.SyntheticConfig()
    cfg.n_points = n
    return shortgp.generate_sinc_series(cfg, replicate)


def test_bound_constants():
    assert shortgp.length_scale_bound("se", 0.99, 1.0) == pytest.approx(0.8199, abs=1e-4)
    assert shortgp.length_scale_bound("se", 0.99, 11 / 6) == pytest.approx(1.5032, abs=1e-3)
    a = shortgp.length_scale_bound(shortgp.KernelFamily.matern(1.5), 0.9, 2.0)
    assert shortgp.energy_fraction("matern32", a, 2.0) == pytest.approx(0.9, abs=1e-7)


def test_time_series_validation():
    s = shortgp.TimeSeries([0.0, 1.0, 2.5], [1.0, 0.5, -0.2], id="x")
    assert len(s) == 3
    assert shortgp.sampling_interval(s.times) == 1.0
    with pytest.raises(shortgp.DataError):
        shortgp.TimeSeries([0.0, 0.0], [1.0, 2.0])


def test_fit_respects_bounds_and_predicts():
    s = sinc_series()
    scenarios = shortgp.synthetic_scenarios()
    assert [sc.label for sc in scenarios][3] == "l and noise bounded"
    r = shortgp.fit(s, scenarios[3], "se", seed=3)
    assert r.length_scale >= r.length_bounds[0]
    assert 0.01 <= r.noise_variance <= 0.1
    assert math.isfinite(r.log_marginal_likelihood)
    lml = shortgp.log_marginal_likelihood(s, "se", r.signal_variance, r.length_scale, r.noise_variance)
    assert lml == pytest.approx(r.log_marginal_likelihood, abs=1e-9)
    p = shortgp.predict(s, r, [-1.0, 0.0, 1.0])
    assert len(p["mean"]) == 3
    assert all(o >= l for o, l in zip(p["variance_observed"], p["variance_latent"]))
    d = shortgp.diagnose(r)
    assert not d["overfit_length_scale"] and not d["overfit_noise"]


def test_fixed_noise_needs_variances():
    s = sinc_series()
    with pytest.raises(shortgp.InvalidScenario):
        shortgp.fit(s, shortgp.expression_scenarios()[2])


def test_synthetic_experiment_shape():
    cfg = shortgp.SyntheticConfig()
    cfg.replicates = 6
    out = shortgp.run_synthetic_experiment(cfg, [5, 7], "se", restarts=2)
    assert out["n_values"] == [5, 7]
    assert len(out["cells"]) == 8
    assert len(out["records"]) == 2 * 6 * 4
    for n in (5, 7):
        wins = sum(c["win_loglik"] for c in out["cells"] if c["n"] == n)
        assert wins == pytest.approx(1.0)


def test_batch_and_csv_round_trip(tmp_path):
    series = [sinc_series(5, r) for r in range(3)]
    for s in series:
        s.noise_variances = [0.05] * len(s)
    path = str(tmp_path / "set.csv")
    shortgp.export_csv(path, series)
    back = shortgp.ingest_csv(path)
    assert [s.id for s in back] == [s.id for s in series]
    assert back[0].values == series[0].values
    out = shortgp.run_batch(back, shortgp.expression_scenarios(), "se", parallelism=2)
    assert len(out["records"]) == 12
    assert not any(r["failed"] for r in out["records"])
    assert all(r["noise_variance"] is None for r in out["records"] if r["scenario"] >= 2)
