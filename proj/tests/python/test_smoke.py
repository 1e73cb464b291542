"""Smoke tests for the python bindings: end-to-end fit/predict/score."""

import math

import numpy as np
import pytest

import survboost as sv


@pytest.fixture(scope="module")
def synth():
    X, durations, events, oracle = sv.generate_synthetic(
        1500, events=2, features=6, censoring="covariate", rate=0.5, seed=7
    )
    return np.asarray(X), list(durations), list(events), oracle


def test_generate_shapes_and_rate(synth):
    X, durations, events, _ = synth
    assert X.shape == (1500, 6)
    assert len(durations) == 1500
    rate = sum(1 for e in events if e == 0) / len(events)
    assert 0.4 < rate < 0.6


def test_fit_predict_sums_to_one(synth):
    X, durations, events, _ = synth
    data = sv.Dataset(X, durations, events)
    model = sv.fit(data, rounds=15, seed=7)
    times = [0.25, 0.75, 1.5]
    cif = model.predict_cif(X[:50], times)
    assert cif.shape == (50, 3, 3)
    assert np.abs(cif.sum(axis=2) - 1.0).max() < 1e-9
    assert np.all(cif > 0.0) and np.all(cif < 1.0)


def test_metrics_run(synth):
    X, durations, events, _ = synth
    data = sv.Dataset(X, durations, events)
    train, test = data.split(0.3, 7)
    model = sv.fit(train, rounds=15, seed=7)

    event_times = [t for t, e in zip(test.durations, test.events) if e != 0]
    t_max = max(event_times)
    times = [t_max * (j + 1) / 20 for j in range(20)]
    cif = model.predict_cif(test.features, times)
    ibs, per_event = sv.integrated_brier_score(cif, times, test)
    assert math.isfinite(ibs) and ibs > 0
    assert len(per_event) == 2

    acc = sv.accuracy_in_time(cif, times, test, times[10])
    assert 0.0 <= acc <= 1.0

    risk = list(cif[:, 10, 1])
    c = sv.c_index_at(risk, test, times[10], 1)
    assert 0.0 <= c <= 1.0


def test_save_load_round_trip(tmp_path, synth):
    X, durations, events, _ = synth
    data = sv.Dataset(X, durations, events)
    model = sv.fit(data, rounds=8, seed=3)
    path = str(tmp_path / "model.json")
    model.save(path)
    loaded = sv.load_model(path)
    times = [0.4, 1.1]
    np.testing.assert_array_equal(
        model.predict_cif(X[:20], times), loaded.predict_cif(X[:20], times)
    )


def test_deterministic_fit(synth):
    X, durations, events, _ = synth
    data = sv.Dataset(X, durations, events)
    a = sv.fit(data, rounds=6, seed=11)
    b = sv.fit(data, rounds=6, seed=11)
    times = [0.3, 0.9, 2.0]
    np.testing.assert_array_equal(
        a.predict_cif(X[:30], times), b.predict_cif(X[:30], times)
    )


def test_kaplan_meier_curve(synth):
    _, durations, events, _ = synth
    km = sv.kaplan_meier(durations, [1 if e != 0 else 0 for e in events])
    assert km(0.0) == 1.0
    values = [km(t) for t in np.linspace(0, max(durations), 100)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_oracle_evaluators(synth):
    X, _, _, oracle = synth
    x = list(X[0])
    s = oracle.survival(x, 1.0)
    f1 = oracle.cif(x, 1.0, 1)
    f2 = oracle.cif(x, 1.0, 2)
    assert abs(s + f1 + f2 - 1.0) < 1e-6
    assert oracle.censoring_survival(x, 0.0) == 1.0


def test_errors_surface_as_exceptions(synth):
    X, durations, events, _ = synth
    with pytest.raises(Exception):
        sv.Dataset(X, durations[:-1], events)  # mismatched lengths
