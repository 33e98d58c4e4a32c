import math

import pandas as pd
import pytest
from pydantic import ValidationError

from sepradar.harness.sweep import curve_batch_counts, point_setup, run_sweep, shared_doppler_span, trial_seeds
from sepradar.schemas import EstimatorSettings, SweepSpec
from tests.conftest import noiseless_config


def test_single_trial_rmse_is_the_absolute_error():
    spec = SweepSpec(
        swept_variable="omega0",
        values=[250.0],
        trials=1,
        base=noiseless_config(2048).model_copy(update={"noise_power": 0.5}),
        estimator=EstimatorSettings(n_batches=2, clutter_order=8),
    )
    outcome = run_sweep(spec, threads=1)
    assert list(outcome.table["method"]) == ["baseline2d", "separable"]
    for row in outcome.table.itertuples():
        trial = outcome.trials[outcome.trials["method"] == row.method].iloc[0]
        assert row.trials == 1
        assert row.tau_rmse == pytest.approx(abs(trial["tau_err"]))
        assert row.omega_rmse == pytest.approx(abs(trial["omega_err"]))


def test_threads_do_not_change_results():
    spec = SweepSpec(
        swept_variable="omega0",
        values=[100.0, 300.0],
        trials=3,
        base=noiseless_config(2048).model_copy(update={"noise_power": 0.5}),
        estimator=EstimatorSettings(n_batches=2, clutter_order=8),
    )
    serial = run_sweep(spec, threads=1).table
    threaded = run_sweep(spec, threads=3).table
    pd.testing.assert_frame_equal(serial, threaded)


def test_seeds_are_shared_across_swept_values():
    assert trial_seeds(2025, 5) == trial_seeds(2025, 5)
    assert trial_seeds(2025, 5) != trial_seeds(2026, 5)
    assert len(set(trial_seeds(2025, 100))) == 100


def test_batch_sweep_holds_the_batch_size():
    spec = SweepSpec(
        swept_variable="M",
        values=[2, 8],
        trials=1,
        base=noiseless_config(1024),
        batch_size=512,
    )
    cfg, estimator = point_setup(spec, 8)
    assert cfg.n_samples == 8 * 512
    assert estimator.n_batches == 8


def test_doppler_sweep_holds_the_record():
    spec = SweepSpec(swept_variable="omega0", values=[50.0], base=noiseless_config(4096))
    cfg, estimator = point_setup(spec, 50.0)
    assert cfg.n_samples == 4096
    assert math.isclose(cfg.target_doppler, 50.0)
    assert estimator is spec.estimator


def test_batch_sweep_needs_a_batch_size():
    with pytest.raises(ValidationError):
        SweepSpec(swept_variable="M", values=[2, 4], base=noiseless_config(1024))


def test_doppler_curves_share_the_longest_batch_limit():
    spec = SweepSpec(
        swept_variable="omega0",
        values=[50.0],
        base=noiseless_config(4096),
        estimator=EstimatorSettings(clutter_order=8),
        batch_counts=[2, 8],
    )
    assert curve_batch_counts(spec) == [2, 8]
    limit = math.pi / (2048 * 4e-8)
    assert shared_doppler_span(spec) == pytest.approx(limit)
    for m in (2, 8):
        cfg, estimator = point_setup(spec, 50.0, m)
        assert cfg.n_samples == 4096
        assert estimator.n_batches == m
        assert estimator.doppler_span == pytest.approx(limit)


def test_explicit_doppler_span_wins():
    spec = SweepSpec(
        swept_variable="omega0",
        values=[50.0],
        base=noiseless_config(4096),
        estimator=EstimatorSettings(clutter_order=8, doppler_span=1000.0),
        batch_counts=[2, 8],
    )
    _, estimator = point_setup(spec, 50.0, 8)
    assert estimator.doppler_span == 1000.0


def test_doppler_sweep_reports_a_curve_per_batch_count():
    spec = SweepSpec(
        swept_variable="omega0",
        values=[250.0],
        trials=1,
        base=noiseless_config(4096).model_copy(update={"noise_power": 0.5}),
        estimator=EstimatorSettings(clutter_order=8),
        batch_counts=[2, 4],
    )
    outcome = run_sweep(spec, threads=2)
    assert list(outcome.table["n_batches"]) == [2, 2, 4, 4]
    assert list(outcome.table["method"]) == ["baseline2d", "separable"] * 2
    assert sorted(outcome.trials["n_batches"].unique()) == [2, 4]


def test_batch_counts_belong_to_doppler_sweeps():
    with pytest.raises(ValidationError):
        SweepSpec(swept_variable="M", values=[2], base=noiseless_config(1024), batch_size=512, batch_counts=[2])
    with pytest.raises(ValidationError):
        SweepSpec(swept_variable="omega0", values=[50.0], base=noiseless_config(1024), batch_counts=[0])
