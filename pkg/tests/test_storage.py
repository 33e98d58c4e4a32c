import json
import os

import numpy as np
import pytest

from sepradar.estimators.baseline2d import aggregate_surface
from sepradar.estimators.separable import delay_profile
from sepradar.exceptions import InvalidArgumentError
from sepradar.harness import storage
from sepradar.scene.waveform import ComplexSeries, generate_waveform
from tests.conftest import DT, node_for, noiseless_config


def test_signal_file_layout(tmp_path):
    series = generate_waveform(100, seed=4, dt=DT, t0=-8 * DT)
    path = str(tmp_path / "reference.bin")
    storage.write_signal(series, path)

    raw = np.fromfile(path, dtype="<f8")
    assert raw.size == 200
    np.testing.assert_array_equal(raw[0::2], series.samples.real)
    np.testing.assert_array_equal(raw[1::2], series.samples.imag)
    with open(tmp_path / "reference.json") as f:
        assert json.load(f) == {"dt": DT, "t0": -8 * DT, "length": 100}

    back = storage.read_signal(path)
    np.testing.assert_array_equal(back.samples, series.samples)
    assert (back.dt, back.t0) == (series.dt, series.t0)


def test_truncated_signal_file_is_rejected(tmp_path):
    path = str(tmp_path / "y.bin")
    storage.write_signal(ComplexSeries(np.ones(10), DT), path)
    with open(path, "r+b") as f:
        f.truncate(16 * 9)
    with pytest.raises(InvalidArgumentError):
        storage.read_signal(path)


def test_node_directory(tmp_path):
    signals = node_for(noiseless_config(512), 8)
    storage.write_node(signals, str(tmp_path))
    back = storage.read_node(str(tmp_path))
    assert back.pre_roll == signals.pre_roll == 8
    np.testing.assert_array_equal(back.surveillance.samples, signals.surveillance.samples)


def test_statistic_csv_files(tmp_path, noiseless_scene):
    _, batches, bases = noiseless_scene
    tau_grid = np.arange(1, 9) * DT
    profile = delay_profile(batches, bases, tau_grid)
    surface = aggregate_surface(batches, bases, tau_grid, [-250.0, 0.0, 250.0])

    storage.write_stat_csv(profile, str(tmp_path / "profile.csv"))
    storage.write_stat_csv(surface, str(tmp_path / "surface.csv"))
    with open(tmp_path / "profile.csv") as f:
        assert f.readline().strip() == "tau_s,value"

    p = storage.read_profile_csv(str(tmp_path / "profile.csv"))
    np.testing.assert_allclose(p.values, profile.values, rtol=1e-11)
    s = storage.read_surface_csv(str(tmp_path / "surface.csv"))
    assert s.values.shape == (8, 3)
    np.testing.assert_allclose(s.values, surface.values, rtol=1e-11)
    with pytest.raises(InvalidArgumentError):
        storage.read_profile_csv(str(tmp_path / "surface.csv"))


def test_profile_costs_a_doppler_grid_less_to_send(noiseless_scene):
    _, batches, bases = noiseless_scene
    tau_grid = np.arange(1, 17) * DT / 2
    omega_grid = np.linspace(-2000.0, 2000.0, 33)
    profile = delay_profile(batches, bases, tau_grid)
    surface = aggregate_surface(batches, bases, tau_grid, omega_grid)

    sent_profile = storage.transmission_bytes(profile)
    sent_surface = storage.transmission_bytes(surface)
    assert sent_profile["payload"] == tau_grid.size * 8
    assert sent_surface["payload"] == sent_profile["payload"] * omega_grid.size
    assert sent_surface["csv"] >= sent_profile["csv"] * omega_grid.size
    assert os.path.basename(storage.sidecar_path("/a/b/x.bin")) == "x.json"
