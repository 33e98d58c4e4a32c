import numpy as np
import pytest

from sepradar.config import get_settings
from sepradar.processing.batching import make_batches
from sepradar.processing.projection import build_basis
from sepradar.schemas import ClutterTap, ComplexPair, SceneConfig
from sepradar.scene.service import synthesize_node
from sepradar.scene.waveform import generate_waveform

DT = 4e-8


def noiseless_config(
    n_samples: int,
    clutter_order: int = 8,
    target_delay: float = 5 * DT,
    target_doppler: float = 250.0,
    seed: int = 7,
    target_amp: complex = 1.0,
) -> SceneConfig:
    rng = np.random.default_rng(1234)
    taps = (rng.standard_normal(clutter_order) + 1j * rng.standard_normal(clutter_order)) * 0.5
    return SceneConfig(
        n_samples=n_samples,
        dt=DT,
        dpi_amp=ComplexPair(re=10.0, im=-3.0),
        clutter_taps=[ClutterTap(lag=l + 1, re=c.real, im=c.imag) for l, c in enumerate(taps)],
        target_amp=ComplexPair.of(target_amp),
        target_delay=target_delay,
        target_doppler=target_doppler,
        noise_power=0.0,
        seed=seed,
    )


def node_for(cfg: SceneConfig, pre_roll: int):
    pre_roll = max(pre_roll, cfg.max_lag)
    waveform = generate_waveform(cfg.n_samples + pre_roll, cfg.seed, cfg.dt, -pre_roll * cfg.dt)
    return synthesize_node(cfg, waveform, pre_roll)


def batches_for(cfg: SceneConfig, n_batches: int, clutter_order: int):
    node = node_for(cfg, clutter_order)
    batches = make_batches(node, n_batches, clutter_order)
    return batches, [build_basis(batch) for batch in batches]


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20251018)


@pytest.fixture
def noiseless_scene():
    """Q=1024, M=4, L=8 noiseless scene with DPI, clutter and a target at 5 dt, 250 rad/s."""
    cfg = noiseless_config(4 * 1024)
    batches, bases = batches_for(cfg, 4, 8)
    return cfg, batches, bases
