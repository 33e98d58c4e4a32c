import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from sepradar.config import get_settings
from sepradar.exceptions import InvalidArgumentError
from sepradar.schemas import ClutterTap, ComplexPair, SceneConfig
from sepradar.scene.waveform import (
    AMPLITUDE_STREAM,
    NOISE_STREAM,
    TARGET_STREAM,
    ComplexSeries,
    fractional_delay,
    seed_stream,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeSignals:
    """Reference x (with L pre-roll samples, t0 = -L*dt) and surveillance y (t0 = 0)."""

    reference: ComplexSeries
    surveillance: ComplexSeries

    @property
    def pre_roll(self) -> int:
        return int(round(-self.reference.t0 / self.reference.dt))

    @property
    def n_samples(self) -> int:
        return len(self.surveillance)

    @property
    def dt(self) -> float:
        return self.surveillance.dt


def complex_noise(rng: np.random.Generator, n: int, power: float) -> np.ndarray:
    return math.sqrt(power / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def synthesize_node(cfg: SceneConfig, waveform: ComplexSeries, pre_roll: int = 0) -> NodeSignals:
    """
    Surveillance channel of one receiver node:

        y[n] = b x[n] + sum_l c_l x[n - l] + d x(t_n - tau0) exp(j w0 t_n) + e[n]

    The first N + L waveform samples become the reference channel, the
    first L of them being the pre-roll before the surveillance record starts.
    L is the longest clutter lag, or `pre_roll` when that is larger.
    """
    n, lag = cfg.n_samples, max(cfg.max_lag, pre_roll)
    if len(waveform) < n + lag:
        raise InvalidArgumentError(
            f"Waveform has {len(waveform)} samples, the scene needs N + L = {n + lag}"
        )
    reference = ComplexSeries(waveform.samples[:n + lag], cfg.dt, -lag * cfg.dt)
    x = reference.samples

    y = cfg.dpi_amp.value * x[lag:lag + n]
    for tap in cfg.clutter_taps:
        y = y + tap.coeff * x[lag - tap.lag:lag - tap.lag + n]

    d = cfg.target_amp.value
    if d != 0:
        delayed = fractional_delay(reference, cfg.target_delay).samples[lag:]
        t = np.arange(n) * cfg.dt
        y = y + d * delayed * np.exp(1j * cfg.target_doppler * t)

    if cfg.noise_power > 0:
        y = y + complex_noise(seed_stream(cfg.seed, NOISE_STREAM), n, cfg.noise_power)

    return NodeSignals(reference=reference, surveillance=ComplexSeries(y, cfg.dt, 0.0))


def synthesize_network(
    cfgs: Sequence[SceneConfig], waveform: ComplexSeries, pre_roll: int = 0
) -> List[NodeSignals]:
    """One shared illuminator waveform observed by several receiver nodes."""
    if len({(cfg.n_samples, cfg.dt) for cfg in cfgs}) > 1:
        raise InvalidArgumentError("All nodes must share n_samples and dt")
    return [synthesize_node(cfg, waveform, pre_roll) for cfg in cfgs]


def build_scene_config(
    n_samples: int,
    dt: float,
    clutter_order: int,
    target_delay: float,
    target_doppler: float,
    seed: int,
    dnr_db: Optional[float] = None,
    cnr_db: Optional[float] = None,
    tnr_db: Optional[float] = None,
    noise_power: Optional[float] = None,
) -> SceneConfig:
    """
    Scene from power ratios relative to the noise: DPI-, clutter- and
    target-to-noise in dB. Clutter taps 1..L share the clutter power
    equally in expectation; all amplitudes are drawn once from `seed`.
    """
    settings = get_settings()
    dnr_db = settings.dnr_db if dnr_db is None else dnr_db
    cnr_db = settings.cnr_db if cnr_db is None else cnr_db
    tnr_db = settings.tnr_db if tnr_db is None else tnr_db
    noise_power = settings.noise_power if noise_power is None else noise_power
    # Ratios stay meaningful with a noiseless scene by referencing unit power
    ref_power = noise_power if noise_power > 0 else 1.0

    rng = seed_stream(seed, AMPLITUDE_STREAM)
    dpi = math.sqrt(ref_power * 10 ** (dnr_db / 10)) * np.exp(2j * np.pi * rng.random())
    taps = complex_noise(rng, clutter_order, ref_power * 10 ** (cnr_db / 10) / max(clutter_order, 1))
    target = math.sqrt(ref_power * 10 ** (tnr_db / 10)) * np.exp(2j * np.pi * rng.random())

    return SceneConfig(
        n_samples=n_samples,
        dt=dt,
        dpi_amp=ComplexPair.of(dpi),
        clutter_taps=[ClutterTap(lag=l + 1, re=c.real, im=c.imag) for l, c in enumerate(taps)],
        target_amp=ComplexPair.of(target),
        target_delay=target_delay,
        target_doppler=target_doppler,
        noise_power=noise_power,
        seed=seed,
    )


def draw_target_delay(seed: int, clutter_order: int, dt: float, fractional: bool = False) -> float:
    """
    Target delay drawn once from `seed`, uniform over the clutter span (0, L dt].

    By default the draw is over the lags 1..L. A fractional delay of a white
    waveform is not in the span of the integer-lag clutter columns, so part
    of the target survives cancellation at zeroth order; `fractional=True`
    draws from the continuum and keeps that residue.
    """
    if clutter_order < 1:
        raise InvalidArgumentError(f"A target inside the clutter span needs L >= 1, got {clutter_order}")
    rng = seed_stream(seed, TARGET_STREAM)
    if fractional:
        return float((1.0 - rng.random()) * clutter_order * dt)
    return float(rng.integers(1, clutter_order + 1)) * dt
