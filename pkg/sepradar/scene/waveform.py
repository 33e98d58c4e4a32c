"""
Complex baseband series, the noise-like illuminator waveform and the
band-limited fractional delay shared by the simulator and the estimators.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import i0

from sepradar.config import get_settings
from sepradar.exceptions import InvalidArgumentError

# Independent sub-streams derived from one integer seed
WAVEFORM_STREAM = 0
NOISE_STREAM = 1
AMPLITUDE_STREAM = 2
TRIAL_STREAM = 3
TARGET_STREAM = 4

# Fractional parts closer than this to an integer take the exact shift path
INTEGER_SHIFT_TOL = 1e-9


def seed_stream(seed: int, stream: int) -> np.random.Generator:
    """Generator for one purpose-keyed sub-stream of `seed`."""
    if seed < 0:
        raise InvalidArgumentError(f"Seeds must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


@dataclass(frozen=True)
class ComplexSeries:
    """Uniformly sampled complex signal; sample n sits at t0 + n*dt."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128).ravel()
        if samples.size < 1:
            raise InvalidArgumentError("A series needs at least one sample")
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {self.dt}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt

    def window(self, start: int, stop: int) -> "ComplexSeries":
        """Sample-index window [start, stop) keeping the time stamps."""
        if not 0 <= start < stop <= len(self):
            raise InvalidArgumentError(f"Window [{start}, {stop}) outside series of length {len(self)}")
        return ComplexSeries(self.samples[start:stop], self.dt, self.t0 + start * self.dt)


def generate_waveform(n_samples: int, seed: int, dt: float = 1.0, t0: float = 0.0) -> ComplexSeries:
    """Circularly-symmetric white Gaussian noise with unit power per sample."""
    if n_samples < 1:
        raise InvalidArgumentError(f"n_samples must be at least 1, got {n_samples}")
    rng = seed_stream(seed, WAVEFORM_STREAM)
    samples = (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)) / math.sqrt(2.0)
    return ComplexSeries(samples, dt, t0)


@lru_cache(maxsize=512)
def interpolation_kernel(frac: float, half_width: int, beta: float) -> np.ndarray:
    """
    Kaiser-windowed sinc taps for a delay of `frac` samples, 0 < frac < 1.

    Tap k (k = -half_width+1 .. half_width) multiplies x[n - k] when
    producing the sample delayed by `frac`.
    """
    k = np.arange(-half_width + 1, half_width + 1, dtype=float)
    t = k - frac
    ratio = np.clip(t / half_width, -1.0, 1.0)
    window = i0(beta * np.sqrt(1.0 - ratio ** 2)) / i0(beta)
    taps = np.sinc(t) * window
    # Unit DC gain
    taps /= taps.sum()
    taps.setflags(write=False)
    return taps


def delay_samples(samples: np.ndarray, shift: float, half_width: int, beta: float) -> np.ndarray:
    """
    Delay a sample array by `shift` samples (y[n] ~ x[n - shift]).

    Integer shifts move samples exactly and zero-fill. Fractional shifts use
    the windowed-sinc kernel; output samples whose kernel runs off the array
    are computed from the available taps, renormalized to unit DC gain.
    """
    n = samples.size
    whole = math.floor(shift)
    frac = shift - whole
    if frac > 1.0 - INTEGER_SHIFT_TOL:
        whole, frac = whole + 1, 0.0

    out = np.zeros(n, dtype=np.complex128)
    if frac < INTEGER_SHIFT_TOL:
        if whole >= n or whole <= -n:
            return out
        if whole >= 0:
            out[whole:] = samples[:n - whole]
        else:
            out[:n + whole] = samples[-whole:]
        return out

    taps = interpolation_kernel(frac, half_width, beta)
    full = np.convolve(samples, taps)
    i = np.arange(n)
    # Taps k in [k_lo, k_hi] read samples that exist
    k_lo = np.maximum(i - whole - n + 1, -half_width + 1)
    k_hi = np.minimum(i - whole, half_width)
    valid = k_lo <= k_hi
    out[valid] = full[i[valid] - whole + half_width - 1]

    # Edge samples: renormalize by the kernel mass that actually landed on data
    partial = valid & ((k_lo > -half_width + 1) | (k_hi < half_width))
    if partial.any():
        csum = np.concatenate(([0.0], np.cumsum(taps)))
        mass = csum[k_hi[partial] + half_width] - csum[k_lo[partial] + half_width - 1]
        total = csum[-1]
        usable = np.abs(mass) > 1e-3 * abs(total)
        scaled = np.zeros(mass.size, dtype=np.complex128)
        scaled[usable] = out[partial][usable] * (total / mass[usable])
        out[partial] = scaled
    return out


def fractional_delay(x: ComplexSeries, tau: float) -> ComplexSeries:
    """Band-limited x(t - tau) on the same sampling grid as `x`."""
    if not abs(tau) < len(x) * x.dt:
        raise InvalidArgumentError(f"Delay {tau} s exceeds the series span {len(x) * x.dt} s")
    settings = get_settings()
    delayed = delay_samples(x.samples, tau / x.dt, settings.interp_half_width, settings.kaiser_beta)
    return ComplexSeries(delayed, x.dt, x.t0)
