import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.linalg import toeplitz

from sepradar.config import get_settings
from sepradar.exceptions import InvalidArgumentError
from sepradar.scene.service import NodeSignals
from sepradar.scene.waveform import ComplexSeries, delay_samples

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Batch:
    """
    Batch m (1-based) of Q surveillance samples and its reference window.

    `window` holds the reference samples n = q_offset - L .. q_offset + Q - 1,
    the generating sequence of both x_m and the Q x L Toeplitz clutter
    matrix X_m. `reference` is the whole node reference, shared by all
    batches, for delays that reach outside the window.
    """

    index: int
    y: np.ndarray
    window: np.ndarray
    q_offset: int
    clutter_order: int
    reference: ComplexSeries

    @property
    def size(self) -> int:
        return self.y.size

    @property
    def dt(self) -> float:
        return self.reference.dt

    @property
    def x(self) -> np.ndarray:
        return self.window[self.clutter_order:]

    @property
    def pre_roll(self) -> int:
        return int(round(-self.reference.t0 / self.reference.dt))

    def clutter_matrix(self) -> np.ndarray:
        """X_m[q, l-1] = x((m-1)Q + q - l), l = 1..L."""
        lag = self.clutter_order
        if lag == 0:
            return np.zeros((self.size, 0), dtype=np.complex128)
        first_col = self.window[lag - 1:lag - 1 + self.size]
        first_row = self.window[lag - 1::-1]
        return toeplitz(first_col, first_row)

    def interference_matrix(self) -> np.ndarray:
        """X_I = [x_m, X_m]: direct path plus clutter lags."""
        return np.column_stack([self.x, self.clutter_matrix()])


def make_batches(node: NodeSignals, n_batches: int, clutter_order: int) -> List[Batch]:
    """Split the record into M non-overlapping batches of Q = floor(N/M) samples."""
    if n_batches < 1:
        raise InvalidArgumentError(f"Need at least one batch, got M={n_batches}")
    n = node.n_samples
    q = n // n_batches
    if clutter_order < 0 or clutter_order >= q - 1:
        raise InvalidArgumentError(
            f"Clutter order L={clutter_order} must satisfy L < Q-1 with Q={q}"
        )
    if node.pre_roll < clutter_order:
        raise InvalidArgumentError(
            f"Reference has {node.pre_roll} pre-roll samples, L={clutter_order} are required"
        )

    discarded = n - n_batches * q
    if discarded:
        logger.info("Discarding %d trailing samples (N=%d, M=%d, Q=%d)", discarded, n, n_batches, q)

    ref = node.reference.samples
    y = node.surveillance.samples
    batches = []
    for m in range(1, n_batches + 1):
        offset = (m - 1) * q
        start = offset - clutter_order + node.pre_roll
        window = ref[start:start + q + clutter_order]
        batches.append(
            Batch(
                index=m,
                y=y[offset:offset + q],
                window=window,
                q_offset=offset,
                clutter_order=clutter_order,
                reference=node.reference,
            )
        )
    return batches


def delayed_reference(batch: Batch, tau: float) -> np.ndarray:
    """
    x_m(tau): the node reference delayed by `tau`, windowed to batch m.

    Uses the same interpolation as the scene simulator on the reference
    stream, so tau = l*dt returns column l of X_m exactly.
    """
    settings = get_settings()
    half_width = settings.interp_half_width
    limit = (batch.clutter_order + half_width) * batch.dt
    if not (0 <= tau <= limit * (1 + 1e-9)):
        raise InvalidArgumentError(
            f"Delay {tau} s outside the reference support [0, {limit}] s"
        )

    shift = tau / batch.dt
    ref = batch.reference.samples
    out_lo = batch.pre_roll + batch.q_offset
    out_hi = out_lo + batch.size
    lo = max(0, out_lo - math.floor(shift) - half_width - 1)
    hi = min(ref.size, max(out_hi, out_hi - math.floor(shift) + half_width + 1))
    delayed = delay_samples(ref[lo:hi], shift, half_width, settings.kaiser_beta)
    return delayed[out_lo - lo:out_hi - lo]
