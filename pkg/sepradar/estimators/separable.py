"""
Separable delay / Doppler estimation for slowly moving targets.

With |omega dt| << 1/Q the Doppler ramp is linearized, e^{jq omega dt} ~ 1 + jq omega dt,
and the zeroth-order term is cancelled by the clutter projection when the
target sits inside the clutter span. What remains,

    |x_m(tau)^H D P y_m|^2 / (x_m(tau)^H D P D x_m(tau)),   D = diag(0..Q-1),

no longer depends on omega, so the delay is found by a 1-D search. The
unnormalized amplitudes x_m(tau_hat)^H D P y_m then rotate by Q omega dt
from batch to batch and a line fit to their unwrapped phases gives omega.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial

from sepradar.config import get_settings
from sepradar.estimators.utils import CriterionPoint, check_pairing, projected_data, projected_ratio
from sepradar.exceptions import InsufficientDataError, InvalidArgumentError, NoTargetSignalError
from sepradar.processing.batching import Batch, delayed_reference
from sepradar.processing.projection import ProjectionBasis, project_out
from sepradar.schemas import Flag

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DelayProfile:
    tau_grid: np.ndarray
    values: np.ndarray
    degenerate_points: int = 0

    @property
    def step(self) -> float:
        return float(self.tau_grid[1] - self.tau_grid[0]) if self.tau_grid.size > 1 else 0.0

    def argmax(self) -> float:
        return float(self.tau_grid[int(np.argmax(self.values))])


@dataclass(frozen=True)
class AmplitudeSequence:
    d_tilde: np.ndarray
    phases_unwrapped: np.ndarray
    reliable: np.ndarray

    @property
    def batch_numbers(self) -> np.ndarray:
        """Regression abscissa m = 1..M."""
        return np.arange(1, self.d_tilde.size + 1)


@dataclass(frozen=True)
class PhaseLine:
    slope: float
    intercept: float


@dataclass(frozen=True)
class SeparableEstimate:
    tau_hat: float
    omega_hat: float
    profile: DelayProfile
    sequence: AmplitudeSequence
    line: PhaseLine
    flags: List[Flag] = field(default_factory=list)


def ramp(size: int) -> np.ndarray:
    return np.arange(size, dtype=float)


def _check_delay(batch: Batch, tau: float) -> None:
    span = batch.clutter_order * batch.dt
    if not (0 < tau <= span * (1 + 1e-9)):
        raise InvalidArgumentError(f"Delay {tau} s outside the clutter span (0, {span}] s")


def delay_criterion_point(
    batch: Batch,
    basis: ProjectionBasis,
    tau: float,
    projected_y: Optional[np.ndarray] = None,
) -> CriterionPoint:
    _check_delay(batch, tau)
    if projected_y is None:
        projected_y = project_out(basis, batch.y)
    weighted = ramp(batch.size) * delayed_reference(batch, tau)
    values, degenerate = projected_ratio(weighted, basis, projected_y)
    return CriterionPoint(float(values[0]), bool(degenerate[0]))


def _profile(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    projected: Sequence[np.ndarray],
    tau_grid: np.ndarray,
) -> DelayProfile:
    values = np.zeros(tau_grid.size)
    degenerate_points = 0
    for batch, basis, py in zip(batches, bases, projected):
        d = ramp(batch.size)
        weighted = np.column_stack([d * delayed_reference(batch, float(tau)) for tau in tau_grid])
        row, degenerate = projected_ratio(weighted, basis, py)
        values += row
        degenerate_points += int(np.count_nonzero(degenerate))
    return DelayProfile(tau_grid, values, degenerate_points)


def delay_profile(
    batches: Sequence[Batch], bases: Sequence[ProjectionBasis], tau_grid: Sequence[float]
) -> DelayProfile:
    """Delay criterion summed over batches on an arbitrary grid inside the clutter span."""
    check_pairing(batches, bases)
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size == 0:
        raise InvalidArgumentError("Delay grid must be non-empty")
    for tau in tau_grid:
        _check_delay(batches[0], float(tau))
    return _profile(batches, bases, projected_data(batches, bases), tau_grid)


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    count = int(math.floor((stop - start) / step + 1e-9))
    return start + np.arange(count + 1) * step


def estimate_delay(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    coarse_step: float,
    fine_step: float,
) -> Tuple[float, DelayProfile]:
    """
    Coarse scan of [dt, L dt], then a fine scan of +-coarse_step around the
    coarse maximum. tau = 0 is left out: there the weighted reference
    collapses onto the direct-path column.

    Returns the fine maximizer and the coarse profile (what a node transmits).
    """
    check_pairing(batches, bases)
    if not coarse_step >= fine_step > 0:
        raise InvalidArgumentError(f"Need coarse_step >= fine_step > 0, got {coarse_step}, {fine_step}")
    batch = batches[0]
    dt, span = batch.dt, batch.clutter_order * batch.dt
    coarse_grid = _grid(dt, span, coarse_step)
    if coarse_grid.size == 0:
        raise InvalidArgumentError(f"Clutter span {span} s holds no delay on the [dt, L dt] grid")
    projected = projected_data(batches, bases)

    coarse = _profile(batches, bases, projected, coarse_grid)
    # Rounding residue of the cancelled interference is not a target
    floor = get_settings().degenerate_rtol * sum(float(np.vdot(b.y, b.y).real) for b in batches)
    if coarse.degenerate_points == coarse.values.size * len(batches) or not np.any(coarse.values > floor):
        raise NoTargetSignalError("Delay profile is degenerate everywhere; no target signal left after cancellation")
    centre = coarse.argmax()

    lo = max(dt, centre - coarse_step)
    hi = min(span, centre + coarse_step)
    # Anchor the fine grid on the coarse maximum so it is always revisited
    fine_grid = centre + fine_step * np.arange(
        -int(math.floor((centre - lo) / fine_step + 1e-9)),
        int(math.floor((hi - centre) / fine_step + 1e-9)) + 1,
    )
    fine = _profile(batches, bases, projected, fine_grid)
    tau_hat = fine.argmax()
    logger.debug("Delay estimate %.6g s (coarse maximum %.6g s)", tau_hat, centre)
    return tau_hat, coarse


def amplitude_sequence(
    batches: Sequence[Batch], bases: Sequence[ProjectionBasis], tau_hat: float
) -> AmplitudeSequence:
    """d~_m = x_m(tau_hat)^H D P y_m, with phases unwrapped over the reliable batches."""
    check_pairing(batches, bases)
    d_tilde = np.zeros(len(batches), dtype=np.complex128)
    reliable = np.ones(len(batches), dtype=bool)
    for k, (batch, basis) in enumerate(zip(batches, bases)):
        _check_delay(batch, tau_hat)
        weighted = ramp(batch.size) * delayed_reference(batch, tau_hat)
        d_tilde[k] = np.vdot(project_out(basis, weighted), project_out(basis, batch.y))
        floor = get_settings().degenerate_rtol * np.linalg.norm(batch.y) * np.linalg.norm(weighted)
        reliable[k] = abs(d_tilde[k]) > floor

    phases = np.angle(d_tilde)
    if reliable.any():
        phases[reliable] = np.unwrap(phases[reliable])
    if not reliable.all():
        logger.warning("%d of %d batch amplitudes too small for a phase", np.count_nonzero(~reliable), reliable.size)
    return AmplitudeSequence(d_tilde=d_tilde, phases_unwrapped=phases, reliable=reliable)


def fit_phase_line(seq: AmplitudeSequence) -> PhaseLine:
    """Ordinary least-squares line through the reliable unwrapped phases against m = 1..M."""
    if np.count_nonzero(seq.reliable) < 2:
        raise InsufficientDataError(
            f"Phase regression needs 2 reliable batches, got {np.count_nonzero(seq.reliable)}"
        )
    intercept, slope = polynomial.polyfit(
        seq.batch_numbers[seq.reliable], seq.phases_unwrapped[seq.reliable], 1
    )
    return PhaseLine(slope=float(slope), intercept=float(intercept))


def tretter_doppler(seq: AmplitudeSequence, dt: float, batch_size: int) -> float:
    """omega = slope / (Q dt): the fitted phase step per batch is Q omega dt."""
    line = fit_phase_line(seq)
    return line.slope / dt / batch_size


def estimate_separable(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    coarse_step: Optional[float] = None,
    fine_step: Optional[float] = None,
) -> SeparableEstimate:
    """1-D delay search followed by the phase-regression Doppler."""
    settings = get_settings()
    batch = batches[0]
    coarse_step = batch.dt / settings.coarse_divisor if coarse_step is None else coarse_step
    fine_step = batch.dt / settings.fine_divisor if fine_step is None else fine_step

    tau_hat, profile = estimate_delay(batches, bases, coarse_step, fine_step)
    seq = amplitude_sequence(batches, bases, tau_hat)
    line = fit_phase_line(seq)
    omega_hat = tretter_doppler(seq, batch.dt, batch.size)

    flags = []
    if profile.degenerate_points:
        flags.append(Flag.DEGENERATE_POINTS)
    if not seq.reliable.all():
        flags.append(Flag.UNRELIABLE_PHASE)
    if abs(omega_hat * batch.dt * batch.size) > settings.approximation_limit:
        logger.warning(
            "Doppler %.4g rad/s strains the first-order model (|omega dt Q| = %.3g)",
            omega_hat, abs(omega_hat * batch.dt * batch.size),
        )
        flags.append(Flag.APPROXIMATION_STRAINED)
    return SeparableEstimate(tau_hat, omega_hat, profile, seq, line, flags)
