"""
Baseline estimator: interference-cleaned 2-D delay-Doppler ambiguity per
batch, summed incoherently over batches, grid search plus Nelder-Mead
refinement.

The projector does not commute with the Doppler ramp, so every (tau, omega)
point projects its own steering vector.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from sepradar.config import get_settings
from sepradar.estimators.utils import (
    CriterionPoint,
    check_pairing,
    doppler_matrix,
    doppler_vector,
    projected_data,
    projected_ratio,
)
from sepradar.exceptions import InvalidArgumentError
from sepradar.processing.batching import Batch, delayed_reference
from sepradar.processing.projection import ProjectionBasis, project_out
from sepradar.schemas import Flag

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AmbiguitySurface:
    tau_grid: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray
    degenerate_points: int = 0

    def argmax(self) -> Tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.tau_grid[i]), float(self.omega_grid[j])


@dataclass(frozen=True)
class SearchBox:
    tau_min: float
    tau_max: float
    omega_min: float
    omega_max: float

    def __post_init__(self):
        bounds = (self.tau_min, self.tau_max, self.omega_min, self.omega_max)
        if not all(math.isfinite(b) for b in bounds):
            raise InvalidArgumentError("Search box bounds must be finite")
        if self.tau_min > self.tau_max or self.omega_min > self.omega_max:
            raise InvalidArgumentError("Search box bounds are inverted")

    def contains(self, tau: float, omega: float) -> bool:
        return self.tau_min <= tau <= self.tau_max and self.omega_min <= omega <= self.omega_max


@dataclass(frozen=True)
class Estimate2D:
    tau_hat: float
    omega_hat: float
    peak_value: float
    refine_iterations: int
    converged: bool = True
    degenerate_points: int = 0
    flags: List[Flag] = field(default_factory=list)


def steering_vector(batch: Batch, tau: float, omega: float) -> np.ndarray:
    """x_m(tau) (.) v(omega)."""
    return delayed_reference(batch, tau) * doppler_vector(batch.size, omega, batch.dt)


def ambiguity_point(
    batch: Batch,
    basis: ProjectionBasis,
    tau: float,
    omega: float,
    projected_y: Optional[np.ndarray] = None,
) -> CriterionPoint:
    """P_m(tau, omega) = |a^H P y|^2 / (a^H P a) with P the interference-complement projector."""
    if projected_y is None:
        projected_y = project_out(basis, batch.y)
    values, degenerate = projected_ratio(steering_vector(batch, tau, omega), basis, projected_y)
    return CriterionPoint(float(values[0]), bool(degenerate[0]))


def _surface_rows(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    projected: Sequence[np.ndarray],
    tau_grid: np.ndarray,
    omega_grid: np.ndarray,
) -> Tuple[np.ndarray, int]:
    values = np.zeros((tau_grid.size, omega_grid.size))
    degenerate_points = 0
    ramps = {}
    for batch, basis, py in zip(batches, bases, projected):
        ramp = ramps.get(batch.size)
        if ramp is None:
            ramp = ramps[batch.size] = doppler_matrix(batch.size, omega_grid, batch.dt)
        for i, tau in enumerate(tau_grid):
            steering = delayed_reference(batch, float(tau))[:, None] * ramp
            row, degenerate = projected_ratio(steering, basis, py)
            values[i] += row
            degenerate_points += int(np.count_nonzero(degenerate))
    return values, degenerate_points


def aggregate_surface(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    tau_grid: Sequence[float],
    omega_grid: Sequence[float],
) -> AmbiguitySurface:
    """Sum over batches of P_m on the (tau, omega) grid; batches combine incoherently."""
    check_pairing(batches, bases)
    tau_grid = np.asarray(tau_grid, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    if tau_grid.size == 0 or omega_grid.size == 0:
        raise InvalidArgumentError("Delay and Doppler grids must be non-empty")
    values, degenerate_points = _surface_rows(
        batches, bases, projected_data(batches, bases), tau_grid, omega_grid
    )
    return AmbiguitySurface(tau_grid, omega_grid, values, degenerate_points)


def doppler_limit(batch: Batch) -> float:
    """Largest |omega| whose batch-to-batch phase step stays within (-pi, pi]."""
    return math.pi / (batch.size * batch.dt)


def default_grids(batches: Sequence[Batch], doppler_span: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """tau in [0, L dt] at dt/2; omega over +-span at a resolution cell / 8."""
    settings = get_settings()
    batch = batches[0]
    tau_step = batch.dt / settings.tau_grid_divisor
    n_tau = batch.clutter_order * settings.tau_grid_divisor
    tau_grid = np.arange(n_tau + 1) * tau_step

    span = doppler_limit(batch) if doppler_span is None else doppler_span
    omega_step = 2 * math.pi / (batch.size * batch.dt * settings.doppler_oversample)
    n_omega = int(math.floor(span / omega_step + 1e-9))
    omega_grid = np.arange(-n_omega, n_omega + 1) * omega_step
    return tau_grid, omega_grid


def default_search_box(batches: Sequence[Batch], doppler_span: Optional[float] = None) -> SearchBox:
    batch = batches[0]
    span = doppler_limit(batch) if doppler_span is None else doppler_span
    return SearchBox(0.0, batch.clutter_order * batch.dt, -span, span)


def estimate_2d(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    search_box: SearchBox,
    init: Optional[Tuple[float, float]] = None,
) -> Estimate2D:
    """
    Maximize the aggregated ambiguity with Nelder-Mead.

    With `init` the simplex starts there; otherwise at the argmax of the
    default coarse grid clipped to the box. The search runs in units of
    (dt, 2 pi / (N dt)) and stops when the simplex is smaller than
    `nm_xatol` in both.
    """
    check_pairing(batches, bases)
    settings = get_settings()
    batch = batches[0]
    dt, q = batch.dt, batch.size
    n_total = q * len(batches)
    omega_unit = 2 * math.pi / (n_total * dt)
    projected = projected_data(batches, bases)
    degenerate_points = 0

    if init is None:
        tau_grid, omega_grid = default_grids(batches)
        tau_grid = tau_grid[(tau_grid >= search_box.tau_min) & (tau_grid <= search_box.tau_max)]
        omega_grid = omega_grid[(omega_grid >= search_box.omega_min) & (omega_grid <= search_box.omega_max)]
        if tau_grid.size == 0:
            tau_grid = np.array([0.5 * (search_box.tau_min + search_box.tau_max)])
        if omega_grid.size == 0:
            omega_grid = np.array([0.5 * (search_box.omega_min + search_box.omega_max)])
        values, degenerate_points = _surface_rows(batches, bases, projected, tau_grid, omega_grid)
        i, j = np.unravel_index(np.argmax(values), values.shape)
        init = (float(tau_grid[i]), float(omega_grid[j]))
        logger.debug("Coarse grid argmax at tau=%.4g s, omega=%.4g rad/s", *init)

    lower = np.array([search_box.tau_min / dt, search_box.omega_min / omega_unit])
    upper = np.array([search_box.tau_max / dt, search_box.omega_max / omega_unit])
    start = np.clip(np.array([init[0] / dt, init[1] / omega_unit]), lower, upper)

    def objective(p: np.ndarray) -> float:
        nonlocal degenerate_points
        tau, omega = float(p[0]) * dt, float(p[1]) * omega_unit
        total = 0.0
        for b, basis, py in zip(batches, bases, projected):
            values, degenerate = projected_ratio(steering_vector(b, tau, omega), basis, py)
            total += float(values[0])
            degenerate_points += int(degenerate[0])
        return -total

    # Initial simplex edges (dt, 2 pi / (10 Q dt)), pointed back into the box
    steps = np.array([1.0, n_total / (10.0 * q)])
    omega_width = upper[1] - lower[1]
    if omega_width > 0:
        # A Doppler box narrower than the batch limit bounds the first step too
        steps[1] = min(steps[1], omega_width / 4)
    simplex = [start.copy()]
    for axis in range(2):
        vertex = start.copy()
        vertex[axis] += steps[axis] if start[axis] + steps[axis] <= upper[axis] else -steps[axis]
        simplex.append(vertex)

    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        bounds=list(zip(lower, upper)),
        options={
            "initial_simplex": np.array(simplex),
            "xatol": settings.nm_xatol,
            "fatol": np.inf,
            "maxiter": settings.nm_max_iter,
            "adaptive": False,
        },
    )

    flags = []
    converged = bool(result.success)
    if not converged:
        logger.warning("Nelder-Mead stopped after %d iterations without converging: %s", result.nit, result.message)
        flags.append(Flag.NON_CONVERGED)
    if degenerate_points:
        flags.append(Flag.DEGENERATE_POINTS)

    return Estimate2D(
        tau_hat=float(result.x[0]) * dt,
        omega_hat=float(result.x[1]) * omega_unit,
        peak_value=-float(result.fun),
        refine_iterations=int(result.nit),
        converged=converged,
        degenerate_points=degenerate_points,
        flags=flags,
    )


def doppler_scan(
    batches: Sequence[Batch],
    bases: Sequence[ProjectionBasis],
    tau_hat: float,
    omega_grid: Sequence[float],
) -> Tuple[float, np.ndarray]:
    """Doppler with the delay fixed: argmax over omega of the aggregated ambiguity at tau_hat."""
    surface = aggregate_surface(batches, bases, [tau_hat], omega_grid)
    row = surface.values[0]
    return float(surface.omega_grid[int(np.argmax(row))]), row
