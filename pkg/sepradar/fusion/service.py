"""
Central-node fusion. Nodes are synchronized in delay but not in phase, so
their statistics are only ever added, never combined coherently.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from sepradar.estimators.baseline2d import AmbiguitySurface
from sepradar.estimators.separable import DelayProfile
from sepradar.exceptions import InvalidArgumentError, NoTargetSignalError, UnderdeterminedError
from sepradar.fusion.geometry import direction_sum, path_excess
from sepradar.schemas import Geometry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Localization:
    pos_hat: Tuple[float, float]
    peak_value: float
    values: np.ndarray


@dataclass(frozen=True)
class VelocityFit:
    vel_hat: Tuple[float, float]
    residual_norm: float


@dataclass(frozen=True)
class JointEstimate:
    pos_hat: Tuple[float, float]
    vel_hat: Tuple[float, float]
    peak_value: float


def _axes(grid) -> Tuple[np.ndarray, np.ndarray]:
    xs, ys = (np.asarray(axis, dtype=float) for axis in grid)
    if xs.size == 0 or ys.size == 0:
        raise InvalidArgumentError("Search grid is empty")
    return xs, ys


def _check_nodes(geom: Geometry, count: int) -> None:
    if count != geom.n_nodes:
        raise InvalidArgumentError(f"Got statistics from {count} nodes, geometry has {geom.n_nodes}")


def localize(profiles: Sequence[DelayProfile], geom: Geometry, xy_grid) -> Localization:
    """
    Position maximizing the sum over nodes of each node's delay profile at
    tau_k(pos). Profiles are interpolated linearly and count as zero outside
    the delays a node searched.
    """
    _check_nodes(geom, len(profiles))
    xs, ys = _axes(xy_grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")

    total = np.zeros(gx.shape)
    for k, profile in enumerate(profiles):
        tau = path_excess(geom, k, gx, gy) / geom.c
        total += np.interp(tau, profile.tau_grid, profile.values, left=0.0, right=0.0)

    if not np.any(total > 0):
        raise NoTargetSignalError("Fused delay map is zero everywhere")
    i, j = np.unravel_index(np.argmax(total), total.shape)
    return Localization(pos_hat=(float(xs[i]), float(ys[j])), peak_value=float(total[i, j]), values=total)


def velocity_from_dopplers(geom: Geometry, pos_hat, omega_hats: Sequence[float]) -> VelocityFit:
    """Least-squares velocity from per-node Dopplers with the position held fixed."""
    _check_nodes(geom, len(omega_hats))
    rows = np.array([-(geom.carrier / geom.c) * direction_sum(geom, k, pos_hat) for k in range(geom.n_nodes)])
    omegas = np.asarray(omega_hats, dtype=float)
    scale = np.max(np.abs(rows)) if rows.size else 0.0
    if np.linalg.matrix_rank(rows, tol=1e-9 * scale if scale > 0 else None) < 2:
        raise UnderdeterminedError("Bistatic Doppler directions do not span the plane; velocity is under-determined")
    vel, *_ = np.linalg.lstsq(rows, omegas, rcond=None)
    residual = float(np.linalg.norm(rows @ vel - omegas))
    return VelocityFit(vel_hat=(float(vel[0]), float(vel[1])), residual_norm=residual)


def joint_search(
    surfaces: Sequence[AmbiguitySurface], geom: Geometry, xy_grid, vel_grid
) -> JointEstimate:
    """
    Exhaustive search over position x velocity of the summed node ambiguity
    surfaces. Cost grows with the product of all four grid sizes; meant for
    small grids only.
    """
    _check_nodes(geom, len(surfaces))
    xs, ys = _axes(xy_grid)
    vxs, vys = _axes(vel_grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")

    total = np.zeros((xs.size, ys.size, vxs.size, vys.size))
    for k, surface in enumerate(surfaces):
        sample = RegularGridInterpolator(
            (surface.tau_grid, surface.omega_grid), surface.values, bounds_error=False, fill_value=0.0
        )
        io, rx = np.asarray(geom.io_pos), np.asarray(geom.node_pos[k])
        tau = path_excess(geom, k, gx, gy) / geom.c
        to_io = np.hypot(gx - io[0], gy - io[1])
        to_rx = np.hypot(gx - rx[0], gy - rx[1])
        with np.errstate(invalid="ignore", divide="ignore"):
            ux = np.nan_to_num((gx - io[0]) / to_io + (gx - rx[0]) / to_rx)
            uy = np.nan_to_num((gy - io[1]) / to_io + (gy - rx[1]) / to_rx)
        factor = -geom.carrier / geom.c
        omega = factor * (
            ux[:, :, None, None] * vxs[None, None, :, None] + uy[:, :, None, None] * vys[None, None, None, :]
        )
        tau_b = np.broadcast_to(tau[:, :, None, None], omega.shape)
        total += sample(np.stack([tau_b.ravel(), omega.ravel()], axis=-1)).reshape(omega.shape)

    if not np.any(total > 0):
        raise NoTargetSignalError("Fused ambiguity map is zero everywhere")
    i, j, a, b = np.unravel_index(np.argmax(total), total.shape)
    logger.debug("Joint search evaluated %d hypotheses", total.size)
    return JointEstimate(
        pos_hat=(float(xs[i]), float(ys[j])),
        vel_hat=(float(vxs[a]), float(vys[b])),
        peak_value=float(total[i, j, a, b]),
    )
