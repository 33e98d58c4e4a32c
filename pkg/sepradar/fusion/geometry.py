"""
Planar bistatic geometry. Delays are measured relative to the direct
illuminator-to-node path (the direct path sits at tau = 0 in the reference
channel), and a closing target has positive Doppler, matching e^{j omega t}.
"""

from typing import List, Tuple

import numpy as np

from sepradar.exceptions import InvalidArgumentError
from sepradar.schemas import Geometry, TargetState


def _node(geom: Geometry, node: int) -> np.ndarray:
    if not 0 <= node < geom.n_nodes:
        raise InvalidArgumentError(f"Node index {node} outside 0..{geom.n_nodes - 1}")
    return np.asarray(geom.node_pos[node], dtype=float)


def _unit_vectors(geom: Geometry, node: int, pos) -> Tuple[np.ndarray, np.ndarray]:
    pos = np.asarray(pos, dtype=float)
    io = np.asarray(geom.io_pos, dtype=float)
    rx = _node(geom, node)
    from_io, from_rx = pos - io, pos - rx
    r_io, r_rx = np.linalg.norm(from_io), np.linalg.norm(from_rx)
    if r_io == 0 or r_rx == 0:
        raise InvalidArgumentError("Target position coincides with the illuminator or the node")
    return from_io / r_io, from_rx / r_rx


def path_excess(geom: Geometry, node: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|p - io| + |p - node| - |io - node| over arrays of coordinates, in meters."""
    io = geom.io_pos
    rx = _node(geom, node)
    baseline = np.hypot(rx[0] - io[0], rx[1] - io[1])
    return np.hypot(x - io[0], y - io[1]) + np.hypot(x - rx[0], y - rx[1]) - baseline


def bistatic_delay(geom: Geometry, node: int, pos) -> float:
    _unit_vectors(geom, node, pos)
    x, y = pos
    return float(path_excess(geom, node, np.float64(x), np.float64(y))) / geom.c


def direction_sum(geom: Geometry, node: int, pos) -> np.ndarray:
    """u_io + u_node, both unit vectors pointing from the site toward the target."""
    u_io, u_rx = _unit_vectors(geom, node, pos)
    return u_io + u_rx


def bistatic_doppler(geom: Geometry, node: int, pos, vel) -> float:
    """omega_k = -(omega_c / c) (u_io + u_node) . vel."""
    return float(-(geom.carrier / geom.c) * direction_sum(geom, node, pos) @ np.asarray(vel, dtype=float))


def node_parameters(geom: Geometry, target: TargetState) -> List[Tuple[float, float]]:
    """(tau_k, omega_k) seen by every node for one target state."""
    return [
        (bistatic_delay(geom, k, target.pos), bistatic_doppler(geom, k, target.pos, target.vel))
        for k in range(geom.n_nodes)
    ]
