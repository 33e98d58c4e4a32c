from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from sepradar.config import get_settings
from sepradar.exceptions import InvalidArgumentError
from sepradar.processing.batching import Batch
from sepradar.processing.projection import ProjectionBasis, project_out


@dataclass(frozen=True)
class CriterionPoint:
    value: float
    degenerate: bool = False


def doppler_vector(size: int, omega: float, dt: float) -> np.ndarray:
    """v(omega) = [1, e^{j omega dt}, ..., e^{j omega (Q-1) dt}], phase relative to the batch start."""
    return np.exp(1j * omega * dt * np.arange(size))


def doppler_matrix(size: int, omegas: np.ndarray, dt: float) -> np.ndarray:
    return np.exp(1j * dt * np.outer(np.arange(size), omegas))


def check_pairing(batches: Sequence[Batch], bases: Sequence[ProjectionBasis]) -> None:
    if not batches:
        raise InvalidArgumentError("No batches given")
    if len(batches) != len(bases):
        raise InvalidArgumentError(f"{len(batches)} batches but {len(bases)} bases")
    for batch, basis in zip(batches, bases):
        if batch.size != basis.size:
            raise InvalidArgumentError(f"Batch {batch.index} has Q={batch.size}, basis has {basis.size}")


def projected_data(batches: Sequence[Batch], bases: Sequence[ProjectionBasis]) -> List[np.ndarray]:
    """Interference-cleaned surveillance vectors, computed once per batch."""
    return [project_out(basis, batch.y) for batch, basis in zip(batches, bases)]


def projected_ratio(
    vectors: np.ndarray, basis: ProjectionBasis, projected_y: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    |<P a, P y>|^2 / ||P a||^2 for each column a of `vectors`, P the
    interference-complement projector. Columns whose projected energy falls
    below `degenerate_rtol * ||a||^2` are reported degenerate and score 0.
    """
    a = vectors if vectors.ndim == 2 else vectors[:, None]
    pa = project_out(basis, a)
    energy = np.sum(np.abs(pa) ** 2, axis=0)
    scale = np.sum(np.abs(a) ** 2, axis=0)
    num = np.abs(pa.conj().T @ projected_y) ** 2
    degenerate = energy <= get_settings().degenerate_rtol * scale
    values = np.where(degenerate, 0.0, num / np.where(degenerate, 1.0, energy))
    return values, degenerate
