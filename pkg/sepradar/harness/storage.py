"""
On-disk formats: complex signal files with JSON sidecars, and the CSV
statistics a node sends to the central node.
"""

import json
import logging
import os
from typing import Dict, Union

import numpy as np
import pandas as pd

from sepradar.estimators.baseline2d import AmbiguitySurface
from sepradar.estimators.separable import DelayProfile
from sepradar.exceptions import InvalidArgumentError
from sepradar.scene.service import NodeSignals
from sepradar.scene.waveform import ComplexSeries

logger = logging.getLogger(__name__)

SIGNAL_DTYPE = np.dtype("<c16")
FLOAT_FORMAT = "%.12e"
PROFILE_COLUMNS = ["tau_s", "value"]
SURFACE_COLUMNS = ["tau_s", "omega_rad_s", "value"]


def sidecar_path(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def write_signal(series: ComplexSeries, path: str) -> None:
    """Little-endian interleaved re/im float64 samples plus a JSON sidecar."""
    series.samples.astype(SIGNAL_DTYPE).tofile(path)
    with open(sidecar_path(path), "w") as f:
        json.dump({"dt": series.dt, "t0": series.t0, "length": len(series)}, f, indent=2)
    logger.info("Wrote %d samples to %s", len(series), path)


def read_signal(path: str) -> ComplexSeries:
    with open(sidecar_path(path)) as f:
        meta = json.load(f)
    samples = np.fromfile(path, dtype=SIGNAL_DTYPE)
    if samples.size != meta["length"]:
        raise InvalidArgumentError(f"{path} holds {samples.size} samples, sidecar says {meta['length']}")
    return ComplexSeries(samples.astype(np.complex128), float(meta["dt"]), float(meta["t0"]))


def write_node(node: NodeSignals, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_signal(node.reference, os.path.join(out_dir, "reference.bin"))
    write_signal(node.surveillance, os.path.join(out_dir, "surveillance.bin"))


def read_node(in_dir: str) -> NodeSignals:
    return NodeSignals(
        reference=read_signal(os.path.join(in_dir, "reference.bin")),
        surveillance=read_signal(os.path.join(in_dir, "surveillance.bin")),
    )


# Node -> central node statistics
def profile_frame(profile: DelayProfile) -> pd.DataFrame:
    return pd.DataFrame({"tau_s": profile.tau_grid, "value": profile.values})


def surface_frame(surface: AmbiguitySurface) -> pd.DataFrame:
    tau, omega = np.meshgrid(surface.tau_grid, surface.omega_grid, indexing="ij")
    return pd.DataFrame({"tau_s": tau.ravel(), "omega_rad_s": omega.ravel(), "value": surface.values.ravel()})


def to_csv_text(stat: Union[DelayProfile, AmbiguitySurface]) -> str:
    frame = profile_frame(stat) if isinstance(stat, DelayProfile) else surface_frame(stat)
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_stat_csv(stat: Union[DelayProfile, AmbiguitySurface], path: str) -> None:
    with open(path, "w", newline="") as f:
        f.write(to_csv_text(stat))
    logger.info("Wrote %s to %s", type(stat).__name__, path)


def read_profile_csv(path: str) -> DelayProfile:
    frame = pd.read_csv(path)
    if list(frame.columns) != PROFILE_COLUMNS:
        raise InvalidArgumentError(f"{path} is not a delay profile (columns {list(frame.columns)})")
    return DelayProfile(frame["tau_s"].to_numpy(), frame["value"].to_numpy())


def read_surface_csv(path: str) -> AmbiguitySurface:
    frame = pd.read_csv(path)
    if list(frame.columns) != SURFACE_COLUMNS:
        raise InvalidArgumentError(f"{path} is not an ambiguity surface (columns {list(frame.columns)})")
    tau_grid = np.unique(frame["tau_s"].to_numpy())
    omega_grid = np.unique(frame["omega_rad_s"].to_numpy())
    values = frame["value"].to_numpy().reshape(tau_grid.size, omega_grid.size)
    return AmbiguitySurface(tau_grid, omega_grid, values)


def transmission_bytes(stat: Union[DelayProfile, AmbiguitySurface]) -> Dict[str, int]:
    """Bytes a node sends: raw float64 statistic values, and the CSV as written."""
    return {"payload": int(stat.values.size * 8), "csv": len(to_csv_text(stat).encode())}
