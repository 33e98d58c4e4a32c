"""
Monte Carlo RMSE sweeps over the number of batches (batch size fixed) or the
target Doppler (record length fixed, one curve per batch count).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from sepradar.config import get_settings
from sepradar.harness.trials import run_trial
from sepradar.schemas import EstimatorSettings, SceneConfig, SweepRow, SweepSpec, TrialResult
from sepradar.scene.service import build_scene_config, draw_target_delay
from sepradar.scene.waveform import TRIAL_STREAM, seed_stream

logger = logging.getLogger(__name__)

RMSE_COLUMNS = ["tau_rmse", "omega_rmse"]
GROUP_COLUMNS = ["n_batches", "swept_value", "method"]


@dataclass(frozen=True)
class SweepOutcome:
    table: pd.DataFrame
    trials: pd.DataFrame


def trial_seeds(master_seed: int, trials: int) -> List[int]:
    """Per-trial seeds, shared by every swept value so the curves are paired too."""
    rng = seed_stream(master_seed, TRIAL_STREAM)
    return [int(s) for s in rng.integers(0, 2 ** 32, size=trials)]


def curve_batch_counts(spec: SweepSpec) -> List[Optional[int]]:
    """Batch count of each curve; None keeps the count the swept value implies."""
    if spec.swept_variable == "omega0" and spec.batch_counts:
        return list(spec.batch_counts)
    return [None]


def shared_doppler_span(spec: SweepSpec) -> Optional[float]:
    """
    Doppler half-width searched by the baseline for every curve of an omega0
    sweep: the unambiguous limit of the longest batch, pi / (Q_max dt).
    """
    if spec.swept_variable != "omega0" or spec.estimator.doppler_span is not None or not spec.batch_counts:
        return spec.estimator.doppler_span
    longest = spec.base.n_samples // min(spec.batch_counts)
    return math.pi / (longest * spec.base.dt)


def point_setup(
    spec: SweepSpec, value: float, n_batches: Optional[int] = None
) -> Tuple[SceneConfig, EstimatorSettings]:
    if spec.swept_variable == "M":
        m = int(value)
        cfg = spec.base.model_copy(update={"n_samples": m * spec.batch_size})
        return cfg, spec.estimator.model_copy(update={"n_batches": m})

    cfg = spec.base.model_copy(update={"target_doppler": float(value)})
    if n_batches is None:
        return cfg, spec.estimator
    update = {"n_batches": n_batches, "doppler_span": shared_doppler_span(spec)}
    return cfg, spec.estimator.model_copy(update=update)


def rmse(errors: pd.Series) -> float:
    errors = errors.dropna().to_numpy(dtype=float)
    return math.sqrt(float(np.mean(errors ** 2))) if errors.size else math.nan


def summarize(trials: pd.DataFrame) -> pd.DataFrame:
    """RMSE per (batch count, swept value, method) over the trials that produced an estimate."""
    rows = []
    for (n_batches, value, method), group in trials.groupby(GROUP_COLUMNS, sort=True):
        rows.append(
            SweepRow(
                swept_value=value,
                method=method,
                n_batches=int(n_batches),
                trials=len(group),
                flagged=int((group["flags"] != "").sum()),
                tau_rmse=rmse(group["tau_err"]),
                omega_rmse=rmse(group["omega_err"]),
            ).model_dump()
        )
    return pd.DataFrame(rows)


def _record(value: float, n_batches: int, result: TrialResult) -> dict:
    record = result.model_dump()
    record["flags"] = ";".join(flag.value for flag in result.flags)
    record["swept_value"] = value
    record["n_batches"] = n_batches
    return record


def run_sweep(spec: SweepSpec, threads: Optional[int] = None, progress: bool = False) -> SweepOutcome:
    threads = get_settings().threads if threads is None else threads
    seeds = trial_seeds(spec.master_seed, spec.trials)
    # numpy and LAPACK release the GIL
    parallel = Parallel(n_jobs=max(1, threads), prefer="threads")
    records = []

    for n_batches in curve_batch_counts(spec):
        for value in spec.values:
            cfg, estimator = point_setup(spec, value, n_batches)
            label = f"{spec.swept_variable}={value:g}" + (f" M={n_batches}" if n_batches else "")
            outcomes = parallel(
                delayed(run_trial)(cfg, estimator, seed)
                for seed in tqdm(seeds, desc=label, disable=not progress)
            )
            point = [_record(value, estimator.n_batches, r) for results in outcomes for r in results]
            records.extend(point)

            for row in summarize(pd.DataFrame(point)).itertuples():
                logger.info(
                    "%s %s: tau RMSE %.3e s, omega RMSE %.3e rad/s (%d flagged of %d)",
                    label, row.method, row.tau_rmse, row.omega_rmse, row.flagged, row.trials,
                )

    trials = pd.DataFrame(records)
    return SweepOutcome(table=summarize(trials), trials=trials)


def default_base(n_samples: int, seed: int, tnr_db: Optional[float] = None) -> SceneConfig:
    """Desk-scale scene with the target at a delay drawn once from `seed` and then kept."""
    settings = get_settings()
    return build_scene_config(
        n_samples=n_samples,
        dt=settings.dt,
        clutter_order=settings.clutter_order,
        target_delay=draw_target_delay(
            seed, settings.clutter_order, settings.dt, settings.sweep_fractional_delay
        ),
        target_doppler=settings.sweep_omega0,
        seed=seed,
        tnr_db=settings.sweep_tnr_db if tnr_db is None else tnr_db,
    )


def default_batch_sweep(
    values: Sequence[int] = (2, 4, 8, 16), trials: Optional[int] = None, master_seed: Optional[int] = None
) -> SweepSpec:
    """Number of batches swept with Q held at the configured batch size."""
    settings = get_settings()
    master_seed = settings.master_seed if master_seed is None else master_seed
    return SweepSpec(
        swept_variable="M",
        values=list(values),
        trials=settings.trials if trials is None else trials,
        base=default_base(settings.batch_size * max(values), master_seed),
        estimator=EstimatorSettings(clutter_order=settings.clutter_order),
        batch_size=settings.batch_size,
        master_seed=master_seed,
    )


def default_doppler_sweep(
    values: Sequence[float] = (50.0, 150.0, 250.0, 350.0, 450.0),
    n_samples: int = 2 ** 14,
    batch_counts: Sequence[int] = (4, 16, 64),
    trials: Optional[int] = None,
    master_seed: Optional[int] = None,
    tnr_db: Optional[float] = None,
) -> SweepSpec:
    """Target Doppler swept with the record length N held, one curve per batch count M."""
    settings = get_settings()
    master_seed = settings.master_seed if master_seed is None else master_seed
    return SweepSpec(
        swept_variable="omega0",
        values=list(values),
        trials=settings.trials if trials is None else trials,
        base=default_base(n_samples, master_seed, tnr_db),
        estimator=EstimatorSettings(clutter_order=settings.clutter_order),
        batch_counts=list(batch_counts),
        master_seed=master_seed,
    )
