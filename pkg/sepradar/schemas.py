import math
from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class Flag(str, Enum):
    RANK_DEFICIENT = "rank_deficient"
    DEGENERATE_POINTS = "degenerate_points"
    NON_CONVERGED = "non_converged"
    UNRELIABLE_PHASE = "unreliable_phase"
    APPROXIMATION_STRAINED = "approximation_strained"
    OUTSIDE_CLUTTER_SPAN = "outside_clutter_span"
    ESTIMATOR_FAILED = "estimator_failed"


# Scene schemas
class ComplexPair(BaseModel):
    re: float
    im: float = 0.0

    class Config:
        frozen = True

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z: complex) -> "ComplexPair":
        z = complex(z)
        return cls(re=z.real, im=z.imag)


class ClutterTap(BaseModel):
    lag: int
    re: float
    im: float = 0.0

    class Config:
        frozen = True

    @field_validator("lag")
    @classmethod
    def validate_lag(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Clutter lags start at 1 (lag 0 is the direct path)")
        return v

    @property
    def coeff(self) -> complex:
        return complex(self.re, self.im)


class SceneConfig(BaseModel):
    n_samples: int
    dt: float
    dpi_amp: ComplexPair
    clutter_taps: List[ClutterTap] = []
    target_amp: ComplexPair
    target_delay: float
    target_doppler: float
    noise_power: float = 0.0
    seed: int = 0

    class Config:
        frozen = True

    @field_validator("n_samples")
    @classmethod
    def validate_n_samples(cls, v: int) -> int:
        if v < 1:
            raise ValueError("n_samples must be at least 1")
        return v

    @field_validator("dt")
    @classmethod
    def validate_dt(cls, v: float) -> float:
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("dt must be a positive finite sampling interval")
        return v

    @field_validator("noise_power")
    @classmethod
    def validate_noise_power(cls, v: float) -> float:
        if v < 0:
            raise ValueError("noise_power must be non-negative")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        if v < 0:
            raise ValueError("seed must be non-negative")
        return v

    @field_validator("target_delay", "target_doppler")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("target parameters must be finite")
        return v

    @property
    def max_lag(self) -> int:
        return max((tap.lag for tap in self.clutter_taps), default=0)

    def target_in_clutter_span(self, clutter_order: Optional[int] = None) -> bool:
        order = self.max_lag if clutter_order is None else clutter_order
        return 0 < self.target_delay <= order * self.dt * (1 + 1e-9)


# Estimator schemas
class EstimatorSettings(BaseModel):
    n_batches: int = 1
    clutter_order: Optional[int] = None
    coarse_step: Optional[float] = None
    fine_step: Optional[float] = None
    doppler_span: Optional[float] = None
    use_truth_init: bool = True
    include_fixed_delay_scan: bool = False

    @field_validator("n_batches")
    @classmethod
    def validate_n_batches(cls, v: int) -> int:
        if v < 1:
            raise ValueError("n_batches must be at least 1")
        return v

    @model_validator(mode="after")
    def validate_steps(self) -> "EstimatorSettings":
        if self.fine_step is not None and self.fine_step <= 0:
            raise ValueError("fine_step must be positive")
        if self.coarse_step is not None and self.fine_step is not None:
            if self.coarse_step < self.fine_step:
                raise ValueError("coarse_step must not be smaller than fine_step")
        return self


class SweepSpec(BaseModel):
    swept_variable: Literal["M", "omega0"]
    values: List[float]
    trials: int = 100
    base: SceneConfig
    estimator: EstimatorSettings = EstimatorSettings()
    batch_size: Optional[int] = None
    batch_counts: List[int] = []
    master_seed: int = 2025

    @field_validator("values")
    @classmethod
    def validate_values(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("A sweep needs at least one value")
        return v

    @field_validator("trials")
    @classmethod
    def validate_trials(cls, v: int) -> int:
        if v < 1:
            raise ValueError("trials must be at least 1")
        return v

    @model_validator(mode="after")
    def validate_layout(self) -> "SweepSpec":
        if self.swept_variable == "M":
            if self.batch_size is None:
                raise ValueError("An M sweep holds the batch size fixed; set batch_size")
            if any(v < 1 or v != int(v) for v in self.values):
                raise ValueError("M values must be positive integers")
            if self.batch_counts:
                raise ValueError("batch_counts only applies to omega0 sweeps; an M sweep sweeps M itself")
        if any(m < 1 for m in self.batch_counts):
            raise ValueError("batch_counts must be positive")
        return self


# Fusion schemas
Point = Tuple[float, float]


class Geometry(BaseModel):
    io_pos: Point
    node_pos: List[Point]
    carrier: float
    c: float = 299792458.0

    class Config:
        frozen = True

    @field_validator("node_pos")
    @classmethod
    def validate_nodes(cls, v: List[Point]) -> List[Point]:
        if not v:
            raise ValueError("At least one receiver node is required")
        return v

    @model_validator(mode="after")
    def validate_positions(self) -> "Geometry":
        points = [self.io_pos, *self.node_pos]
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in points):
            raise ValueError("Positions must be finite")
        for node in self.node_pos:
            if math.dist(node, self.io_pos) <= 0:
                raise ValueError("A receiver node coincides with the illuminator")
        if not (self.c > 0 and self.carrier > 0):
            raise ValueError("carrier and c must be positive")
        return self

    @property
    def n_nodes(self) -> int:
        return len(self.node_pos)


class TargetState(BaseModel):
    pos: Point
    vel: Point = (0.0, 0.0)

    class Config:
        frozen = True


class LocalizeSpec(BaseModel):
    geometry: Geometry
    target: TargetState
    n_samples: int = 2 ** 14
    n_batches: int = 4
    clutter_order: int = 32
    dt: float = 4e-8
    dnr_db: Optional[float] = None
    cnr_db: Optional[float] = None
    tnr_db: Optional[float] = None
    x_range: Point
    y_range: Point
    grid_points: int = Field(default=200, ge=2)
    seed: int = 0


# Result schemas
class TrialResult(BaseModel):
    method: Literal["baseline2d", "separable", "fixed_delay_scan"]
    seed: int
    tau_hat: Optional[float] = None
    omega_hat: Optional[float] = None
    tau_err: Optional[float] = None
    omega_err: Optional[float] = None
    flags: List[Flag] = []
    wall_time: float = 0.0

    @property
    def failed(self) -> bool:
        return self.tau_err is None or self.omega_err is None


class SweepRow(BaseModel):
    swept_value: float
    method: str
    n_batches: int
    trials: int
    flagged: int
    tau_rmse: float
    omega_rmse: float
