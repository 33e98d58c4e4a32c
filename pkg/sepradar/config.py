from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    # Fractional delay kernel
    interp_half_width: int = 32
    kaiser_beta: float = 8.0

    # Scene ratios (dB relative to noise_power)
    dnr_db: float = 30.0
    cnr_db: float = 10.0
    tnr_db: float = -5.0
    noise_power: float = 1.0

    # Numerics
    degenerate_rtol: float = 1e-12
    rank_rtol_factor: float = 1.0

    # Baseline 2-D search
    nm_max_iter: int = 500
    nm_xatol: float = 1e-3
    doppler_oversample: int = 8
    tau_grid_divisor: int = 2

    # Separable search
    coarse_divisor: int = 1
    fine_divisor: int = 8
    approximation_limit: float = 1.0

    # Harness
    dt: float = 4e-8
    batch_size: int = 4096
    clutter_order: int = 32
    trials: int = 100
    sweep_tnr_db: float = 20.0
    sweep_omega0: float = 250.0
    sweep_fractional_delay: bool = False
    threads: int = 1
    master_seed: int = 2025
    output_dir: str = "results"

    # Logging
    log_config: str = "logging.ini"
    log_level: str = "INFO"

    class Config:
        env_file = ".env"
        env_prefix = "SEPRADAR_"
        case_sensitive = False


@lru_cache()
def get_settings() -> Settings:
    return Settings()
