from pydantic_settings import BaseSettings
from pydantic import Field

from app import __version__


class Settings(BaseSettings):
    # Application
    app_name: str = "WeightedPressure"
    app_version: str = __version__
    log_level: str = "INFO"

    # Enumeration limits
    enumeration_budget: int = Field(4_194_304, gt=0)
    oracle_budget: int = Field(1_000_000, gt=0)

    # Numerical tolerances
    identity_tolerance: float = 1e-9
    soundness_tolerance: float = 1e-6
    trailing_window: int = Field(3, ge=1)

    # Optimizer defaults
    optimizer_restarts: int = Field(4, ge=1)
    optimizer_max_iterations: int = Field(200, ge=1)
    optimizer_tolerance: float = Field(1e-9, gt=0)
    objective_scale: int = Field(6, ge=1)

    # Output
    output_dir: str = "out"
    csv_float_format: str = "%.17g"

    class Config:
        env_file = ".env"
        env_prefix = "WPRESSURE_"
        case_sensitive = False

settings = Settings()
