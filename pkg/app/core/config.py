from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    # Parallelism
    RF_THREADS: int = Field(default=1, ge=1)

    # Logging
    LOG_LEVEL: str = "INFO"

    # Output
    OUTPUT_DIR: str = "results"

    # Search and solver caps
    ENUMERATION_CAP: int = Field(default=10**8, ge=1)
    ITERATION_CAP: int = Field(default=10_000, ge=1)
    SPECTRAL_TOL: float = Field(default=1e-6, gt=0)
    ALPHA_EXACT_CAP: int = Field(default=200, ge=1)
    DENSE_CHECK_MAX: int = Field(default=200, ge=0)

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore"
    )


settings = Settings()
