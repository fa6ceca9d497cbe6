# csaforge/config.py
import os
from functools import lru_cache

from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigurationError


def _default_threads() -> int:
    return min(8, os.cpu_count() or 1)


class CsaForgeSettings(BaseSettings):
    """
    Manages user-configurable settings for csaforge, loaded from environment
    variables prefixed with ``CSA_FORGE_`` or from a .env file.

    The defaults reproduce the architectural model used throughout the package:
    nearest-neighbor degree 6, modules linear in the register length, and a
    parallel phase-estimation repetition constant of 2867.
    """

    model_config = SettingsConfigDict(
        env_file=(".env", "secrets.env"),  # Look in both .env and secrets.env
        env_file_encoding="utf-8",
        env_prefix="CSA_FORGE_",
        extra="ignore",  # Ignore extra fields found in environment
        case_sensitive=False,  # Allow flexible casing in environment variables
    )

    # --- Execution Settings ---
    threads: int = Field(
        default_factory=_default_threads,
        description="Maximum worker threads for estimate sweeps and semantic runs",
    )
    log_level: str = Field(default="INFO", description="Default logging level")

    # --- Simulator Settings ---
    sparsity_cap: int = Field(
        default=1 << 16,
        description="Maximum number of nonzero amplitudes before SparsityExceeded",
    )
    tolerance: float = Field(
        default=1e-9, description="Tolerance for norm and fidelity comparisons"
    )

    # --- Architecture Settings ---
    max_degree: int = Field(
        default=6, description="Maximum distinct two-qubit partners per qubit"
    )
    module_linear_bound: float = Field(
        default=40.0,
        description="Constant c in the per-module qubit bound c * (register length)",
    )

    # --- Estimation Settings ---
    ksv_constant: int = Field(
        default=2867,
        description="Multiplications per bit of modulus for parallel period finding",
    )
    flatten_max_n: int = Field(
        default=3,
        description="Largest n for which the multiplier is flattened to gates",
    )
    formula_cache_size: int = Field(
        default=256, description="Maximum number of memoized plans and formulas"
    )

    @field_validator("threads", "sparsity_cap", "max_degree", "ksv_constant")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be a positive integer")
        return value


# Create a single, cached instance of settings
@lru_cache
def get_settings() -> CsaForgeSettings:
    """
    Provides access to the csaforge settings.

    Settings are loaded from environment variables or .env/secrets.env files.
    The instance is cached; call ``get_settings.cache_clear()`` after changing
    the environment.

    Returns:
        CsaForgeSettings: The settings instance.

    Raises:
        ConfigurationError: An environment value fails validation.
    """
    try:
        return CsaForgeSettings()
    except ValidationError as exc:
        fields = ", ".join(str(e["loc"][0]) for e in exc.errors() if e["loc"])
        raise ConfigurationError(f"invalid csaforge settings: {fields}") from exc
