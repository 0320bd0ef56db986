"""
Engine settings.

Precedence when a command runs: command-line flags, then the spec file's
`options`, then these settings (environment or .env).
"""

from typing import Any, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Engine settings loaded from environment variables (prefix MULTILOOP_)."""

    # Logging
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[str] = Field(
        default=None, description="Optional log file; console logging goes to stderr"
    )
    debug: bool = Field(default=False, description="Include debug_info in error output")

    # Exact arithmetic
    field_order: Optional[int] = Field(
        default=None, description="Session cyclotomic order override (--field-order)"
    )
    auto_extend_field: bool = Field(
        default=True,
        description="Allow eigenvalue search to lift into larger cyclotomic fields",
    )
    max_field_order: int = Field(
        default=48, description="Largest cyclotomic order tried by auto-extension"
    )

    # Automorphisms and searches
    order_bound: int = Field(
        default=360, description="Cap for automorphism orders and group closures"
    )
    cartan_retries: int = Field(
        default=8, description="Reseeding attempts for the Cartan subalgebra search"
    )
    search_bound: int = Field(
        default=5, description="Entry / word-length bound for the A3 matrix search"
    )
    certificate_bound: int = Field(
        default=2, description="Entry / word-length bound for certificate search"
    )
    seed: int = Field(default=0, description="Seed for every pseudorandom choice")

    # Windows for infinite-dimensional checks
    window_radius: int = Field(default=3, description="Z^n box radius for windows")
    gamma_window: int = Field(
        default=2, description="Radius (in central grading coordinates) for D/C windows"
    )
    sample_triples: int = Field(
        default=200, description="Random triples for Jacobi / invariance samples"
    )
    sample_pairs: int = Field(
        default=400, description="Random pairs for transported-structure checks"
    )

    model_config = SettingsConfigDict(
        env_prefix="MULTILOOP_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Return the process-wide settings, loading them on first use."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def configure(**overrides: Any) -> Settings:
    """Rebuild the singleton with explicit overrides (CLI flags); None values are skipped."""
    global _settings
    values = {key: value for key, value in overrides.items() if value is not None}
    _settings = Settings(**values)
    return _settings
