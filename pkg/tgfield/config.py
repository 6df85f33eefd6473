"""Application configuration."""
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings."""

    # Logging (TGFIELD_LOG)
    log: str = "WARNING"

    # Differentiation
    fd_step: float = 1e-5
    fd_step_second: float = 1e-4
    derivative_method: str = "jet"  # jet or fd

    # ODE integration
    rk4_step: float = 1e-3
    singularity_margin: float = 0.05
    alpha_max_span: float = 6.0

    # Tolerances
    identity_tol: float = 1e-10
    jet_tol: float = 1e-8
    fd_tol: float = 1e-5
    classifier_tol: float = 1e-6
    degenerate_tol: float = 1e-12
    singular_metric_tol: float = 1e-10
    geodesic_threshold: float = 1e-8
    warped_tol: float = 1e-6

    # Suites
    default_samples: int = 200
    default_seed: int = 0
    max_workers: int = 5
    sample_half_width: float = 1.5
    trajectory_length: float = 1.0
    trajectory_starts: int = 3
    bending_nodes: int = 8

    # Output
    results_dir: str = "./data/results"
    schema_version: str = "1.0"

    class Config:
        env_file = ".env"
        env_prefix = "TGFIELD_"
        case_sensitive = False


settings = Settings()
