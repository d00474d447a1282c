from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path
from typing import Optional

class Settings(BaseSettings):
    output_dir: Path = Path("results")                      # Where run writes summary.csv and result documents
    config_file: Path = Path("configs/benchmark_suite.yaml")    # Suite used when --config is not given
    max_inflight: int = 1       # Worker threads for independent experiments
    seed: int = 0
    restarts: int = 5           # Optimizer starting points per GP fit
    max_noise_variance: Optional[float] = 1e-6   # Cap on standardized GP noise variance
    points_per_dim_1d: int = 100
    points_per_dim_2d: int = 21
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="GPSIM_",
        env_file=".env",
        env_file_encoding='utf-8',
        extra='ignore'
    )

    def points_per_dim(self, dimension: int) -> int:
        """Default lattice resolution for a function of the given dimension."""
        return self.points_per_dim_1d if dimension == 1 else self.points_per_dim_2d
