import os
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


def _parse_floats(raw: str) -> list[float]:
    values: list[float] = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError:
            return []
    return values


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", env_prefix="", extra="ignore")

    app_name: str = Field(default="LogSpectra", alias="APP_NAME")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    quad_tol: float = Field(default=1e-10, alias="QUAD_TOL")
    operator_tol: float = Field(default=1e-8, alias="OPERATOR_TOL")
    cluster_tol: float = Field(default=1e-6, alias="CLUSTER_TOL")
    uniformity_factor: float = Field(default=3.0, alias="UNIFORMITY_FACTOR")
    slope_rel_tol: float = Field(default=0.05, alias="SLOPE_REL_TOL")
    angular_nodes: int = Field(default=256, alias="ANGULAR_NODES")
    workers: int | None = Field(default=None, alias="WORKERS")
    output_dir: str = Field(default=os.path.join(os.getcwd(), "runs"), alias="OUTPUT_DIR")
    s_grid_raw: str = Field(default="", alias="S_GRID")
    d_bound_grid_raw: str = Field(default="", alias="D_BOUND_GRID")

    _default_s_grid = [0.1, 0.07, 0.05, 0.035, 0.025, 0.0175, 0.0125]
    _default_d_bound_grid = [0.25 / 2**j for j in range(11)]

    @property
    def s_grid(self) -> list[float]:
        if not self.s_grid_raw:
            return self._default_s_grid.copy()
        parsed = sorted(_parse_floats(self.s_grid_raw), reverse=True)
        return parsed or self._default_s_grid.copy()

    @property
    def d_bound_grid(self) -> list[float]:
        if not self.d_bound_grid_raw:
            return self._default_d_bound_grid.copy()
        parsed = _parse_floats(self.d_bound_grid_raw)
        return parsed or self._default_d_bound_grid.copy()


@lru_cache
def get_settings() -> Settings:
    return Settings()
