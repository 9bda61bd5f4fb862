"""実験設定のモデル (検証済み)."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.constants import GridDefaults, Mode
from src.construction.feasibility import derive_params
from src.construction.initial_data import required_grid_size
from src.construction.params import InflationParams
from src.solver.etd import SolverSettings
from src.spectral.grid import Grid, GridError

_GRID_PATTERN = re.compile(r"^\d+(x\d+){1,2}$")


class ExperimentConfig(BaseModel):
    """CLI フラグと設定ファイルの統合結果."""

    model_config = ConfigDict(extra="forbid")

    mode: Literal["verify", "run", "sweep"] = Mode.RUN
    alpha1: float = Field(default=1.0, ge=1)
    alpha2: float = Field(default=1.0, ge=1)
    epsilon: float = Field(default=0.1, gt=0, lt=1 / 6)
    theta1: float | None = None
    r: int = Field(default=4, ge=1)
    r_list: list[int] = Field(default_factory=lambda: [2, 3, 4, 6])
    s_list: list[float] = Field(default_factory=lambda: [1.0])
    grid: str | None = None
    slab: bool = True
    analytic_only: bool = False
    n_quad: int = Field(default=32, ge=1)
    dt_cfl: float = Field(default=0.5, gt=0)
    n_steps: int | None = Field(default=None, ge=1)
    sample_every: int = Field(default=16, ge=1)
    out: Path = Path("results")
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    besov_samples: int = Field(default=64, ge=16)
    blowup_cap: float = Field(default=1e8, gt=0)

    @field_validator("s_list")
    @classmethod
    def _s_list(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("s_list は空にできません")
        if any(s <= 0 for s in v):
            raise ValueError(f"s は正である必要があります: {v}")
        return v

    @field_validator("r_list")
    @classmethod
    def _r_list(cls, v: list[int]) -> list[int]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"r_list は狭義単調増加である必要があります: {v}")
        if any(r < 1 for r in v):
            raise ValueError(f"r は1以上: {v}")
        return v

    @field_validator("grid")
    @classmethod
    def _grid(cls, v: str | None) -> str | None:
        if v is not None and not _GRID_PATTERN.match(v):
            raise ValueError(f"grid は N1xN3 または N1xN2xN3 の形式: {v!r}")
        return v

    @model_validator(mode="after")
    def _sweep(self) -> "ExperimentConfig":
        if self.mode == Mode.SWEEP and len(self.r_list) < 3:
            raise ValueError(f"sweep には r_list が3点以上必要です: {self.r_list}")
        if self.grid is not None:
            dims = [int(x) for x in self.grid.split("x")]
            if any(n % 2 for n in dims):
                raise ValueError(f"格子サイズは偶数: {self.grid}")
        return self

    # -----------------------------------------------------------------

    def params_for(self, r: int | None = None) -> InflationParams:
        return derive_params(self.alpha1, self.alpha2, self.epsilon, r or self.r, self.theta1)

    def grid_for(self, p: InflationParams) -> Grid:
        """明示指定がなければ既定格子を必要サイズまで広げる."""
        if self.grid is not None:
            dims = [int(x) for x in self.grid.split("x")]
            if not self.slab and len(dims) != 3:
                raise GridError(f"3次元格子には N1xN2xN3 が必要です: {self.grid}")
            try:
                return Grid.slab(dims[0], dims[-1]) if self.slab else Grid.full(*dims)
            except ValidationError as exc:
                raise GridError(f"格子 {self.grid} は使えません: {exc}") from exc
        need1, need3 = required_grid_size(p)
        if self.slab:
            n1, _, n3 = GridDefaults.SLAB
            return Grid.slab(max(n1, need1), max(n3, need3))
        n1, n2, n3 = GridDefaults.FULL3D
        return Grid.full(max(n1, need1), n2, max(n3, need3))

    def solver_settings(self) -> SolverSettings:
        return SolverSettings(cfl=self.dt_cfl, workers=self.workers, blowup_cap=self.blowup_cap)

    def echo(self) -> dict:
        return self.model_dump(mode="json")
