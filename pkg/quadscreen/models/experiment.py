from pathlib import Path
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

from .screening import HashAggregate


class ExperimentConfig(BaseModel):
    """Common experiment settings. Seeds are always explicit."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(ge=0)
    sample_sizes: List[PositiveInt]
    data_paths: List[Path] = []
    threads: PositiveInt = 1

    @field_validator("data_paths")
    @classmethod
    def _paths_exist(cls, paths: List[Path]) -> List[Path]:
        missing = [str(p) for p in paths if not p.exists()]
        if missing:
            raise ValueError(f"missing data files: {missing}")
        return paths


class WeakRecoveryConfig(ExperimentConfig):
    """Binary sweep: fixed random polynomial, random (gamma, biases) draws."""

    p: PositiveInt = 400
    r: PositiveInt = 20
    num_lin: int = Field(default=8, ge=0)
    num_quad: int = Field(default=12, ge=0)
    coeff_range: Tuple[float, float] = (0.1, 1.0)
    gamma_range: Tuple[float, float] = (1.0, 15.0)
    bias_ranges: Tuple[Tuple[float, float], ...] = ((0.1, 0.4), (0.6, 0.9))
    num_polys: PositiveInt = 20
    draws_per_poly: PositiveInt = 140
    normalize: bool = True
    sample_sizes: List[PositiveInt] = [10, 100, 1000, 10000]

    @model_validator(mode="after")
    def _feasible(self) -> "WeakRecoveryConfig":
        if self.r > self.p:
            raise ValueError("r must not exceed p")
        return self


class Table2Config(ExperimentConfig):
    """Finite-alphabet sweep with the hashed correlation test and top-k selection."""

    p: PositiveInt = 1010
    support_size: PositiveInt = 10
    alphabet: Tuple[float, ...] = (-2.0, -1.0, 1.0, 2.0)
    coeff_range: Tuple[float, float] = (-1.0, 1.0)
    include_squares: bool = True
    hashes: PositiveInt = 10
    hash_range: PositiveInt = 1000
    top_k: PositiveInt = 20
    num_functions: PositiveInt = 100
    # mean of the signed per-hash correlations; top-k still ranks by |C_i|
    aggregate: HashAggregate = HashAggregate.SIGNED
    sample_sizes: List[PositiveInt] = [500, 1000, 5000, 10000]


class BenchConfig(ExperimentConfig):
    p_list: List[PositiveInt] = [1000, 2000, 4000]
    trials: PositiveInt = 5
    alphabet_size: int = Field(default=4, ge=2)
    hashes: PositiveInt = 10
    sample_sizes: List[PositiveInt] = [5000, 10000]
