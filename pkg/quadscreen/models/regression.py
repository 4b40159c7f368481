from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .arrays import NDArray


class Term(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["linear", "quad"]
    i: int
    j: Optional[int] = None

    @property
    def name(self) -> str:
        return f"x{self.i}" if self.kind == "linear" else f"x{self.i}*x{self.j}"


class ExpandedDesign(BaseModel):
    model_config = ConfigDict(frozen=True)

    base_vars: Tuple[int, ...]
    columns: Tuple[Term, ...]
    matrix: NDArray

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])


class FitResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    terms: Tuple[Term, ...]
    weights: NDArray
    intercept: float
    lam: float = Field(ge=0)
    iterations: int
    final_nll: float = Field(ge=0)
    objective: float
    converged: bool
    residual: float
    objective_path: Tuple[float, ...] = ()


class CVResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambdas: Tuple[float, ...]
    mean_auc: Tuple[float, ...]
    best_lambda: float
    folds: int
