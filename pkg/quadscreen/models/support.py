from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class PairCheck(BaseModel):
    """Conditional label means U_ab(i, j) = E[Y | X_i = a, X_j = b] on the four
    sign cells. Counts are (pp, mm, pm, mp); population checks have none."""

    model_config = ConfigDict(frozen=True)

    i: int
    j: int
    u_pp: Optional[float] = Field(default=None, ge=0, le=1)
    u_mm: Optional[float] = Field(default=None, ge=0, le=1)
    u_pm: Optional[float] = Field(default=None, ge=0, le=1)
    u_mp: Optional[float] = Field(default=None, ge=0, le=1)
    counts: Optional[Tuple[int, int, int, int]] = None

    @property
    def undecidable(self) -> bool:
        return None in (self.u_pp, self.u_mm, self.u_pm, self.u_mp)

    @property
    def gaps(self) -> Tuple[float, float]:
        return abs(self.u_pp - self.u_mm), abs(self.u_pm - self.u_mp)

    def transposed(self) -> "PairCheck":
        counts = None
        if self.counts is not None:
            pp, mm, pm, mp = self.counts
            counts = (pp, mm, mp, pm)
        return PairCheck(
            i=self.j, j=self.i,
            u_pp=self.u_pp, u_mm=self.u_mm, u_pm=self.u_mp, u_mp=self.u_pm,
            counts=counts,
        )


class StrongSupport(BaseModel):
    model_config = ConfigDict(frozen=True)

    quad_pairs: Tuple[Tuple[int, int], ...]
    linear_vars: Tuple[int, ...]
    undecidable: Tuple[Tuple[int, int], ...] = ()
    theta: float
    heuristic: bool = False


class SupportReport(BaseModel):
    """Scores, selected weak support and (optionally) the strong support."""

    model_config = ConfigDict(frozen=True)

    scores: List[float]
    weak_support: Tuple[int, ...]
    strong_support: Optional[StrongSupport] = None
    pair_checks: Tuple[PairCheck, ...] = ()
