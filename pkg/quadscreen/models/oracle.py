from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from .arrays import NDArray


class ValueProfile(BaseModel):
    """Distinct nonzero values of f (sorted by |v|) with marginal probabilities
    and, for a binary variable k, the conditionals given x_k = +1 / -1 and the
    influences g(v) = Pr(f=v | x_k=+1) - Pr(f=v | x_k=-1)."""

    model_config = ConfigDict(frozen=True)

    k: int
    values: NDArray
    has_zero: bool
    probs: NDArray
    zero_prob: float
    probs_plus: Optional[NDArray] = None
    probs_minus: Optional[NDArray] = None
    zero_plus: Optional[float] = None
    zero_minus: Optional[float] = None
    influences: Optional[NDArray] = None
    zero_influence: Optional[float] = None

    @property
    def m(self) -> int:
        return int(self.values.shape[0])


class UspEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    unique_sign: bool
    has_negation_partner: bool

    @property
    def satisfied(self) -> bool:
        return self.unique_sign and not self.has_negation_partner


class UspReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: Tuple[UspEntry, ...]

    @property
    def any_satisfied(self) -> bool:
        return any(e.satisfied for e in self.entries)

    @property
    def all_satisfied(self) -> bool:
        return all(e.satisfied for e in self.entries)


class MeasureCheck(BaseModel):
    """Grid estimate of the set of scaling parameters on which the exact
    correlation exceeds the finite-sample bound, with the bound constants."""

    model_config = ConfigDict(frozen=True)

    k: int
    case: int
    grid: int
    interval_end: float
    measure_fraction: float
    measure: float
    required_measure: float
    magnitude_bound: float
    min_magnitude_on_good_set: Optional[float]
    c1: float
    c2: float
    eps: float
    delta: float
    b: float
    s: int
    m: int
    r: int

    @property
    def satisfied(self) -> bool:
        return self.measure >= self.required_measure
