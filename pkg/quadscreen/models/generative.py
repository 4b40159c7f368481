from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator

from ..config.settings import PMF_TOL

MAX_ALPHABET_SIZE = 64


class Alphabet(BaseModel):
    """Finite support of one variable, in declared order."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]

    @model_validator(mode="before")
    @classmethod
    def _from_values(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            return {"values": data}
        return data

    @field_validator("values")
    @classmethod
    def _distinct_values(cls, values: Tuple[float, ...]) -> Tuple[float, ...]:
        if not 2 <= len(values) <= MAX_ALPHABET_SIZE:
            raise ValueError(f"alphabet size must be in [2, {MAX_ALPHABET_SIZE}], got {len(values)}")
        if len(set(values)) != len(values):
            raise ValueError(f"alphabet values must be distinct: {values}")
        if not all(np.isfinite(values)):
            raise ValueError("alphabet values must be finite")
        return values

    @classmethod
    def binary(cls) -> "Alphabet":
        return cls(values=(-1.0, 1.0))

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def is_binary(self) -> bool:
        return self.values == (-1.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def positions(self, column: np.ndarray) -> np.ndarray:
        """Map values to alphabet positions; raises ValueError naming the first
        row whose value is not in the alphabet."""
        values = self.as_array()
        order = np.argsort(values)
        sorted_values = values[order]
        pos = np.clip(np.searchsorted(sorted_values, column), 0, len(values) - 1)
        bad = np.flatnonzero(sorted_values[pos] != column)
        if bad.size:
            row = int(bad[0])
            raise ValueError(f"value {column[row]!r} at row {row} is not in alphabet {self.values}")
        return order[pos].astype(np.int8)


class QuadTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int = Field(ge=0)
    j: int = Field(ge=0)
    beta: float

    @model_validator(mode="before")
    @classmethod
    def _canonical(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            data = dict(zip(("i", "j", "beta"), data))
        if isinstance(data, dict) and "i" in data and "j" in data and data["i"] > data["j"]:
            data = {**data, "i": data["j"], "j": data["i"]}
        return data


class LinTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    j: int = Field(ge=0)
    alpha: float

    @model_validator(mode="before")
    @classmethod
    def _from_pair(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            data = dict(zip(("j", "alpha"), data))
        return data


class QuadPoly(BaseModel):
    """f(x) = sum beta_ij x_i x_j + sum alpha_j x_j + c, stored with i <= j."""

    model_config = ConfigDict(frozen=True)

    quad_terms: Tuple[QuadTerm, ...] = ()
    lin_terms: Tuple[LinTerm, ...] = ()
    constant: float = 0.0

    @model_validator(mode="after")
    def _no_duplicates(self) -> "QuadPoly":
        pairs = [(t.i, t.j) for t in self.quad_terms]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate quadratic term")
        singles = [t.j for t in self.lin_terms]
        if len(set(singles)) != len(singles):
            raise ValueError("duplicate linear term")
        return self

    @property
    def num_terms(self) -> int:
        return len(self.quad_terms) + len(self.lin_terms)

    @property
    def max_index(self) -> int:
        indices = [t.j for t in self.quad_terms] + [t.j for t in self.lin_terms]
        return max(indices, default=-1)

    def variables(self) -> Tuple[int, ...]:
        found = {t.i for t in self.quad_terms} | {t.j for t in self.quad_terms}
        found |= {t.j for t in self.lin_terms}
        return tuple(sorted(found))

    def coefficients(self) -> np.ndarray:
        return np.array([t.beta for t in self.quad_terms] + [t.alpha for t in self.lin_terms], dtype=float)

    def quad_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        i = np.array([t.i for t in self.quad_terms], dtype=np.intp)
        j = np.array([t.j for t in self.quad_terms], dtype=np.intp)
        beta = np.array([t.beta for t in self.quad_terms], dtype=float)
        return i, j, beta

    def lin_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        j = np.array([t.j for t in self.lin_terms], dtype=np.intp)
        alpha = np.array([t.alpha for t in self.lin_terms], dtype=float)
        return j, alpha

    def restrict(self, variables: Sequence[int]) -> "QuadPoly":
        """Re-index onto ``variables`` (which must contain the weak support)."""
        position = {v: k for k, v in enumerate(variables)}
        missing = set(self.variables()) - set(position)
        if missing:
            raise ValueError(f"variables {sorted(missing)} are not in the restriction set")
        return QuadPoly(
            quad_terms=tuple(
                QuadTerm(i=position[t.i], j=position[t.j], beta=t.beta) for t in self.quad_terms
            ),
            lin_terms=tuple(LinTerm(j=position[t.j], alpha=t.alpha) for t in self.lin_terms),
            constant=self.constant,
        )

    def interaction_components(self) -> Dict[int, frozenset]:
        """Connected components of the graph with an edge per quadratic term,
        keyed by variable."""
        parent = {v: v for v in self.variables()}

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for t in self.quad_terms:
            parent[find(t.i)] = find(t.j)
        groups: Dict[int, set] = {}
        for v in parent:
            groups.setdefault(find(v), set()).add(v)
        return {v: frozenset(groups[find(v)]) for v in parent}


class Nonlinearity(str, Enum):
    SIGMOID = "sigmoid"
    PIECEWISE_LINEAR = "piecewise_linear"


class GenerativeModel(BaseModel):
    """Pr(Y=1 | X=x) = sigma(gamma * f(x)) with independent finite-support X_i."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=1)
    poly: QuadPoly
    gamma: PositiveFloat
    sigma: Nonlinearity = Nonlinearity.SIGMOID
    alphabets: Tuple[Alphabet, ...]
    marginals: Tuple[Tuple[float, ...], ...]
    delta: Optional[float] = Field(default=None, gt=0, lt=0.25)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _expand_shared(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        p = data.get("p")
        shared = data.pop("alphabet", None)
        if shared is not None and "alphabets" not in data and p is not None:
            data["alphabets"] = [shared] * p
        biases = data.pop("biases", None)
        if biases is not None and "marginals" not in data:
            data["marginals"] = [[1.0 - b, b] for b in biases]
            data.setdefault("alphabets", [Alphabet.binary()] * len(biases))
        return data

    @model_validator(mode="after")
    def _consistent(self) -> "GenerativeModel":
        if len(self.alphabets) != self.p or len(self.marginals) != self.p:
            raise ValueError(
                f"expected {self.p} alphabets and marginals, got {len(self.alphabets)} and {len(self.marginals)}"
            )
        if self.poly.max_index >= self.p:
            raise ValueError(f"polynomial index {self.poly.max_index} out of range for p={self.p}")
        for i, (alphabet, pmf) in enumerate(zip(self.alphabets, self.marginals)):
            if len(pmf) != alphabet.size:
                raise ValueError(f"variable {i}: pmf has {len(pmf)} entries for alphabet of size {alphabet.size}")
            if min(pmf) < 0 or abs(sum(pmf) - 1.0) > PMF_TOL:
                raise ValueError(f"variable {i}: pmf {pmf} is not a probability vector")
        if self.delta is not None and self.is_binary:
            for i, b in enumerate(self.biases()):
                if not (self.delta < b < 0.5 - self.delta or 0.5 + self.delta < b < 1 - self.delta):
                    raise ValueError(f"variable {i}: bias {b} violates delta={self.delta}")
        return self

    @property
    def is_binary(self) -> bool:
        return all(a.is_binary for a in self.alphabets)

    def biases(self) -> np.ndarray:
        """Pr[X_i = +1] for binary models."""
        if not self.is_binary:
            raise ValueError("biases are defined for binary models only")
        return np.array([pmf[1] for pmf in self.marginals])

    def means(self) -> np.ndarray:
        return np.array([float(np.dot(a.values, pmf)) for a, pmf in zip(self.alphabets, self.marginals)])

    def relevant_variables(self) -> Tuple[int, ...]:
        return self.poly.variables()

    def with_updates(self, **changes: Any) -> "GenerativeModel":
        return GenerativeModel(**{**self.model_dump(), **changes})


def binary_marginals(biases: Iterable[float]) -> List[List[float]]:
    return [[1.0 - float(b), float(b)] for b in biases]
