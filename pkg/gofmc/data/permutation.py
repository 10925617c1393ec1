from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


class Permutation(BaseModel):
    """
    A bijection on {1, ..., m}, stored as the tuple (phi(1), ..., phi(m)).
    For the sorted Zipf family phi(j) is the rank assigned to bin j.
    """

    model_config = ConfigDict(frozen=True)

    values: tuple[int, ...]

    @field_validator("values")
    @classmethod
    def is_bijection(cls, v):
        if len(v) == 0:
            raise ValueError("Permutation must have at least one element")
        if sorted(v) != list(range(1, len(v) + 1)):
            raise ValueError(f"Permutation values must be exactly 1..{len(v)} without repeats, got {v}")
        return v

    @property
    def m(self) -> int:
        return len(self.values)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(values=tuple(range(1, m + 1)))

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "Permutation":
        """
        Builds phi from a 0-based ordering of bins: order[r] is the bin that gets rank r + 1.
        """
        ranks = np.empty(len(order), dtype=np.int64)
        ranks[np.asarray(order, dtype=np.int64)] = np.arange(1, len(order) + 1)
        return cls(values=tuple(int(r) for r in ranks))

    def inverse(self) -> "Permutation":
        return Permutation.from_order([v - 1 for v in self.values])

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(j) = self(other(j))"""
        if other.m != self.m:
            raise ValueError(f"Cannot compose permutations of sizes {self.m} and {other.m}")
        return Permutation(values=tuple(self.values[j - 1] for j in other.values))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)
