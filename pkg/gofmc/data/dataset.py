import math
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, computed_field, field_validator, model_validator

from gofmc.data.shape import DataShape


def _plain(v):
    # numpy scalars are not accepted by pydantic's int/float validators
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [x.item() if isinstance(x, np.generic) else x for x in v]
    return v


class _DatasetBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def data_shape(self) -> DataShape:
        return DataShape(self.shape)


class Counts(_DatasetBase):
    """Bin counts over m categories."""

    shape: Literal["counts"] = "counts"
    counts: tuple[int, ...]

    @field_validator("counts", mode="before")
    @classmethod
    def to_plain(cls, v):
        return _plain(v)

    @field_validator("counts")
    @classmethod
    def non_negative(cls, v):
        if len(v) == 0:
            raise ValueError("Counts must have at least one bin")
        if any(c < 0 for c in v):
            raise ValueError(f"Bin counts must be non-negative, got {v}")
        if sum(v) < 1:
            raise ValueError("Counts must contain at least one observation")
        return v

    @computed_field
    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def m(self) -> int:
        return len(self.counts)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)


class RealSamples(_DatasetBase):
    """Real-valued observations x_1, ..., x_n."""

    shape: Literal["real"] = "real"
    values: tuple[float, ...]

    @field_validator("values", mode="before")
    @classmethod
    def to_plain(cls, v):
        return _plain(v)

    @field_validator("values")
    @classmethod
    def finite(cls, v):
        if len(v) == 0:
            raise ValueError("RealSamples must contain at least one observation")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("RealSamples values must be finite")
        return v

    @computed_field
    @property
    def n(self) -> int:
        return len(self.values)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


class RegressionPairs(_DatasetBase):
    """Ordered pairs (x_k, y_k) with real covariate x_k and count y_k."""

    shape: Literal["regression"] = "regression"
    x: tuple[float, ...]
    y: tuple[int, ...]

    @field_validator("x", "y", mode="before")
    @classmethod
    def to_plain(cls, v):
        return _plain(v)

    @field_validator("x")
    @classmethod
    def finite_covariates(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("Covariates must be finite")
        return v

    @field_validator("y")
    @classmethod
    def non_negative(cls, v):
        if any(y < 0 for y in v):
            raise ValueError("Responses must be non-negative integers")
        return v

    @model_validator(mode="after")
    def same_length(self) -> "RegressionPairs":
        if len(self.x) != len(self.y):
            raise ValueError(f"x and y must have the same length, got {len(self.x)} and {len(self.y)}")
        if len(self.x) == 0:
            raise ValueError("RegressionPairs must contain at least one pair")
        return self

    @computed_field
    @property
    def n(self) -> int:
        return len(self.y)

    def x_array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=np.float64)

    def y_array(self) -> np.ndarray:
        return np.asarray(self.y, dtype=np.int64)


Dataset = Annotated[Union[Counts, RealSamples, RegressionPairs], Field(discriminator="shape")]

_DATASET_ADAPTER = TypeAdapter(Dataset)


def dataset_to_json(data: Dataset) -> dict:
    return data.model_dump(mode="json", exclude={"n"})


def dataset_from_json(json_data: dict) -> Dataset:
    if not json_data:
        raise ValueError("Empty JSON data")
    return _DATASET_ADAPTER.validate_python(json_data)
