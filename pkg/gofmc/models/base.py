import abc
import logging
import math
from typing import Any, Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gofmc.data.dataset import Dataset
from gofmc.data.permutation import Permutation
from gofmc.data.shape import DataShape
from gofmc.exceptions import EstimationException, InvalidDatasetException

logger = logging.getLogger(__name__)

PMF_TOLERANCE = 1e-12


class ParamVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    values: tuple[float, ...]
    permutation: Permutation | None = None

    @field_validator("values", mode="before")
    @classmethod
    def to_plain(cls, v):
        if isinstance(v, np.ndarray):
            return v.tolist()
        return [float(x) for x in v]

    @field_validator("values")
    @classmethod
    def finite(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError(f"Parameter components must be finite, got {v}")
        return v

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


class FitResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: ParamVector
    log_likelihood: float
    converged: bool = True
    iterations: int = 0
    at_boundary: bool = False


class FittedDistribution(BaseModel):
    """
    The fully specified null distribution p0(theta) for one dataset shape:
    a probability mass vector (counts), a CDF (real samples) or fitted means (regression).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    shape: DataShape
    pmf: tuple[float, ...] | None = None
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = Field(default=None, exclude=True)
    means: tuple[float, ...] | None = None
    permutation: Permutation | None = None
    null_permutation: Permutation | None = None

    @field_validator("pmf", "means", mode="before")
    @classmethod
    def to_plain(cls, v):
        if isinstance(v, np.ndarray):
            return v.tolist()
        return v

    @model_validator(mode="after")
    def matches_shape(self) -> "FittedDistribution":
        match self.shape:
            case DataShape.COUNTS:
                if self.pmf is None:
                    raise ValueError("A categorical fitted distribution needs a pmf")
                if any(p < 0 for p in self.pmf) or abs(math.fsum(self.pmf) - 1.0) > PMF_TOLERANCE:
                    raise ValueError(f"pmf must be non-negative and sum to 1, got sum {math.fsum(self.pmf)}")
            case DataShape.REAL:
                if self.cdf is None:
                    raise ValueError("A real-valued fitted distribution needs a cdf")
            case DataShape.REGRESSION:
                if self.means is None:
                    raise ValueError("A regression fitted distribution needs fitted means")
                if not all(mu > 0 and math.isfinite(mu) for mu in self.means):
                    raise ValueError("Fitted means must be strictly positive and finite")
        return self

    def pmf_array(self) -> np.ndarray:
        return np.asarray(self.pmf, dtype=np.float64)

    def means_array(self) -> np.ndarray:
        return np.asarray(self.means, dtype=np.float64)


Estimator = Callable[[Dataset], FitResult]


class ModelFamily(abc.ABC):
    """
    A parametric family p0(theta) with an estimator, a sampler and the fitted distribution.
    Subclasses implement _estimate, _sample and _fitted_distribution; estimate() and sample()
    validate their inputs and translate unexpected failures into EstimationException.
    """

    shape: DataShape
    name: str = ""

    def __init__(self, estimator: Estimator | None = None):
        self._estimator = estimator

    @abc.abstractmethod
    def _estimate(self, data: Dataset) -> FitResult:
        """
        Maximum-likelihood estimate of the parameters from the data.
        """
        raise NotImplementedError()

    @abc.abstractmethod
    def _sample(self, params: ParamVector, design: Any, n: int, rng: np.random.Generator) -> Dataset:
        """
        Draws one synthetic dataset of size n from p0(params).
        """
        raise NotImplementedError()

    @abc.abstractmethod
    def _fitted_distribution(self, params: ParamVector, design: Any) -> FittedDistribution:
        raise NotImplementedError()

    def validate(self, data: Dataset) -> None:
        if data.data_shape != self.shape:
            raise InvalidDatasetException(
                f"Family '{self.name}' expects {self.shape.value} data, got {data.data_shape.value}"
            )

    def design_of(self, data: Dataset) -> Any:
        return None

    def num_params(self, design: Any = None) -> int | None:
        """Length of the parameter vector, or None when it depends on something not known here."""
        return None

    def make_params(self, values: Sequence[float], design: Any = None) -> ParamVector:
        """
        Parameter vector from its plain components, checked against the family.

        Raises:
            ValueError: wrong number of components or a value outside the parameter space
        """
        expected = self.num_params(design)
        if expected is not None and len(values) != expected:
            raise ValueError(f"Family '{self.name}' takes {expected} parameter(s), got {len(values)}")
        return ParamVector(values=values)

    def null_params(self, params: ParamVector) -> ParamVector:
        return params

    def estimate(self, data: Dataset) -> FitResult:
        self.validate(data)
        try:
            if self._estimator is not None:
                return self._estimator(data)
            return self._estimate(data)
        except (EstimationException, InvalidDatasetException):
            raise
        except Exception as e:
            raise EstimationException(f"Unexpected error while fitting '{self.name}': {str(e)}") from e

    def sample(self, params: ParamVector, design: Any, n: int, rng: np.random.Generator) -> Dataset:
        if n < 1:
            raise ValueError(f"Sample size must be at least 1, got {n}")
        return self._sample(params, design, n, rng)

    def fitted_distribution(self, params: ParamVector, design: Any = None) -> FittedDistribution:
        return self._fitted_distribution(params, design)
