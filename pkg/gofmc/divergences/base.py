import abc
import logging
import math

from pydantic import BaseModel, ConfigDict, field_validator

from gofmc.data.dataset import Dataset
from gofmc.data.shape import DataShape
from gofmc.exceptions import InvalidDatasetException
from gofmc.models.base import FittedDistribution

logger = logging.getLogger(__name__)


class DivergenceValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    value: float

    @field_validator("value")
    @classmethod
    def finite(cls, v):
        if math.isnan(v) or math.isinf(v):
            raise ValueError(f"Divergence must be finite, got {v}")
        return v


class DivergenceMeasure(abc.ABC):
    """
    A scalar discrepancy between a dataset and a fitted distribution.
    Larger means less consistent with the fitted model.
    """

    name: str = ""
    shapes: tuple[DataShape, ...] = ()

    @abc.abstractmethod
    def _evaluate(self, data: Dataset, fitted: FittedDistribution) -> float:
        raise NotImplementedError()

    def supports(self, shape: DataShape) -> bool:
        return shape in self.shapes

    def evaluate(self, data: Dataset, fitted: FittedDistribution) -> float:
        if not self.supports(data.data_shape):
            raise InvalidDatasetException(f"Divergence '{self.name}' does not apply to {data.data_shape.value} data")
        return float(self._evaluate(data, fitted))

    def __call__(self, data: Dataset, fitted: FittedDistribution) -> DivergenceValue:
        return DivergenceValue(name=self.name, value=self.evaluate(data, fitted))
