import math
from typing import Any, Sequence

import numpy as np
from scipy.special import xlogy

from gofmc.data.dataset import Counts, Dataset
from gofmc.data.shape import DataShape
from gofmc.exceptions import InvalidDatasetException
from gofmc.models.base import PMF_TOLERANCE, FitResult, FittedDistribution, ModelFamily, ParamVector


class CategoricalModel(ModelFamily):
    """
    A fully specified categorical distribution. There is nothing to estimate, so the
    P-value is the ordinary one for a simple hypothesis.
    """

    shape = DataShape.COUNTS
    name = "categorical"

    def __init__(self, probabilities: Sequence[float], bins: int | None = None, **kwargs):
        super().__init__(**kwargs)
        probabilities = tuple(float(p) for p in probabilities)
        if len(probabilities) < 1 or any(p < 0 for p in probabilities):
            raise ValueError(f"Probabilities must be non-negative, got {probabilities}")
        if abs(math.fsum(probabilities) - 1.0) > PMF_TOLERANCE:
            raise ValueError(f"Probabilities must sum to 1, got {math.fsum(probabilities)}")
        if bins is not None and bins != len(probabilities):
            raise ValueError(f"Got {len(probabilities)} probabilities for {bins} bins")
        self.probabilities = probabilities

    def validate(self, data: Dataset) -> None:
        super().validate(data)
        if data.m != len(self.probabilities):
            raise InvalidDatasetException(
                f"Family '{self.name}' has {len(self.probabilities)} bins, got {data.m}"
            )

    def num_params(self, design: Any = None) -> int | None:
        return len(self.probabilities)

    def make_params(self, values: Sequence[float], design: Any = None) -> ParamVector:
        """The family is fixed by its probabilities; explicit components must repeat them."""
        if len(values) == 0:
            return ParamVector(values=self.probabilities)
        params = super().make_params(values, design)
        if not np.allclose(params.values, self.probabilities, rtol=0.0, atol=PMF_TOLERANCE):
            raise ValueError(f"Family '{self.name}' is fixed at {self.probabilities}, got parameters {params.values}")
        return params

    def _estimate(self, data: Counts) -> FitResult:
        p = np.asarray(self.probabilities)
        return FitResult(params=ParamVector(values=p), log_likelihood=float(xlogy(data.to_array(), p).sum()))

    def _sample(self, params: ParamVector, design: Any, n: int, rng: np.random.Generator) -> Counts:
        return Counts(counts=rng.multinomial(n, params.to_array()))

    def _fitted_distribution(self, params: ParamVector, design: Any) -> FittedDistribution:
        return FittedDistribution(shape=DataShape.COUNTS, pmf=params.values)
