from typing import Any, Sequence

import numpy as np
from scipy.stats import norm

from gofmc.data.dataset import RealSamples
from gofmc.data.shape import DataShape
from gofmc.exceptions import EstimationException
from gofmc.models.base import FitResult, FittedDistribution, ModelFamily, ParamVector


def normal_mle(samples: RealSamples) -> FitResult:
    x = samples.to_array()
    loc = float(x.mean())
    scale = float(x.std())
    if not scale > 0:
        raise EstimationException(f"Normal fit needs at least two distinct values, got spread {scale}")
    return FitResult(
        params=ParamVector(values=(loc, scale)),
        log_likelihood=float(norm.logpdf(x, loc=loc, scale=scale).sum()),
    )


class NormalModel(ModelFamily):
    """Gaussian family for real-valued samples; parameters (mean, standard deviation)."""

    shape = DataShape.REAL
    name = "normal"

    def num_params(self, design: Any = None) -> int | None:
        return 2

    def make_params(self, values: Sequence[float], design: Any = None) -> ParamVector:
        params = super().make_params(values, design)
        if not params.values[1] > 0:
            raise ValueError(f"Standard deviation must be positive, got {params.values[1]}")
        return params

    def _estimate(self, data: RealSamples) -> FitResult:
        return normal_mle(data)

    def _sample(self, params: ParamVector, design: Any, n: int, rng: np.random.Generator) -> RealSamples:
        loc, scale = params.values
        return RealSamples(values=rng.normal(loc, scale, size=n))

    def _fitted_distribution(self, params: ParamVector, design: Any) -> FittedDistribution:
        loc, scale = params.values
        return FittedDistribution(shape=DataShape.REAL, cdf=norm(loc=loc, scale=scale).cdf)
