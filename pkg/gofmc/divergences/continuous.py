from typing import Callable

import numpy as np

from gofmc.data.dataset import RealSamples
from gofmc.data.shape import DataShape
from gofmc.divergences.base import DivergenceMeasure
from gofmc.models.base import FittedDistribution


def ks_statistic(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    Maximum absolute difference between the empirical CDF and the model CDF, evaluated on
    both sides of every jump of the empirical CDF. Tied samples form a single jump.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("KS statistic needs at least one sample")
    points, multiplicity = np.unique(x, return_counts=True)
    after = np.cumsum(multiplicity) / x.size
    before = after - multiplicity / x.size
    model = np.asarray(cdf(points), dtype=np.float64)
    return float(max(np.max(np.abs(after - model)), np.max(np.abs(before - model))))


class KolmogorovSmirnovDivergence(DivergenceMeasure):
    name = "ks"
    shapes = (DataShape.REAL,)

    def _evaluate(self, data: RealSamples, fitted: FittedDistribution) -> float:
        return ks_statistic(data.values, fitted.cdf)
