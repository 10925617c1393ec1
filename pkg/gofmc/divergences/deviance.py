import numpy as np
from scipy.special import xlogy

from gofmc.data.dataset import Counts, Dataset, RegressionPairs
from gofmc.data.shape import DataShape
from gofmc.divergences.base import DivergenceMeasure
from gofmc.divergences.categorical import MAX_DIVERGENCE
from gofmc.models.base import FittedDistribution


def deviance_g2(y, mu) -> float:
    """
    Log-likelihood ratio g2 = 2 sum_k y_k ln(y_k / mu_k), with 0 ln 0 = 0.

    Not the full Poisson deviance: without the sum(mu - y) term the value can be negative
    unless the fit matches the total count.
    """
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if y.shape != mu.shape:
        raise ValueError(f"Counts and means lengths differ: {y.shape} vs {mu.shape}")
    if np.any(mu <= 0):
        raise ValueError("Fitted means must be strictly positive")
    return float(2.0 * np.sum(xlogy(y, y / mu)))


class DevianceDivergence(DivergenceMeasure):
    """g2 against fitted Poisson means, or against n * pmf for categorical counts."""

    name = "g2"
    shapes = (DataShape.COUNTS, DataShape.REGRESSION)

    def _evaluate(self, data: Dataset, fitted: FittedDistribution) -> float:
        if isinstance(data, RegressionPairs):
            return deviance_g2(data.y, fitted.means)
        c = data.to_array()
        expected = data.n * fitted.pmf_array()
        supported = expected > 0
        if np.any(c[~supported] > 0):
            return MAX_DIVERGENCE
        return deviance_g2(c[supported], expected[supported])
