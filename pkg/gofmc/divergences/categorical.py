import sys

import numpy as np

from gofmc.data.dataset import Counts
from gofmc.data.shape import DataShape
from gofmc.divergences.base import DivergenceMeasure
from gofmc.models.base import FittedDistribution

# stands in for an infinite statistic (a count in a bin the model gives probability 0)
MAX_DIVERGENCE = sys.float_info.max


def chi_square(counts, pmf) -> float:
    """
    Pearson's statistic sum_j (c_j - n p_j)**2 / (n p_j).
    Bins with p_j = 0 and no counts are skipped.
    """
    c = np.asarray(counts, dtype=np.float64)
    p = np.asarray(pmf, dtype=np.float64)
    if c.shape != p.shape:
        raise ValueError(f"Counts and pmf lengths differ: {c.shape} vs {p.shape}")
    expected = c.sum() * p
    supported = expected > 0
    if np.any(c[~supported] > 0):
        return MAX_DIVERGENCE
    value = float(np.sum((c[supported] - expected[supported]) ** 2 / expected[supported]))
    return min(value, MAX_DIVERGENCE)


class ChiSquareDivergence(DivergenceMeasure):
    name = "chi2"
    shapes = (DataShape.COUNTS,)

    def _evaluate(self, data: Counts, fitted: FittedDistribution) -> float:
        return chi_square(data.counts, fitted.pmf)
