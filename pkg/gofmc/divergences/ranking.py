from scipy.stats import kendalltau

from gofmc.data.dataset import Counts
from gofmc.data.permutation import Permutation
from gofmc.data.shape import DataShape
from gofmc.divergences.base import DivergenceMeasure
from gofmc.exceptions import ConfigurationException
from gofmc.models.base import FittedDistribution


def permutation_divergence(phi_hat: Permutation, phi_0: Permutation) -> float:
    """
    Normalized Kendall tau distance: discordant pairs / (m (m - 1) / 2), in [0, 1].
    """
    if phi_hat.m != phi_0.m:
        raise ValueError(f"Permutations have different sizes: {phi_hat.m} vs {phi_0.m}")
    if phi_hat.m < 2:
        return 0.0
    # permutations have no ties, so tau = (concordant - discordant) / total pairs
    tau = kendalltau(phi_hat.values, phi_0.values).statistic
    return float(min(1.0, max(0.0, (1.0 - tau) / 2.0)))


class PermutationDivergence(DivergenceMeasure):
    name = "kendall"
    shapes = (DataShape.COUNTS,)

    def _evaluate(self, data: Counts, fitted: FittedDistribution) -> float:
        if fitted.permutation is None or fitted.null_permutation is None:
            raise ConfigurationException(f"Divergence '{self.name}' needs a family with a permutation parameter")
        return permutation_divergence(fitted.permutation, fitted.null_permutation)
