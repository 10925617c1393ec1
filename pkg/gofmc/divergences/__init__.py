from gofmc.divergences.base import DivergenceMeasure, DivergenceValue
from gofmc.divergences.categorical import MAX_DIVERGENCE, ChiSquareDivergence, chi_square
from gofmc.divergences.continuous import KolmogorovSmirnovDivergence, ks_statistic
from gofmc.divergences.deviance import DevianceDivergence, deviance_g2
from gofmc.divergences.ranking import PermutationDivergence, permutation_divergence

__all__ = [
    "DivergenceMeasure",
    "DivergenceValue",
    "MAX_DIVERGENCE",
    "ChiSquareDivergence",
    "DevianceDivergence",
    "KolmogorovSmirnovDivergence",
    "PermutationDivergence",
    "chi_square",
    "deviance_g2",
    "ks_statistic",
    "permutation_divergence",
]
