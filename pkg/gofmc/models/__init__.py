from gofmc.models.base import FitResult, FittedDistribution, ModelFamily, ParamVector
from gofmc.models.categorical import CategoricalModel
from gofmc.models.normal import NormalModel
from gofmc.models.poisson_glm import PoissonGlmModel, poisson_glm_fit, poisson_glm_fitted_means, polynomial_design
from gofmc.models.sorted_zipf import SortedZipfModel, sorted_zipf_mle
from gofmc.models.zipf import ZipfModel, zipf_mle, zipf_pmf

__all__ = [
    "FitResult",
    "FittedDistribution",
    "ModelFamily",
    "ParamVector",
    "CategoricalModel",
    "NormalModel",
    "PoissonGlmModel",
    "SortedZipfModel",
    "ZipfModel",
    "poisson_glm_fit",
    "poisson_glm_fitted_means",
    "polynomial_design",
    "sorted_zipf_mle",
    "zipf_mle",
    "zipf_pmf",
]
