import logging
from typing import Any, Sequence

import numpy as np

from gofmc.data.dataset import Counts, Dataset
from gofmc.data.permutation import Permutation
from gofmc.data.shape import DataShape
from gofmc.exceptions import InvalidDatasetException
from gofmc.models.base import FitResult, FittedDistribution, ParamVector
from gofmc.models.zipf import THETA_MAX, ZipfModel, zipf_mle, zipf_pmf

logger = logging.getLogger(__name__)


def sorted_zipf_pmf(theta: float, phi: Permutation) -> np.ndarray:
    """p_j = C_theta / phi(j)**theta"""
    return zipf_pmf(theta, phi.m)[phi.to_array() - 1]


def sorted_zipf_mle(counts: Counts, theta_max: float = THETA_MAX) -> FitResult:
    """
    Joint maximum-likelihood estimate of (phi, theta).

    phi assigns rank 1 to the most frequent bin, rank 2 to the next and so on; equal counts
    keep their bin order. theta is then the Zipf estimate on the rank-relabeled counts.
    """
    c = counts.to_array()
    order = np.argsort(-c, kind="stable")
    phi = Permutation.from_order(order)
    fit = zipf_mle(Counts(counts=c[order]), theta_max=theta_max)
    return fit.model_copy(update={"params": ParamVector(values=fit.params.values, permutation=phi)})


class SortedZipfModel(ZipfModel):
    """
    Zipf distribution over bins in an unknown order. The permutation is the parameter of
    interest; simulations draw from p0(phi_0, theta_hat) with phi_0 the hypothesized order.
    """

    name = "sorted_zipf"

    def __init__(
        self,
        bins: int | None = None,
        theta_max: float = THETA_MAX,
        null_permutation: Sequence[int] | Permutation | None = None,
        **kwargs,
    ):
        super().__init__(bins=bins, theta_max=theta_max, **kwargs)
        if null_permutation is not None and not isinstance(null_permutation, Permutation):
            null_permutation = Permutation(values=tuple(null_permutation))
        if null_permutation is not None and bins is not None and null_permutation.m != bins:
            raise ValueError(f"Null permutation has {null_permutation.m} entries but the family has {bins} bins")
        self._null_permutation = null_permutation

    def null_permutation(self, m: int) -> Permutation:
        if self._null_permutation is None:
            return Permutation.identity(m)
        return self._null_permutation

    def validate(self, data: Dataset) -> None:
        super().validate(data)
        if self._null_permutation is not None and data.m != self._null_permutation.m:
            raise InvalidDatasetException(
                f"Null permutation has {self._null_permutation.m} entries but the data has {data.m} bins"
            )

    def null_params(self, params: ParamVector) -> ParamVector:
        if self._null_permutation is not None:
            return ParamVector(values=params.values, permutation=self._null_permutation)
        return ParamVector(values=params.values, permutation=Permutation.identity(self._bins_for(params, None)))

    def _bins_for(self, params: ParamVector, design: Any) -> int:
        if params.permutation is not None:
            return params.permutation.m
        return super()._bins_for(params, design)

    def _estimate(self, data: Counts) -> FitResult:
        return sorted_zipf_mle(data, theta_max=self.theta_max)

    def _fitted_distribution(self, params: ParamVector, design: Any) -> FittedDistribution:
        m = self._bins_for(params, design)
        phi = params.permutation if params.permutation is not None else Permutation.identity(m)
        return FittedDistribution(
            shape=DataShape.COUNTS,
            pmf=sorted_zipf_pmf(params.values[0], phi),
            permutation=phi,
            null_permutation=self.null_permutation(m),
        )
