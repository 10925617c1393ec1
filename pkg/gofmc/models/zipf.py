import logging
from typing import Any, Sequence

import numpy as np
from scipy.optimize import brentq

from gofmc.data.dataset import Counts, Dataset
from gofmc.data.shape import DataShape
from gofmc.exceptions import InvalidDatasetException
from gofmc.models.base import FitResult, FittedDistribution, ModelFamily, ParamVector

logger = logging.getLogger(__name__)

THETA_MAX = 50.0


def _log_ranks(m: int) -> np.ndarray:
    return np.log(np.arange(1, m + 1, dtype=np.float64))


def zipf_pmf(theta: float, m: int) -> np.ndarray:
    """
    p_j = C_theta / j**theta for j = 1..m, with C_theta = 1 / sum_j j**(-theta).
    """
    if theta < 0:
        raise ValueError(f"Zipf power must be non-negative, got {theta}")
    if m < 2:
        raise ValueError(f"Zipf distribution needs at least 2 bins, got {m}")
    weights = np.exp(-theta * _log_ranks(m))
    return weights / weights.sum()


def zipf_log_likelihood(theta: float, counts: np.ndarray) -> float:
    log_ranks = _log_ranks(len(counts))
    weights = np.exp(-theta * log_ranks)
    n = counts.sum()
    return float(-n * np.log(weights.sum()) - theta * np.dot(counts, log_ranks))


def zipf_score(theta: float, counts: np.ndarray) -> float:
    """
    d/dtheta of the log-likelihood: n * E_theta[ln J] - sum_k ln j_k. Decreasing in theta.
    """
    log_ranks = _log_ranks(len(counts))
    pmf = zipf_pmf(theta, len(counts))
    return float(counts.sum() * np.dot(pmf, log_ranks) - np.dot(counts, log_ranks))


def zipf_mle(counts: Counts, theta_max: float = THETA_MAX, xtol: float = 1e-14) -> FitResult:
    """
    Maximum-likelihood Zipf power over [0, theta_max].

    The log-likelihood is concave in theta, so the maximizer is either a boundary point
    or the unique root of the score, which brentq finds inside the sign-change bracket.
    """
    c = counts.to_array().astype(np.float64)
    if counts.m < 2:
        raise InvalidDatasetException(f"Zipf fitting needs at least 2 bins, got {counts.m}")

    # rounding guard so that exactly uniform counts land on the boundary
    score_tolerance = 1e-10 * max(1.0, float(c.sum()))
    if zipf_score(0.0, c) <= score_tolerance:
        theta, iterations, at_boundary = 0.0, 0, True
    elif zipf_score(theta_max, c) >= 0.0:
        logger.debug(f"Zipf score still positive at theta_max={theta_max}, counts={counts.counts}")
        theta, iterations, at_boundary = theta_max, 0, True
    else:
        theta, result = brentq(zipf_score, 0.0, theta_max, args=(c,), xtol=xtol, full_output=True)
        iterations, at_boundary = result.iterations, False

    return FitResult(
        params=ParamVector(values=(theta,)),
        log_likelihood=zipf_log_likelihood(theta, c),
        converged=True,
        iterations=iterations,
        at_boundary=at_boundary,
    )


class ZipfModel(ModelFamily):
    shape = DataShape.COUNTS
    name = "zipf"

    def __init__(self, bins: int | None = None, theta_max: float = THETA_MAX, **kwargs):
        super().__init__(**kwargs)
        if bins is not None and bins < 2:
            raise ValueError(f"Zipf family needs at least 2 bins, got {bins}")
        self.bins = bins
        self.theta_max = float(theta_max)

    def validate(self, data: Dataset) -> None:
        super().validate(data)
        if data.m < 2:
            raise InvalidDatasetException(f"Family '{self.name}' needs at least 2 bins, got {data.m}")
        if self.bins is not None and data.m != self.bins:
            raise InvalidDatasetException(f"Family '{self.name}' is configured for {self.bins} bins, got {data.m}")

    def _bins_for(self, params: ParamVector, design: Any) -> int:
        if self.bins is not None:
            return self.bins
        if design is not None:
            return int(design)
        raise ValueError(f"Family '{self.name}' needs a bin count to build its distribution")

    def num_params(self, design: Any = None) -> int | None:
        return 1

    def make_params(self, values: Sequence[float], design: Any = None) -> ParamVector:
        params = super().make_params(values, design)
        if params.values[0] < 0:
            raise ValueError(f"Zipf power must be non-negative, got {params.values[0]}")
        return params

    def design_of(self, data: Dataset) -> Any:
        # number of bins, so an unconfigured family can still rebuild the pmf
        return data.m

    def _estimate(self, data: Counts) -> FitResult:
        return zipf_mle(data, theta_max=self.theta_max)

    def _sample(self, params: ParamVector, design: Any, n: int, rng: np.random.Generator) -> Counts:
        pmf = self._fitted_distribution(params, design).pmf_array()
        return Counts(counts=rng.multinomial(n, pmf))

    def _fitted_distribution(self, params: ParamVector, design: Any) -> FittedDistribution:
        return FittedDistribution(shape=DataShape.COUNTS, pmf=zipf_pmf(params.values[0], self._bins_for(params, design)))
