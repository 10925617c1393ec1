import logging
from typing import Any, Callable

import numpy as np
from scipy.special import gammaln, xlogy

from gofmc.data.dataset import Dataset, RegressionPairs
from gofmc.data.shape import DataShape
from gofmc.exceptions import EstimationException, FittedMeansOverflowException
from gofmc.models.base import FitResult, FittedDistribution, ModelFamily, ParamVector

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 100
DEVIANCE_TOLERANCE = 1e-10
SCORE_TOLERANCE = 1e-10
MAX_HALVINGS = 30
INIT_EPSILON = 1e-8
# largest eta whose exp is still a finite double
MAX_ETA = np.log(np.finfo(np.float64).max)

DesignBuilder = Callable[[np.ndarray], np.ndarray]


def polynomial_design(x: np.ndarray, degree: int = 3) -> np.ndarray:
    """Rows (1, x_k, x_k**2, ..., x_k**degree)."""
    if degree < 0:
        raise ValueError(f"Polynomial degree must be non-negative, got {degree}")
    return np.vander(np.asarray(x, dtype=np.float64), N=degree + 1, increasing=True)


def poisson_glm_fitted_means(coefficients: np.ndarray, design: np.ndarray) -> np.ndarray:
    """
    mu_k = exp(row_k . theta). Underflow is clamped to the smallest positive double.
    """
    eta = np.asarray(design, dtype=np.float64) @ np.asarray(coefficients, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(eta) | (eta > MAX_ETA))
    if bad.size > 0:
        row = int(bad[0])
        raise FittedMeansOverflowException(
            f"Fitted mean overflows at row {row} (linear predictor {eta[row]})", row=row
        )
    return np.maximum(np.exp(eta), np.finfo(np.float64).tiny)


def poisson_log_likelihood(coefficients: np.ndarray, design: np.ndarray, y: np.ndarray) -> float:
    eta = design @ coefficients
    return float(np.sum(y * eta - np.exp(eta) - gammaln(y + 1.0)))


def poisson_deviance(y: np.ndarray, mu: np.ndarray) -> float:
    return float(2.0 * np.sum(xlogy(y, y / mu) - (y - mu)))


def poisson_glm_fit(
    pairs: RegressionPairs,
    design_builder: DesignBuilder = polynomial_design,
    max_iterations: int = MAX_ITERATIONS,
    tolerance: float = DEVIANCE_TOLERANCE,
) -> FitResult:
    """
    Poisson regression with log link by iteratively reweighted least squares.

    Each iteration solves the weighted least-squares problem with weights mu and working
    response eta + (y - mu) / mu. A step whose deviance is not finite or grows is halved
    toward the previous coefficients.
    """
    X = design_builder(pairs.x_array())
    y = pairs.y_array().astype(np.float64)
    n, p = X.shape

    if n <= p:
        raise EstimationException(f"Poisson regression needs more observations ({n}) than coefficients ({p})")
    if np.linalg.matrix_rank(X) < p:
        raise EstimationException(f"Design matrix is rank deficient (rank < {p})")

    beta = np.zeros(p)
    beta[0] = np.log(y.mean() + INIT_EPSILON)
    mu = poisson_glm_fitted_means(beta, X)
    deviance = poisson_deviance(y, mu)

    converged = False
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        eta = X @ beta
        sqrt_w = np.sqrt(mu)
        z = eta + (y - mu) / mu
        proposal, *_ = np.linalg.lstsq(X * sqrt_w[:, None], z * sqrt_w, rcond=None)

        new_deviance = np.inf
        for _ in range(MAX_HALVINGS + 1):
            try:
                new_mu = poisson_glm_fitted_means(proposal, X)
                new_deviance = poisson_deviance(y, new_mu)
            except FittedMeansOverflowException:
                new_deviance = np.inf
            if np.isfinite(new_deviance) and new_deviance <= deviance * (1 + 1e-9) + 1e-9:
                break
            proposal = (beta + proposal) / 2.0
        else:
            raise EstimationException(f"IRLS diverged at iteration {iteration}: step-halving exhausted")

        change = abs(new_deviance - deviance) / (abs(new_deviance) + 0.1)
        beta, mu, deviance = proposal, new_mu, new_deviance

        score = X.T @ (y - mu)
        if change < tolerance and np.linalg.norm(score) <= SCORE_TOLERANCE * max(1.0, float(y.sum())):
            converged = True
            break

    if not converged:
        logger.warning(f"IRLS did not converge after {max_iterations} iterations (deviance {deviance})")

    return FitResult(
        params=ParamVector(values=beta),
        log_likelihood=poisson_log_likelihood(beta, X, y),
        converged=converged,
        iterations=iteration,
        at_boundary=False,
    )


class PoissonGlmModel(ModelFamily):
    """
    Independent Poisson responses with log mu_k = theta_0 + sum_j theta_j x_k^(j).
    The design is built from the scalar covariates; by default the cubic polynomial.
    """

    shape = DataShape.REGRESSION
    name = "poisson_glm"

    def __init__(self, degree: int = 3, design_builder: DesignBuilder | None = None, **kwargs):
        super().__init__(**kwargs)
        self.degree = int(degree)
        self.custom_design = design_builder is not None
        if design_builder is None:
            degree = self.degree
            design_builder = lambda x: polynomial_design(x, degree)
        self.design_builder = design_builder

    def design_of(self, data: Dataset) -> Any:
        return data.x

    def num_params(self, design: Any = None) -> int | None:
        if design is not None:
            return self.design_matrix(design).shape[1]
        if self.custom_design:
            return None
        return self.degree + 1

    def design_matrix(self, x) -> np.ndarray:
        return self.design_builder(np.asarray(x, dtype=np.float64))

    def _estimate(self, data: RegressionPairs) -> FitResult:
        return poisson_glm_fit(data, design_builder=self.design_builder)

    def _sample(self, params: ParamVector, design: Any, n: int, rng: np.random.Generator) -> RegressionPairs:
        if design is None or len(design) != n:
            raise ValueError(f"Poisson regression sampling needs {n} covariates")
        mu = self._fitted_distribution(params, design).means_array()
        return RegressionPairs(x=design, y=rng.poisson(mu))

    def _fitted_distribution(self, params: ParamVector, design: Any) -> FittedDistribution:
        if design is None:
            raise ValueError("Poisson regression needs covariates to build fitted means")
        means = poisson_glm_fitted_means(params.to_array(), self.design_matrix(design))
        return FittedDistribution(shape=DataShape.REGRESSION, means=means)
