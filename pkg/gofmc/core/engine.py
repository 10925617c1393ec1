import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from gofmc.core.report import PValueReport, p_value_fraction, p_value_stderr
from gofmc.core.rng import substream
from gofmc.data.dataset import Dataset
from gofmc.data.shape import DataShape
from gofmc.divergences.base import DivergenceMeasure
from gofmc.exceptions import ConfigurationException, EstimationException, ReplicateFailureException
from gofmc.models.base import ModelFamily, ParamVector

logger = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.01
# relative slack so that mathematically equal divergences computed along different paths tie
TIE_TOLERANCE = 1e-12
BLOCKS_PER_WORKER = 4


def exceeds(simulated: float, observed: float) -> bool:
    return simulated >= observed - TIE_TOLERANCE * abs(observed)


class _Simulator:
    """
    Runs simulations by index: draw from p0(theta_hat) (step 1), re-estimate (step 2),
    compute the divergence against the re-fitted model (step 3).
    """

    def __init__(
        self,
        model: ModelFamily,
        divergence: DivergenceMeasure,
        null_params: ParamVector,
        design,
        n: int,
        seed: int,
    ):
        self.model = model
        self.divergence = divergence
        self.null_params = null_params
        self.design = design
        self.n = n
        self.seed = seed
        # the divergence of a categorical replicate depends only on its counts
        self.memoize = model.shape == DataShape.COUNTS

    def divergence_of(self, synthetic: Dataset) -> float:
        fit = self.model.estimate(synthetic)
        fitted = self.model.fitted_distribution(fit.params, self.design)
        return self.divergence.evaluate(synthetic, fitted)

    def run_block(self, indices: range) -> list[float]:
        cache: dict[Dataset, float] = {}
        results = []
        for i in indices:
            synthetic = self.model.sample(self.null_params, self.design, self.n, substream(self.seed, i))
            if self.memoize and synthetic in cache:
                results.append(cache[synthetic])
                continue
            try:
                value = self.divergence_of(synthetic)
            except EstimationException as e:
                logger.debug(f"Simulation {i} excluded: {str(e)}")
                value = math.nan
            if self.memoize:
                cache[synthetic] = value
            results.append(value)
        return results


def _blocks(num_simulations: int, threads: int) -> list[range]:
    count = max(1, min(num_simulations, threads * BLOCKS_PER_WORKER))
    bounds = np.linspace(0, num_simulations, count + 1).astype(int)
    return [range(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def estimate_p_value(
    model: ModelFamily,
    divergence: DivergenceMeasure,
    data: Dataset,
    num_simulations: int,
    seed: int,
    threads: int = 1,
    plus_one: bool = False,
    max_failure_fraction: float = MAX_FAILURE_FRACTION,
) -> PValueReport:
    """
    Monte Carlo P-value for the simple data-dependent hypothesis "data are draws from p0(theta_hat)".

    The P-value is the fraction of simulated divergences D_i with D_i >= d, where d is the
    divergence of the observed data from the fitted model and every simulation re-estimates
    the parameters from its own synthetic data. Simulation i draws from substream (seed, i),
    so the report does not depend on the number of worker threads.

    Raises:
        EstimationException: the estimator fails on the observed data
        ReplicateFailureException: more than max_failure_fraction of the simulations fail to estimate
    """
    if num_simulations < 1:
        raise ConfigurationException(f"Number of simulations must be at least 1, got {num_simulations}")
    if seed < 0:
        raise ConfigurationException(f"Seed must be non-negative, got {seed}")
    if threads < 1:
        raise ConfigurationException(f"Number of threads must be at least 1, got {threads}")
    if not divergence.supports(model.shape):
        raise ConfigurationException(
            f"Divergence '{divergence.name}' does not apply to family '{model.name}' ({model.shape.value} data)"
        )

    fit = model.estimate(data)
    design = model.design_of(data)
    observed = divergence.evaluate(data, model.fitted_distribution(fit.params, design))
    logger.info(f"Fitted '{model.name}' to n={data.n}: theta_hat={fit.params.values}, d={observed}")
    if fit.at_boundary:
        logger.warning(f"Estimate for '{model.name}' lies on the parameter boundary: {fit.params.values}")
    if not fit.converged:
        logger.warning(f"Estimator for '{model.name}' did not converge on the observed data")

    simulator = _Simulator(model, divergence, model.null_params(fit.params), design, data.n, seed)
    blocks = _blocks(num_simulations, threads)
    if threads == 1:
        block_results = [simulator.run_block(block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            block_results = list(executor.map(simulator.run_block, blocks))
    simulated = [value for block in block_results for value in block]

    failures = sum(1 for value in simulated if math.isnan(value))
    if failures > max_failure_fraction * num_simulations or failures == num_simulations:
        raise ReplicateFailureException(
            f"{failures} of {num_simulations} simulations failed to estimate (limit {max_failure_fraction:.0%})",
            failures=failures,
            num_simulations=num_simulations,
        )
    if failures:
        logger.warning(f"Excluded {failures} of {num_simulations} simulations whose estimation failed")

    effective = num_simulations - failures
    exceed_count = sum(1 for value in simulated if not math.isnan(value) and exceeds(value, observed))
    p_value = p_value_fraction(exceed_count, effective, plus_one)
    logger.info(f"P-value {p_value} from {exceed_count}/{effective} simulations (seed {seed})")

    return PValueReport(
        p_value=p_value,
        std_error=p_value_stderr(p_value, effective),
        observed_divergence=observed,
        num_simulations=effective,
        requested_simulations=num_simulations,
        exceed_count=exceed_count,
        excluded_replicates=failures,
        theta_hat=fit.params,
        fit=fit,
        seed=seed,
        model=model.name,
        divergence=divergence.name,
        plus_one=plus_one,
        simulated_divergences=tuple(simulated),
    )
