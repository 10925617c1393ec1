import itertools
import logging
import math
from typing import Iterator

from scipy.stats import multinomial

from gofmc.core.engine import exceeds
from gofmc.data.dataset import Counts, Dataset
from gofmc.data.shape import DataShape
from gofmc.divergences.base import DivergenceMeasure
from gofmc.exceptions import EnumerationBudgetException
from gofmc.models.base import ModelFamily

logger = logging.getLogger(__name__)

MAX_ENUMERATION_BINS = 4
MAX_ENUMERATION_DRAWS = 8


def compositions(n: int, m: int) -> Iterator[tuple[int, ...]]:
    """All count vectors of length m summing to n (stars and bars)."""
    for bars in itertools.combinations(range(n + m - 1), m - 1):
        edges = (-1,) + bars + (n + m - 1,)
        yield tuple(edges[j + 1] - edges[j] - 1 for j in range(m))


def exact_p_value_enumeration(model: ModelFamily, divergence: DivergenceMeasure, data: Dataset) -> float:
    """
    Exact P-value Pr(D >= d) for a small categorical instance: sums the multinomial
    probability under p0(theta_hat) of every possible sample of size n whose divergence,
    after re-estimating on that sample, reaches the observed one.
    """
    if model.shape != DataShape.COUNTS or not isinstance(data, Counts):
        raise EnumerationBudgetException("Exact enumeration is only available for categorical counts")
    if data.m > MAX_ENUMERATION_BINS or data.n > MAX_ENUMERATION_DRAWS:
        raise EnumerationBudgetException(
            f"Instance with m={data.m}, n={data.n} exceeds the enumeration budget "
            f"(m <= {MAX_ENUMERATION_BINS}, n <= {MAX_ENUMERATION_DRAWS})"
        )

    fit = model.estimate(data)
    design = model.design_of(data)
    observed = divergence.evaluate(data, model.fitted_distribution(fit.params, design))
    pmf = model.fitted_distribution(model.null_params(fit.params), design).pmf_array()

    terms = []
    for counts in compositions(data.n, data.m):
        probability = float(multinomial.pmf(counts, data.n, pmf))
        if probability == 0.0:
            continue
        outcome = Counts(counts=counts)
        outcome_fit = model.estimate(outcome)
        simulated = divergence.evaluate(outcome, model.fitted_distribution(outcome_fit.params, design))
        if exceeds(simulated, observed):
            terms.append(probability)

    p_value = min(1.0, math.fsum(terms))
    logger.info(f"Exact P-value {p_value} for counts {data.counts} (d={observed})")
    return p_value
