import math
import statistics

import numpy as np
import pytest

from gofmc.core.engine import estimate_p_value, exceeds
from gofmc.core.enumeration import exact_p_value_enumeration
from gofmc.core.rng import derive_seed, substream
from gofmc.data.dataset import Counts, RealSamples, RegressionPairs
from gofmc.data.shape import DataShape
from gofmc.divergences import ChiSquareDivergence, DevianceDivergence, KolmogorovSmirnovDivergence, PermutationDivergence, chi_square
from gofmc.divergences.base import DivergenceMeasure
from gofmc.exceptions import ConfigurationException, EstimationException, ReplicateFailureException
from gofmc.models import CategoricalModel, NormalModel, PoissonGlmModel, SortedZipfModel, ZipfModel
from gofmc.models.base import ParamVector
from gofmc.models.zipf import zipf_mle


@pytest.fixture
def zipf_data():
    return Counts(counts=[22, 9, 6, 4, 3, 2, 2, 1, 1, 0])


def test_exceeds_is_inclusive():
    assert exceeds(2.0, 2.0)
    assert exceeds(2.0 - 1e-15, 2.0)
    assert not exceeds(1.99, 2.0)
    assert exceeds(0.0, 0.0)


def test_p_value_on_grid(zipf_data):
    report = estimate_p_value(ZipfModel(bins=10), ChiSquareDivergence(), zipf_data, num_simulations=200, seed=1)
    assert report.p_value == report.exceed_count / 200
    assert 0.0 <= report.p_value <= 1.0
    assert report.num_simulations == 200
    assert report.excluded_replicates == 0
    assert abs(report.std_error - math.sqrt(report.p_value * (1 - report.p_value) / 200)) < 1e-15
    assert len(report.simulated_divergences) == 200


def test_same_seed_same_report(zipf_data):
    model, divergence = ZipfModel(bins=10), ChiSquareDivergence()
    first = estimate_p_value(model, divergence, zipf_data, num_simulations=300, seed=42)
    second = estimate_p_value(model, divergence, zipf_data, num_simulations=300, seed=42)
    assert first.to_json() == second.to_json()
    assert first.simulated_divergences == second.simulated_divergences


def test_threads_do_not_change_result(zipf_data):
    """Simulation i always uses substream (seed, i), whichever worker runs it"""
    model, divergence = ZipfModel(bins=10), ChiSquareDivergence()
    single = estimate_p_value(model, divergence, zipf_data, num_simulations=257, seed=3, threads=1)
    for threads in (2, 8):
        parallel = estimate_p_value(model, divergence, zipf_data, num_simulations=257, seed=3, threads=threads)
        assert parallel.to_json() == single.to_json()
        assert parallel.simulated_divergences == single.simulated_divergences


def test_different_seeds_differ(zipf_data):
    model, divergence = ZipfModel(bins=10), ChiSquareDivergence()
    first = estimate_p_value(model, divergence, zipf_data, num_simulations=200, seed=1)
    second = estimate_p_value(model, divergence, zipf_data, num_simulations=200, seed=2)
    assert first.simulated_divergences != second.simulated_divergences


def test_single_simulation(zipf_data):
    report = estimate_p_value(ZipfModel(bins=10), ChiSquareDivergence(), zipf_data, num_simulations=1, seed=9)
    assert report.p_value in (0.0, 1.0)
    assert report.std_error == 0.0


def test_plus_one(zipf_data):
    plain = estimate_p_value(ZipfModel(bins=10), ChiSquareDivergence(), zipf_data, num_simulations=99, seed=5)
    shifted = estimate_p_value(ZipfModel(bins=10), ChiSquareDivergence(), zipf_data, num_simulations=99, seed=5, plus_one=True)
    assert shifted.exceed_count == plain.exceed_count
    assert shifted.p_value == (plain.exceed_count + 1) / 100
    assert shifted.to_json()["plus_one"] is True


def test_perfect_fit_gives_p_value_one():
    """Data equal to the fitted expectation has divergence 0, which every simulation reaches"""
    model = CategoricalModel(probabilities=[0.5, 0.25, 0.25])
    report = estimate_p_value(model, ChiSquareDivergence(), Counts(counts=[40, 20, 20]), num_simulations=50, seed=0)
    assert report.observed_divergence == 0.0
    assert report.p_value == 1.0


def test_uniform_counts_hit_boundary():
    report = estimate_p_value(ZipfModel(), ChiSquareDivergence(), Counts(counts=[5, 5, 5, 5]), num_simulations=50, seed=0)
    assert report.theta_hat.values == (0.0,)
    assert report.fit.at_boundary
    assert report.to_json()["at_boundary"] is True


def test_argument_validation(zipf_data):
    model, divergence = ZipfModel(bins=10), ChiSquareDivergence()
    with pytest.raises(ConfigurationException):
        estimate_p_value(model, divergence, zipf_data, num_simulations=0, seed=1)
    with pytest.raises(ConfigurationException):
        estimate_p_value(model, divergence, zipf_data, num_simulations=10, seed=-1)
    with pytest.raises(ConfigurationException):
        estimate_p_value(model, divergence, zipf_data, num_simulations=10, seed=1, threads=0)
    with pytest.raises(ConfigurationException):
        estimate_p_value(model, KolmogorovSmirnovDivergence(), zipf_data, num_simulations=10, seed=1)


def test_observed_estimation_failure_propagates():
    with pytest.raises(EstimationException):
        estimate_p_value(NormalModel(), KolmogorovSmirnovDivergence(), RealSamples(values=[1.0, 1.0]), num_simulations=10, seed=1)


def _flaky_estimator(observed: Counts):
    """Zipf estimator that fails on every synthetic dataset with an odd first count."""

    def estimate(data: Counts):
        if data != observed and data.counts[0] % 2 == 1:
            raise EstimationException("odd first bin")
        return zipf_mle(data)

    return estimate


def test_failed_replicates_are_excluded():
    observed = Counts(counts=[10, 5, 3, 2])
    model = ZipfModel(bins=4, estimator=_flaky_estimator(observed))
    report = estimate_p_value(model, ChiSquareDivergence(), observed, num_simulations=200, seed=4, max_failure_fraction=1.0)

    nan_count = sum(1 for d in report.simulated_divergences if math.isnan(d))
    assert 0 < report.excluded_replicates < 200
    assert report.excluded_replicates == nan_count
    assert report.num_simulations == 200 - nan_count
    assert report.requested_simulations == 200
    assert report.p_value == report.exceed_count / report.num_simulations


def test_too_many_failures_abort():
    observed = Counts(counts=[10, 5, 3, 2])
    model = ZipfModel(bins=4, estimator=_flaky_estimator(observed))
    with pytest.raises(ReplicateFailureException) as e:
        estimate_p_value(model, ChiSquareDivergence(), observed, num_simulations=200, seed=4)
    assert e.value.failures > 2
    assert e.value.num_simulations == 200


def test_all_replicates_failing_abort():
    observed = Counts(counts=[10, 5, 3, 2])

    calls = []

    def estimate(data):
        # only the fit of the observed data succeeds
        calls.append(data)
        if len(calls) > 1:
            raise EstimationException("always")
        return zipf_mle(data)

    model = ZipfModel(bins=4, estimator=estimate)
    with pytest.raises(ReplicateFailureException):
        estimate_p_value(model, ChiSquareDivergence(), observed, num_simulations=20, seed=4, max_failure_fraction=1.0)


def test_sorted_zipf_with_kendall():
    """The fitted order matches the hypothesized one, so d = 0 and the P-value is 1"""
    report = estimate_p_value(
        SortedZipfModel(bins=5), PermutationDivergence(), Counts(counts=[30, 12, 8, 5, 2]), num_simulations=100, seed=2
    )
    assert report.observed_divergence == 0.0
    assert report.p_value == 1.0
    assert report.to_json()["phi_hat"] == [1, 2, 3, 4, 5]


def test_sorted_zipf_wrong_order_is_rejected():
    report = estimate_p_value(
        SortedZipfModel(bins=5), PermutationDivergence(), Counts(counts=[2, 5, 8, 12, 30]), num_simulations=200, seed=2
    )
    assert report.observed_divergence == 1.0
    assert report.p_value < 0.05


def test_poisson_regression_run():
    x = np.linspace(-2.0, 2.0, 40)
    y = substream(12).poisson(np.exp(1.0 + 0.3 * x))
    data = RegressionPairs(x=x, y=y)
    report = estimate_p_value(PoissonGlmModel(degree=1), DevianceDivergence(), data, num_simulations=100, seed=12, threads=4)
    assert report.num_simulations == 100
    assert report.observed_divergence >= 0.0
    assert len(report.theta_hat.values) == 2


def test_agrees_with_exact_enumeration():
    data = Counts(counts=[2, 1, 1])
    model, divergence = ZipfModel(bins=3), ChiSquareDivergence()
    exact = exact_p_value_enumeration(model, divergence, data)
    report = estimate_p_value(model, divergence, data, num_simulations=20_000, seed=17, threads=4)
    assert abs(report.p_value - exact) <= 4.0 * math.sqrt(exact * (1.0 - exact) / 20_000) + 1e-12


class ShiftedObservedDivergence(DivergenceMeasure):
    """chi2, raised by a fixed amount on one particular dataset object only."""

    name = "chi2"
    shapes = (DataShape.COUNTS,)

    def __init__(self, observed: Counts, shift: float):
        self.observed = observed
        self.shift = shift

    def _evaluate(self, data, fitted):
        value = chi_square(data.counts, fitted.pmf)
        return value + self.shift if data is self.observed else value


class ConstantDivergence(DivergenceMeasure):
    name = "constant"
    shapes = (DataShape.COUNTS,)

    def _evaluate(self, data, fitted):
        return 1.0


def test_larger_observed_divergence_never_raises_p_value(zipf_data):
    """Same seed, same simulated divergences; only d moves"""
    model = ZipfModel(bins=10)
    reports = [
        estimate_p_value(model, ShiftedObservedDivergence(zipf_data, shift), zipf_data, num_simulations=300, seed=8)
        for shift in (0.0, 0.5, 1.0, 2.0, 5.0, 20.0)
    ]
    for before, after in zip(reports, reports[1:]):
        assert after.simulated_divergences == before.simulated_divergences
        assert after.observed_divergence > before.observed_divergence
        assert after.p_value <= before.p_value


def test_observed_divergence_above_every_simulation(zipf_data):
    report = estimate_p_value(ZipfModel(bins=10), ShiftedObservedDivergence(zipf_data, 1e6), zipf_data, num_simulations=200, seed=8)
    assert report.observed_divergence > max(report.simulated_divergences)
    assert report.exceed_count == 0
    assert report.p_value == 0.0
    assert report.std_error == 0.0


def test_constant_divergence_gives_p_value_one(zipf_data):
    report = estimate_p_value(ZipfModel(bins=10), ConstantDivergence(), zipf_data, num_simulations=150, seed=8)
    assert report.exceed_count == 150
    assert report.p_value == 1.0
    assert report.std_error == 0.0


@pytest.mark.slow
def test_oracle_equivalence_over_seeds():
    model, divergence = ZipfModel(bins=3), ChiSquareDivergence()
    instances = [(3, 1, 0), (2, 1, 1), (2, 2, 0), (1, 2, 1), (3, 0, 1)]
    passed = total = 0
    for counts in instances:
        data = Counts(counts=counts)
        exact = exact_p_value_enumeration(model, divergence, data)
        for seed in range(100):
            report = estimate_p_value(model, divergence, data, num_simulations=100_000, seed=seed, threads=4)
            total += 1
            passed += abs(report.p_value - exact) <= 3.0 * report.std_error + 1e-12
    assert passed >= 0.99 * total


@pytest.mark.slow
def test_reported_stderr_matches_spread():
    data = ZipfModel(bins=5).sample(ParamVector(values=(1.0,)), None, 60, substream(2024))
    model, divergence = ZipfModel(bins=5), ChiSquareDivergence()
    reports = [estimate_p_value(model, divergence, data, num_simulations=400, seed=derive_seed(2024, r)) for r in range(200)]
    spread = statistics.stdev(r.p_value for r in reports)
    mean_stderr = statistics.fmean(r.std_error for r in reports)
    assert 0.7 * mean_stderr <= spread <= 1.3 * mean_stderr


@pytest.mark.slow
def test_detects_missing_quartic_term():
    """Data with a quartic term tested under the cubic model is rejected most of the time"""
    x = np.linspace(-2.0, 2.0, 200)
    mu = np.exp(1.0 + 0.3 * x + 0.1 * x**4)
    model, divergence = PoissonGlmModel(degree=3), DevianceDivergence()
    rejected = 0
    for seed in range(100):
        data = RegressionPairs(x=x, y=substream(seed, 0).poisson(mu))
        report = estimate_p_value(model, divergence, data, num_simulations=400, seed=derive_seed(seed, 1), threads=4)
        rejected += report.p_value < 0.05
    assert rejected >= 90
