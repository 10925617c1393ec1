import itertools
import math
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def _zipf_probabilities(theta: float, m: int) -> np.ndarray:
    w = np.arange(1, m + 1, dtype=np.float64) ** (-theta)
    return w / w.sum()


def _zipf_theta_by_bisection(counts: np.ndarray, theta_max: float = 50.0) -> float:
    log_j = np.log(np.arange(1, len(counts) + 1))
    n = counts.sum()

    def score(theta):
        return n * np.dot(_zipf_probabilities(theta, len(counts)), log_j) - np.dot(counts, log_j)

    if score(0.0) <= 1e-10 * max(1.0, n):
        return 0.0
    if score(theta_max) >= 0.0:
        return theta_max
    lo, hi = 0.0, theta_max
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if score(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def _chi2(counts: np.ndarray, pmf: np.ndarray) -> float:
    expected = counts.sum() * pmf
    return float(np.sum((counts - expected) ** 2 / expected))


def brute_force_zipf_chi2_p_value(observed) -> float:
    """
    Exact P-value over all m**n ordered outcomes, with a bisection estimator of its own.
    Independent of the package so it can serve as an oracle for enumeration.
    """
    observed = np.asarray(observed, dtype=np.float64)
    m, n = len(observed), int(observed.sum())
    theta_hat = _zipf_theta_by_bisection(observed)
    pmf = _zipf_probabilities(theta_hat, m)
    d = _chi2(observed, pmf)

    total = []
    for outcome in itertools.product(range(m), repeat=n):
        counts = np.bincount(outcome, minlength=m).astype(np.float64)
        probability = float(np.prod(pmf[list(outcome)]))
        refit = _zipf_probabilities(_zipf_theta_by_bisection(counts), m)
        if _chi2(counts, refit) >= d - 1e-9 * abs(d):
            total.append(probability)
    return math.fsum(total)


@pytest.fixture
def zipf_chi2_oracle():
    return brute_force_zipf_chi2_p_value


@pytest.fixture
def fixtures_dir():
    return FIXTURES
