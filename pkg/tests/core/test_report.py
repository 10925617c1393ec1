import io
import math

import pytest
from pydantic import ValidationError
from rich.console import Console

from gofmc.core.report import PValueReport, p_value_fraction, p_value_stderr
from gofmc.data.permutation import Permutation
from gofmc.models.base import FitResult, ParamVector


@pytest.fixture
def fit():
    return FitResult(params=ParamVector(values=(1.25,), permutation=Permutation(values=(2, 1, 3))), log_likelihood=-10.0)


def make_report(fit, exceed_count=30, num_simulations=100, excluded=0, plus_one=False):
    p = p_value_fraction(exceed_count, num_simulations, plus_one)
    return PValueReport(
        p_value=p,
        std_error=p_value_stderr(p, num_simulations),
        observed_divergence=4.5,
        num_simulations=num_simulations,
        requested_simulations=num_simulations + excluded,
        exceed_count=exceed_count,
        excluded_replicates=excluded,
        theta_hat=fit.params,
        fit=fit,
        seed=7,
        model="sorted_zipf",
        divergence="kendall",
        plus_one=plus_one,
    )


def test_p_value_stderr():
    assert p_value_stderr(0.0, 10) == 0.0
    assert p_value_stderr(1.0, 1) == 0.0
    assert abs(p_value_stderr(0.5, 100) - 0.05) < 1e-15
    assert abs(p_value_stderr(0.2, 400) - math.sqrt(0.2 * 0.8 / 400)) < 1e-15


def test_p_value_stderr_preconditions():
    with pytest.raises(ValueError):
        p_value_stderr(0.5, 0)
    with pytest.raises(ValueError):
        p_value_stderr(1.5, 10)


def test_p_value_fraction():
    assert p_value_fraction(3, 10) == 0.3
    assert p_value_fraction(0, 99, plus_one=True) == 0.01


def test_report_json_keys(fit):
    data = make_report(fit).to_json()
    assert list(data) == [
        "p_value",
        "std_error",
        "observed_divergence",
        "num_simulations",
        "exceed_count",
        "excluded_replicates",
        "theta_hat",
        "phi_hat",
        "at_boundary",
        "plus_one",
        "seed",
        "model",
        "divergence",
    ]
    assert data["p_value"] == 0.3
    assert data["phi_hat"] == [2, 1, 3]


def test_report_without_permutation():
    plain = FitResult(params=ParamVector(values=(0.5,)), log_likelihood=-3.0)
    report = make_report(plain)
    assert report.phi_hat is None
    assert "phi_hat" not in report.to_json()


def test_report_consistency_is_checked(fit):
    """A report whose P-value disagrees with its counts cannot be built"""
    report = make_report(fit)
    with pytest.raises(ValidationError):
        PValueReport(**{**report.model_dump(), "p_value": 0.31})
    with pytest.raises(ValidationError):
        PValueReport(**{**report.model_dump(), "exceed_count": 101, "p_value": 1.01})
    with pytest.raises(ValidationError):
        PValueReport(**{**report.model_dump(), "requested_simulations": 150})


def test_report_with_exclusions(fit):
    report = make_report(fit, exceed_count=10, num_simulations=98, excluded=2)
    assert report.requested_simulations == 100
    assert report.to_json()["excluded_replicates"] == 2


def test_report_rprint(fit):
    buffer = io.StringIO()
    make_report(fit, excluded=1).rprint(Console(file=buffer, width=100))
    text = buffer.getvalue()
    assert "P-value" in text
    assert "1 excluded" in text
    assert "sorted_zipf" in text
