import json
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Literal

import click
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from gofmc.api import FamilySpec, get_divergence, get_model_family
from gofmc.calibration import CalibrationSpec, run_calibration
from gofmc.core.engine import estimate_p_value
from gofmc.core.enumeration import exact_p_value_enumeration
from gofmc.exceptions import (
    CalibrationException,
    ConfigurationException,
    DatasetParseException,
    DivergenceNotFoundException,
    EnumerationBudgetException,
    EstimationException,
    FamilyNotFoundException,
    FittedMeansOverflowException,
    GofmcException,
    InvalidDatasetException,
    ReplicateFailureException,
)
from gofmc.io import dump_json, format_tsv, ingest_dataset
from gofmc.registry import REGISTRY

logger = logging.getLogger(__name__)

DEFAULT_SEED = int(REGISTRY.defaults.get("seed", 0))
DEFAULT_SIMULATIONS = int(REGISTRY.defaults.get("simulations", 1000))
DEFAULT_THREADS = int(REGISTRY.defaults.get("threads", 1))

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2


class OutputFormat(Enum):
    JSON = "json"
    TSV = "tsv"


class RunConfig(BaseModel):
    subcommand: Literal["test", "calibrate", "enumerate"]
    model: FamilySpec | None = None
    divergence: str | None = None
    simulations: int = Field(default=DEFAULT_SIMULATIONS, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    input_path: Path | None = None
    output_path: Path | None = None
    output_format: OutputFormat = OutputFormat.JSON
    emit_divergences: Path | None = None
    pvalues_path: Path | None = None
    threads: int = Field(default=DEFAULT_THREADS, ge=1)
    plus_one: bool = False
    quiet: bool = False
    calibration: CalibrationSpec | None = None

    @model_validator(mode="after")
    def complete(self) -> "RunConfig":
        if self.subcommand in ("test", "enumerate"):
            if self.model is None or self.divergence is None or self.input_path is None:
                raise ValueError(f"'{self.subcommand}' needs a model, a divergence and an input file")
            REGISTRY.get_family(self.model.name)
            REGISTRY.get_divergence(self.divergence)
        if self.subcommand == "calibrate" and self.calibration is None:
            raise ValueError("'calibrate' needs a calibration spec")
        return self


def error_object(e: Exception) -> tuple[dict, int]:
    """Machine-readable error and exit code for a failed run."""
    match e:
        case DatasetParseException():
            return {"error": "parse_error", "message": str(e), "line": e.line}, EXIT_ERROR
        case FittedMeansOverflowException():
            return {"error": "estimation_error", "message": str(e), "row": e.row}, EXIT_ERROR
        case EstimationException():
            return {"error": "estimation_error", "message": str(e)}, EXIT_ERROR
        case InvalidDatasetException():
            return {"error": "invalid_dataset", "message": str(e)}, EXIT_ERROR
        case ReplicateFailureException():
            return {"error": "replicate_failure", "message": str(e), "failures": e.failures}, EXIT_ERROR
        case EnumerationBudgetException():
            return {"error": "enumeration_budget", "message": str(e)}, EXIT_ERROR
        case CalibrationException():
            return {"error": "calibration_error", "message": str(e), "replicate": e.replicate}, EXIT_ERROR
        case FamilyNotFoundException() | DivergenceNotFoundException():
            return {"error": "not_found", "message": str(e)}, EXIT_CONFIG
        case ConfigurationException() | ValidationError():
            return {"error": "configuration_error", "message": str(e)}, EXIT_CONFIG
        case _:
            return {"error": "internal_error", "message": str(e)}, EXIT_ERROR


def _fail(e: Exception) -> int:
    error, code = error_object(e)
    logger.error(f"Run failed: {error['message']}")
    click.echo(json.dumps(error, ensure_ascii=False))
    return code


def _write(path: Path | None, text: str) -> None:
    if path is None:
        click.echo(text, nl=False)
    else:
        path.write_text(text, encoding="utf-8")


def run_test(config: RunConfig) -> int:
    """Monte Carlo goodness-of-fit test; exit code 0 whatever the P-value."""
    try:
        model = get_model_family(config.model)
        divergence = get_divergence(config.divergence)
        data = ingest_dataset(config.input_path, model.shape)
        report = estimate_p_value(
            model,
            divergence,
            data,
            num_simulations=config.simulations,
            seed=config.seed,
            threads=config.threads,
            plus_one=config.plus_one,
            max_failure_fraction=float(REGISTRY.defaults.get("max_failure_fraction", 0.01)),
        )
    except GofmcException as e:
        return _fail(e)

    result = report.to_json()
    result["model_options"] = config.model.resolved_options()
    if config.output_format == OutputFormat.JSON:
        _write(config.output_path, dump_json(result))
    else:
        _write(config.output_path, format_tsv(result.items(), header=["key", "value"]))

    if config.emit_divergences is not None:
        rows = enumerate(report.simulated_divergences)
        config.emit_divergences.write_text(format_tsv(rows, header=["simulation", "divergence"]), encoding="utf-8")

    if not config.quiet:
        report.rprint()
    return EXIT_OK


def run_calibrate(config: RunConfig) -> int:
    """Calibration run; writes the summary JSON and one P-value per line."""
    try:
        summary = run_calibration(config.calibration, threads=config.threads)
    except GofmcException as e:
        return _fail(e)

    result = {**summary.to_json(), "spec": config.calibration.model_dump(mode="json")}
    _write(config.output_path, dump_json(result))
    if config.pvalues_path is not None:
        config.pvalues_path.write_text(format_tsv([p] for p in summary.p_values), encoding="utf-8")

    if not config.quiet:
        summary.rprint()
    return EXIT_OK


def run_enumerate(config: RunConfig) -> int:
    """Exact P-value by enumerating every sample of a small categorical instance."""
    try:
        model = get_model_family(config.model)
        divergence = get_divergence(config.divergence)
        data = ingest_dataset(config.input_path, model.shape)
        p_value = exact_p_value_enumeration(model, divergence, data)
        fit = model.estimate(data)
        observed = divergence.evaluate(data, model.fitted_distribution(fit.params, model.design_of(data)))
    except GofmcException as e:
        return _fail(e)

    result = {
        "p_value_exact": p_value,
        "observed_divergence": observed,
        "theta_hat": list(fit.params.values),
    }
    if fit.params.permutation is not None:
        result["phi_hat"] = list(fit.params.permutation.values)
    result.update({"model": config.model.name, "divergence": config.divergence})
    _write(config.output_path, dump_json(result))
    return EXIT_OK


def _family_spec(model: str, bins: int | None, degree: int | None, options: tuple[str, ...]) -> FamilySpec:
    parsed = {}
    for option in options:
        key, sep, value = option.partition("=")
        if not sep or not key.strip():
            raise ConfigurationException(f"Model options must look like key=value, got '{option}'")
        parsed[key.strip()] = yaml.safe_load(value)
    if bins is not None:
        parsed["bins"] = bins
    if degree is not None:
        parsed["degree"] = degree
    return FamilySpec(name=model, options=parsed)


def _build(ctx: click.Context, **fields) -> RunConfig:
    try:
        return RunConfig(**fields)
    except (ValidationError, GofmcException) as e:
        ctx.exit(_fail(e))


model_options = [
    click.option("--model", "model_name", required=True, help="Model family name from the registry."),
    click.option("--bins", type=int, default=None, help="Number of bins (categorical families)."),
    click.option("--degree", type=int, default=None, help="Polynomial degree (poisson_glm)."),
    click.option("--option", "-o", "options", multiple=True, help="Extra family option as key=value."),
    click.option("--divergence", required=True, help="Divergence name from the registry."),
    click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False, path_type=Path)),
    click.option("--output", "output_path", default=None, type=click.Path(dir_okay=False, path_type=Path)),
]


def with_model_options(f):
    for option in reversed(model_options):
        f = option(f)
    return f


@click.group()
@click.option("--log-level", envvar="GOFMC_LOG_LEVEL", default="WARNING", show_default=True)
def cli(log_level: str):
    """Monte Carlo goodness-of-fit tests with estimated nuisance parameters."""
    logging.basicConfig(level=log_level.upper(), format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")


@cli.command()
@with_model_options
@click.option("--simulations", type=int, default=DEFAULT_SIMULATIONS, show_default=True)
@click.option("--seed", type=int, envvar="GOFMC_SEED", default=DEFAULT_SEED, show_default=True)
@click.option("--format", "output_format", type=click.Choice([f.value for f in OutputFormat]), default="json")
@click.option("--emit-divergences", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--threads", type=int, envvar="GOFMC_THREADS", default=DEFAULT_THREADS, show_default=True)
@click.option("--plus-one", is_flag=True, help="Report (k+1)/(l+1) instead of k/l.")
@click.option("--quiet", is_flag=True, help="Do not print the summary panel.")
@click.pass_context
def test(ctx, model_name, bins, degree, options, divergence, input_path, output_path, simulations, seed, output_format, emit_divergences, threads, plus_one, quiet):
    """Estimate the P-value of a fitted model for a dataset."""
    try:
        spec = _family_spec(model_name, bins, degree, options)
    except GofmcException as e:
        ctx.exit(_fail(e))
    config = _build(
        ctx,
        subcommand="test",
        model=spec,
        divergence=divergence,
        simulations=simulations,
        seed=seed,
        input_path=input_path,
        output_path=output_path,
        output_format=OutputFormat(output_format),
        emit_divergences=emit_divergences,
        threads=threads,
        plus_one=plus_one,
        quiet=quiet,
    )
    ctx.exit(run_test(config))


@cli.command()
@click.option("--spec", "spec_path", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--output", "output_path", default=None, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--pvalues", "pvalues_path", default=None, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=None, help="Overrides the seed of the spec.")
@click.option("--threads", type=int, envvar="GOFMC_THREADS", default=DEFAULT_THREADS, show_default=True)
@click.option("--quiet", is_flag=True)
@click.pass_context
def calibrate(ctx, spec_path, output_path, pvalues_path, seed, threads, quiet):
    """Distribution of P-values over replicated experiments (default: desk-scale Zipf spec)."""
    try:
        raw = json.loads(spec_path.read_text(encoding="utf-8")) if spec_path is not None else dict(REGISTRY.calibration)
        if seed is not None:
            raw["seed"] = seed
        spec = CalibrationSpec.model_validate(raw)
    except json.JSONDecodeError as e:
        ctx.exit(_fail(ConfigurationException(f"Calibration spec is not valid JSON: {str(e)}")))
    except (ValidationError, GofmcException) as e:
        ctx.exit(_fail(e))
    config = _build(
        ctx,
        subcommand="calibrate",
        calibration=spec,
        output_path=output_path,
        pvalues_path=pvalues_path,
        threads=threads,
        quiet=quiet,
    )
    ctx.exit(run_calibrate(config))


@cli.command("enumerate")
@with_model_options
@click.pass_context
def enumerate_(ctx, model_name, bins, degree, options, divergence, input_path, output_path):
    """Exact P-value by enumerating all samples (m <= 4 bins, n <= 8 draws)."""
    try:
        spec = _family_spec(model_name, bins, degree, options)
    except GofmcException as e:
        ctx.exit(_fail(e))
    config = _build(
        ctx,
        subcommand="enumerate",
        model=spec,
        divergence=divergence,
        input_path=input_path,
        output_path=output_path,
    )
    ctx.exit(run_enumerate(config))


def main():
    sys.exit(cli())


if __name__ == "__main__":
    main()
