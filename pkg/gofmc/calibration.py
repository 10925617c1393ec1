import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import kstest

from gofmc.api import FamilySpec, get_divergence, get_model_family
from gofmc.core.engine import estimate_p_value
from gofmc.core.rng import derive_seed, substream
from gofmc.data.shape import DataShape
from gofmc.exceptions import CalibrationException, ConfigurationException, GofmcException
from gofmc.models.base import ModelFamily, ParamVector
from gofmc.registry import REGISTRY

logger = logging.getLogger(__name__)

NOMINAL_LEVELS = (0.01, 0.05, 0.10)
# two-sided KS critical value at the 1% level is about 1.63 / sqrt(R)
KS_CRITICAL_COEFFICIENT = 1.63


class CalibrationSpec(BaseModel):
    """
    Replicated experiment: draw n observations from the generating family at the true
    parameters, compute the Monte Carlo P-value of the tested family, repeat R times.
    """

    model_config = ConfigDict(frozen=True)

    generating: FamilySpec
    true_params: tuple[float, ...] = ()
    tested: FamilySpec
    divergence: str
    n: int = Field(ge=1)
    simulations: int = Field(ge=1)
    replications: int = Field(ge=1)
    seed: int = Field(ge=0)
    x_min: float = -2.0
    x_max: float = 2.0

    @model_validator(mode="after")
    def valid_references(self) -> "CalibrationSpec":
        generating = REGISTRY.get_family(self.generating.name)
        tested = REGISTRY.get_family(self.tested.name)
        divergence = REGISTRY.get_divergence(self.divergence)
        if generating.shape != tested.shape:
            raise ValueError(f"Generating family '{generating.name}' and tested family '{tested.name}' produce different data shapes")
        if tested.shape not in divergence.shapes:
            raise ValueError(f"Divergence '{divergence.name}' does not apply to {tested.shape.value} data")
        if self.x_max < self.x_min:
            raise ValueError("x_max must not be smaller than x_min")
        # the generating distribution must be buildable before any replicate runs
        family = get_model_family(self.generating)
        family.fitted_distribution(self.truth(family), self.covariates())
        return self

    @classmethod
    def desk_scale(cls) -> "CalibrationSpec":
        return cls.model_validate(REGISTRY.calibration)

    def covariates(self) -> tuple[float, ...] | None:
        if REGISTRY.get_family(self.generating.name).shape != DataShape.REGRESSION:
            return None
        return tuple(np.linspace(self.x_min, self.x_max, self.n).tolist())

    def truth(self, family: ModelFamily) -> ParamVector:
        """The true parameters as the generating family simulates them, including its hypothesized order."""
        return family.null_params(family.make_params(self.true_params, self.covariates()))


class CalibrationSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_values: tuple[float, ...]
    ks_distance: float
    rejection_rates: dict[str, float]
    simulations: int
    excluded_replicates: int = 0

    @property
    def replications(self) -> int:
        return len(self.p_values)

    def uniformity_bound(self) -> float:
        return KS_CRITICAL_COEFFICIENT / math.sqrt(self.replications) + 1.0 / self.simulations

    def rejection_bound(self, alpha: float) -> float:
        return alpha + 3.0 * math.sqrt(alpha * (1.0 - alpha) / self.replications) + 1.0 / self.simulations

    def within_uniformity_band(self) -> bool:
        if self.ks_distance > self.uniformity_bound():
            return False
        return all(self.rejection_rates[f"{alpha:.2f}"] <= self.rejection_bound(alpha) for alpha in NOMINAL_LEVELS)

    def to_json(self) -> dict:
        return {
            "replications": self.replications,
            "simulations": self.simulations,
            "ks_distance": self.ks_distance,
            "uniformity_bound": self.uniformity_bound(),
            "rejection_rates": dict(self.rejection_rates),
            "within_uniformity_band": self.within_uniformity_band(),
            "excluded_replicates": self.excluded_replicates,
        }

    def rprint(self, console=None):
        from rich.console import Console
        from rich.table import Table

        console = console or Console(stderr=True)
        table = Table(title=f"Calibration over {self.replications} replicates (l={self.simulations})")
        table.add_column("level")
        table.add_column("rejection rate")
        table.add_column("bound")
        for alpha in NOMINAL_LEVELS:
            table.add_row(f"{alpha:.2f}", f"{self.rejection_rates[f'{alpha:.2f}']:.4f}", f"{self.rejection_bound(alpha):.4f}")
        console.print(table)
        style = "green" if self.within_uniformity_band() else "red"
        console.print(f"[{style}]KS distance from uniform {self.ks_distance:.4f} (bound {self.uniformity_bound():.4f})[/{style}]")


def summarize(p_values, simulations: int, excluded_replicates: int = 0) -> CalibrationSummary:
    p = np.asarray(p_values, dtype=np.float64)
    return CalibrationSummary(
        p_values=tuple(p.tolist()),
        ks_distance=float(kstest(p, "uniform").statistic),
        rejection_rates={f"{alpha:.2f}": float(np.mean(p <= alpha)) for alpha in NOMINAL_LEVELS},
        simulations=simulations,
        excluded_replicates=excluded_replicates,
    )


def run_calibration(spec: CalibrationSpec, threads: int = 1) -> CalibrationSummary:
    """
    Empirical distribution of P-values over replicated experiments. With generating and tested
    families equal the P-values should be close to uniform on [0, 1]; otherwise the rejection
    rates measure power. Replicate r draws its data from substream (seed, r) and runs the
    engine with a seed derived from the same pair, so the summary is reproducible.
    """
    if threads < 1:
        raise ConfigurationException(f"Number of threads must be at least 1, got {threads}")
    if spec.replications < 10:
        logger.warning(f"Only {spec.replications} replications: the uniformity band is not meaningful")

    generating = get_model_family(spec.generating)
    tested = get_model_family(spec.tested)
    divergence = get_divergence(spec.divergence)
    truth = spec.truth(generating)
    design = spec.covariates()

    def replicate(r: int):
        try:
            data = generating.sample(truth, design, spec.n, substream(spec.seed, r, 0))
            report = estimate_p_value(tested, divergence, data, spec.simulations, derive_seed(spec.seed, r, 1))
        except (GofmcException, ValueError) as e:
            raise CalibrationException(str(e), replicate=r) from e
        if (r + 1) % max(1, spec.replications // 10) == 0:
            logger.info(f"Calibration replicate {r + 1}/{spec.replications}")
        return report

    logger.info(
        f"Calibrating '{spec.tested.name}' against '{spec.generating.name}' at {spec.true_params}: "
        f"R={spec.replications}, n={spec.n}, l={spec.simulations}"
    )
    if threads == 1:
        reports = [replicate(r) for r in range(spec.replications)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            reports = list(executor.map(replicate, range(spec.replications)))

    return summarize(
        [report.p_value for report in reports],
        simulations=spec.simulations,
        excluded_replicates=sum(report.excluded_replicates for report in reports),
    )
