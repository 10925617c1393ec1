import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from gofmc.models.base import FitResult, ParamVector


def p_value_stderr(p_hat: float, num_simulations: int) -> float:
    """Binomial standard error sqrt(P (1 - P) / l) of a Monte Carlo P-value."""
    if num_simulations < 1:
        raise ValueError(f"Number of simulations must be at least 1, got {num_simulations}")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"P-value must lie in [0, 1], got {p_hat}")
    return math.sqrt(p_hat * (1.0 - p_hat) / num_simulations)


def p_value_fraction(exceed_count: int, num_simulations: int, plus_one: bool = False) -> float:
    if plus_one:
        return (exceed_count + 1) / (num_simulations + 1)
    return exceed_count / num_simulations


class PValueReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_value: float
    std_error: float
    observed_divergence: float
    num_simulations: int = Field(ge=1)
    requested_simulations: int = Field(ge=1)
    exceed_count: int = Field(ge=0)
    excluded_replicates: int = Field(default=0, ge=0)
    theta_hat: ParamVector
    fit: FitResult
    seed: int
    model: str
    divergence: str
    plus_one: bool = False
    simulated_divergences: tuple[float, ...] = Field(default=(), exclude=True, repr=False)

    @model_validator(mode="after")
    def consistent(self) -> "PValueReport":
        if self.exceed_count > self.num_simulations:
            raise ValueError(f"exceed_count {self.exceed_count} exceeds num_simulations {self.num_simulations}")
        if self.num_simulations + self.excluded_replicates != self.requested_simulations:
            raise ValueError("num_simulations plus excluded_replicates must equal requested_simulations")
        if self.p_value != p_value_fraction(self.exceed_count, self.num_simulations, self.plus_one):
            raise ValueError(f"p_value {self.p_value} does not match {self.exceed_count}/{self.num_simulations}")
        if self.std_error != p_value_stderr(self.p_value, self.num_simulations):
            raise ValueError(f"std_error {self.std_error} does not match the binomial formula")
        return self

    @property
    def phi_hat(self) -> tuple[int, ...] | None:
        return self.theta_hat.permutation.values if self.theta_hat.permutation is not None else None

    def to_json(self) -> dict:
        data = {
            "p_value": self.p_value,
            "std_error": self.std_error,
            "observed_divergence": self.observed_divergence,
            "num_simulations": self.num_simulations,
            "exceed_count": self.exceed_count,
            "excluded_replicates": self.excluded_replicates,
            "theta_hat": list(self.theta_hat.values),
        }
        if self.phi_hat is not None:
            data["phi_hat"] = list(self.phi_hat)
        data.update(
            {
                "at_boundary": self.fit.at_boundary,
                "plus_one": self.plus_one,
                "seed": self.seed,
                "model": self.model,
                "divergence": self.divergence,
            }
        )
        return data

    def rprint(self, console=None):
        from rich.console import Console
        from rich.panel import Panel

        console = console or Console(stderr=True)
        lines = [
            f"[bold]P-value[/bold]      {self.p_value:.6g} ± {self.std_error:.3g}",
            f"[bold]observed d[/bold]   {self.observed_divergence:.6g} ({self.divergence})",
            f"[bold]simulations[/bold]  {self.exceed_count}/{self.num_simulations} exceed d"
            + (f", {self.excluded_replicates} excluded" if self.excluded_replicates else ""),
            f"[bold]theta_hat[/bold]    {', '.join(f'{v:.6g}' for v in self.theta_hat.values)}",
        ]
        if self.phi_hat is not None:
            lines.append(f"[bold]phi_hat[/bold]      {self.phi_hat}")
        if self.fit.at_boundary:
            lines.append("[yellow]estimate on the parameter boundary[/yellow]")
        console.print(Panel("\n".join(lines), title=f"{self.model} | seed {self.seed}", title_align="right", border_style="magenta"))
