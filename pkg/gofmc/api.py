from typing import Any

from pydantic import BaseModel

from gofmc.divergences.base import DivergenceMeasure
from gofmc.exceptions import ConfigurationException
from gofmc.models.base import ModelFamily
from gofmc.registry import REGISTRY


class FamilySpec(BaseModel):
    name: str
    options: dict[str, Any] = {}

    def resolved_options(self) -> dict[str, Any]:
        """Registry defaults overridden by the explicit options; unset (None) values dropped."""
        family = REGISTRY.get_family(self.name)
        unknown = set(self.options) - set(family.options)
        if unknown:
            raise ConfigurationException(
                f"Unknown option(s) for family '{self.name}': {', '.join(sorted(unknown))}"
                f" (accepted: {', '.join(sorted(family.options)) or 'none'})"
            )
        merged = {**family.options, **self.options}
        return {k: v for k, v in merged.items() if v is not None}


def get_model_family(spec: FamilySpec) -> ModelFamily:
    """
    Factory function to create a model family instance from its registry name and options.

    Args:
        spec: family name and options (flat key/value pairs)

    Returns:
        ModelFamily: An instance of the requested family

    Raises:
        FamilyNotFoundException: If the family is not in the registry
        ConfigurationException: If the options are invalid for the family
    """
    options = spec.resolved_options()

    try:
        match spec.name:
            case "zipf":
                from gofmc.models.zipf import ZipfModel

                return ZipfModel(**options)
            case "sorted_zipf":
                from gofmc.models.sorted_zipf import SortedZipfModel

                return SortedZipfModel(**options)
            case "poisson_glm":
                from gofmc.models.poisson_glm import PoissonGlmModel

                return PoissonGlmModel(**options)
            case "normal":
                from gofmc.models.normal import NormalModel

                return NormalModel(**options)
            case "categorical":
                from gofmc.models.categorical import CategoricalModel

                if "probabilities" not in options:
                    raise ConfigurationException("Family 'categorical' needs the 'probabilities' option")
                return CategoricalModel(**options)
            case _:
                raise ConfigurationException(f"Family '{spec.name}' is registered but has no implementation")
    except (TypeError, ValueError) as e:
        raise ConfigurationException(f"Invalid options for family '{spec.name}': {str(e)}") from e


def get_divergence(name: str) -> DivergenceMeasure:
    """
    Factory function to create a divergence measure from its registry name.

    Raises:
        DivergenceNotFoundException: If the divergence is not in the registry
    """
    REGISTRY.get_divergence(name)

    match name:
        case "chi2":
            from gofmc.divergences.categorical import ChiSquareDivergence

            return ChiSquareDivergence()
        case "g2":
            from gofmc.divergences.deviance import DevianceDivergence

            return DevianceDivergence()
        case "ks":
            from gofmc.divergences.continuous import KolmogorovSmirnovDivergence

            return KolmogorovSmirnovDivergence()
        case "kendall":
            from gofmc.divergences.ranking import PermutationDivergence

            return PermutationDivergence()
        case _:
            raise ConfigurationException(f"Divergence '{name}' is registered but has no implementation")
