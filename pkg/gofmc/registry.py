from pathlib import Path

import yaml
from pydantic import BaseModel

from gofmc.data.shape import DataShape
from gofmc.exceptions import DivergenceNotFoundException, FamilyNotFoundException


class FamilyInfo(BaseModel):
    name: str
    shape: DataShape
    description: str = ""
    options: dict = {}


class DivergenceInfo(BaseModel):
    name: str
    shapes: list[DataShape]
    description: str = ""


class Registry:
    _instance = None
    _initialized = False
    families: list[FamilyInfo] = []
    divergences: list[DivergenceInfo] = []
    defaults: dict = {}
    calibration: dict = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Registry, cls).__new__(cls)
        return cls._instance

    def __init__(self):
        if not Registry._initialized:
            self._initialize()
            Registry._initialized = True

    def _initialize(self):
        yaml_path = Path(__file__).parent / "registry.yaml"

        with open(yaml_path, "r") as file:
            data = yaml.safe_load(file)

        self.families = [
            FamilyInfo(name=name, shape=DataShape(info["shape"]), description=info.get("description", ""), options=info.get("options") or {})
            for name, info in data.get("FAMILIES", {}).items()
        ]
        self.divergences = [
            DivergenceInfo(name=name, shapes=[DataShape(s) for s in info["shapes"]], description=info.get("description", ""))
            for name, info in data.get("DIVERGENCES", {}).items()
        ]
        self.defaults = data.get("DEFAULTS", {})
        self.calibration = data.get("CALIBRATION", {})

    def get_family(self, name: str) -> FamilyInfo:
        if not self.families:
            self._initialize()

        for family in self.families:
            if family.name == name:
                return family

        raise FamilyNotFoundException(f"No model family named '{name}' (available: {', '.join(f.name for f in self.families)})")

    def get_divergence(self, name: str) -> DivergenceInfo:
        if not self.divergences:
            self._initialize()

        for divergence in self.divergences:
            if divergence.name == name:
                return divergence

        raise DivergenceNotFoundException(
            f"No divergence named '{name}' (available: {', '.join(d.name for d in self.divergences)})"
        )


# Global instance
REGISTRY = Registry()
