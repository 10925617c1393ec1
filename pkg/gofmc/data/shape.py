from enum import Enum


class DataShape(Enum):
    COUNTS = "counts"
    REAL = "real"
    REGRESSION = "regression"
