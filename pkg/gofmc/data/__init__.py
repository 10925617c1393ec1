from gofmc.data.dataset import Counts, Dataset, RealSamples, RegressionPairs
from gofmc.data.permutation import Permutation
from gofmc.data.shape import DataShape

__all__ = ["Counts", "Dataset", "RealSamples", "RegressionPairs", "Permutation", "DataShape"]
