class GofmcException(Exception):
    """Base exception class for all goodness-of-fit exceptions."""
    pass

class InvalidDatasetException(GofmcException):
    """Exception raised when a dataset does not match the shape or size a family expects."""
    pass

class DatasetParseException(GofmcException):
    """Exception raised when a data file cannot be parsed."""
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

class EstimationException(GofmcException):
    """Exception raised when a parameter estimator fails."""
    pass

class FittedMeansOverflowException(EstimationException):
    """Exception raised when a fitted Poisson mean overflows."""
    def __init__(self, message: str, row: int):
        self.row = row
        super().__init__(message)

class ReplicateFailureException(GofmcException):
    """Exception raised when too many synthetic replicates fail to estimate."""
    def __init__(self, message: str, failures: int = 0, num_simulations: int = 0):
        self.failures = failures
        self.num_simulations = num_simulations
        super().__init__(message)

class EnumerationBudgetException(GofmcException):
    """Exception raised when exact enumeration is requested for an instance that is too large."""
    pass

class FamilyNotFoundException(GofmcException):
    """Exception raised when the model family is not found in the registry."""
    pass

class DivergenceNotFoundException(GofmcException):
    """Exception raised when the divergence is not found in the registry."""
    pass

class ConfigurationException(GofmcException):
    """Exception raised when a run or calibration configuration is invalid."""
    pass

class CalibrationException(GofmcException):
    """Exception raised when a calibration replicate fails."""
    def __init__(self, message: str, replicate: int):
        self.replicate = replicate
        super().__init__(f"replicate {replicate}: {message}")
