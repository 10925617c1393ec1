from gofmc.core.engine import estimate_p_value, exceeds
from gofmc.core.enumeration import exact_p_value_enumeration
from gofmc.core.report import PValueReport, p_value_stderr

__all__ = ["estimate_p_value", "exceeds", "exact_p_value_enumeration", "PValueReport", "p_value_stderr"]
