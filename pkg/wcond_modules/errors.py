"""
Exception types shared by the wcond modules
"""
from typing import Optional


class InstanceError(ValueError):
    """Malformed instance data; `field` names the offending input field"""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class ConfigError(ValueError):
    """Invalid run configuration"""


class NotPositiveSemidefinite(ValueError):
    """A fractional power was requested for an operator that is not PSD"""


class InvariantViolation(AssertionError):
    """A mathematical invariant that must hold on every instance failed"""

    def __init__(self, message: str, margin: float = float("nan")):
        super().__init__(message)
        self.margin = margin
