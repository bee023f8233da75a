"""Exception hierarchy for the simulator."""

from typing import Optional


class WLANMabError(Exception):
    """Base class for all simulator errors."""


class ConfigError(WLANMabError, ValueError):
    """Configuration is invalid or inconsistent."""


class InvalidInputError(WLANMabError, ValueError):
    """A numeric input to a model function is out of its domain."""


class ContractViolation(WLANMabError, RuntimeError):
    """An internal precondition of the engine or an agent was violated."""


class SimulationError(WLANMabError, RuntimeError):
    """A simulation run failed."""

    def __init__(self, message: str, seed: Optional[int] = None) -> None:
        super().__init__(message)
        self.seed = seed
