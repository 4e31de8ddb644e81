"""Exception types shared across the package."""


class PowertalkError(Exception):
    pass


class ConfigError(PowertalkError):
    """Bad or unknown configuration input (CLI exit code 2)."""


class BudgetExceededError(PowertalkError):
    """A search/enumeration guard tripped (CLI exit code 3)."""


class DegenerateObservationError(PowertalkError):
    """Observation carries zero posterior mass under the model."""


class EstimationError(PowertalkError):
    """Estimator preconditions violated (e.g. singular normal equations)."""
