class ConfigurationError(ValueError):
    """Invalid model or scenario parameters."""


class SolverFault(RuntimeError):
    """Time stepping produced a non-finite value or failed to converge."""
