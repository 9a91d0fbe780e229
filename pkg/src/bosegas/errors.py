"""Exception taxonomy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DivergenceError(DomainError):
    """The requested quantity is a divergent series or integral."""


class ResourceError(RuntimeError):
    """The computation would exceed a declared resource cap."""


class SolverError(RuntimeError):
    """A root finder failed to bracket or converge."""


class NumericError(RuntimeError):
    """A numerical routine could not reach its accuracy target."""


class ConfigError(ValueError):
    """A run configuration failed schema validation."""
