"""Exception types shared across the engine."""


class PolarqdError(Exception):
    """Base class for engine errors."""


class ConstructionError(PolarqdError):
    """Hamiltonian or operator construction produced invalid values."""


class EigensolverError(PolarqdError):
    """An eigensolver failed to converge."""


class DegeneracyError(PolarqdError):
    """States too close in energy for a derivative-coupling division."""


class ContinuityError(PolarqdError):
    """Phase alignment between neighbouring geometries broke down."""


class BasisBreakdownError(PolarqdError):
    """Quasi-diabatic overlap matrix became near-singular (step too large)."""


class DomainError(PolarqdError):
    """An argument left its valid domain."""


class IntegratorError(PolarqdError):
    """A propagator violated its conservation guard."""


class ConfigError(PolarqdError):
    """Invalid run configuration."""
