"""Exception hierarchy shared by all growthnet modules."""


class GrowthnetError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GrowthnetError):
    """Structurally invalid input: bad shapes, negative weights, gamma = 1, ..."""


class AssumptionError(GrowthnetError):
    """Input is well-formed but violates a standing model assumption
    (e.g. rho <= lambda0*(1-gamma), or a disconnected graph where the
    Frobenius theory needs irreducibility)."""


class NumericError(GrowthnetError):
    """A numerical procedure failed: eigensolver did not converge, the
    integrator produced non-finite state, etc."""
