class RenewError(Exception):
    """Base class for planner errors."""


class InvalidEnvironment(RenewError, ValueError):
    """The environment file or object violates a world-model invariant."""


class AssumptionViolated(RenewError, ValueError):
    """The vehicle cannot overcome the current somewhere it is asked to go."""


class InfeasiblePlan(RenewError):
    """No channel admits a feasible path."""


class InvalidQuery(RenewError, ValueError):
    """Start or goal is outside free space, or a parameter is out of range."""
