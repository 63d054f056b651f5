"""Exception hierarchy shared by every rnsforge module."""


class RnsForgeError(Exception):
    """Base class for all library errors."""


class InvalidModulusError(RnsForgeError, ValueError):
    pass


class InvalidParameterError(RnsForgeError, ValueError):
    pass


class ContractError(RnsForgeError, ValueError):
    """An argument violates a documented precondition."""


class PlanningError(RnsForgeError):
    """A reduction plan could not be built (a stage failed to contract)."""


class CapacityError(RnsForgeError):
    """A request exceeds what the chosen algorithm or parameters can deliver."""


class VerificationError(RnsForgeError):
    """A cover or netlist failed an equivalence check."""
