"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A request exceeds a hard size or work budget."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite or inconsistent value."""


class ContractError(ValueError):
    """Two inputs violate a structural relation the operation requires."""


class CertificationError(AssertionError):
    """A certified inequality failed beyond tolerance.

    ``replay`` carries a serialized description of the offending instance.
    """

    def __init__(self, message, replay=None):
        super().__init__(message)
        self.replay = replay
