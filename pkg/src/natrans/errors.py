"""Exception hierarchy shared by all natrans modules."""


class NatransError(Exception):
    """Base class for every error raised by natrans."""


class SignatureMismatchError(NatransError, ValueError):
    """Two operands belong to different algebras (su(2) vs su(1,1))."""


class AlgebraError(NatransError, ValueError):
    """A matrix that should lie in the Lie algebra does not."""


class GroupConstraintError(NatransError, ValueError):
    """A matrix violates the det / (pseudo-)unitarity constraints."""


class DecompositionError(NatransError, ValueError):
    """The Cartan decomposition is undefined (zero or hyperbolic element)."""


class ProfileError(NatransError, ValueError):
    """A driving profile violates its declared asymptotics or regime."""


class ConvergenceError(NatransError, RuntimeError):
    """A numerical procedure exhausted its budget before meeting tolerance.

    ``partial`` carries the best available result, when there is one.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TabulatedProfileError(NatransError, ValueError):
    """Malformed tabulated profile input."""
