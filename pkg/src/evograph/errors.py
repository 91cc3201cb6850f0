"""Exception hierarchy shared by all modules."""


class EvographError(Exception):
    """Base class for package errors."""


class OutOfRange(EvographError, ValueError):
    """A model parameter violates its admissible range.

    ``inequality`` names the violated constraint, e.g. ``"1/2 < alpha <= 1"``.
    """

    def __init__(self, name, inequality, value):
        self.name = name
        self.inequality = inequality
        self.value = value
        super().__init__(f"{name}={value!r} violates {inequality}")


class DegenerateEpsilon(EvographError, ValueError):
    pass


class EmptyGraph(EvographError, ValueError):
    pass


class QuadratureFailure(EvographError, ArithmeticError):
    pass


class UnstableEvaluation(EvographError, ArithmeticError):
    pass


class NoConvergence(EvographError, ArithmeticError):
    pass


class ConjecturedRegime(EvographError, ValueError):
    """No theoretical degree sequence exists for alpha1 >= 2*alpha_c."""


class TruncationTooSmall(EvographError, ValueError):
    pass


class NegativeMass(EvographError, ArithmeticError):
    pass


class WindowTooSparse(EvographError, ValueError):
    pass
