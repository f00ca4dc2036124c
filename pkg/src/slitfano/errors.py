"""Exception hierarchy shared by all slitfano modules."""


class SlitFanoError(Exception):
    """Base class for every error raised by the library."""


class BranchPointProximity(SlitFanoError):
    """Real frequency too close to a Rayleigh branch point |kappa_n|."""


class SingularArgument(SlitFanoError):
    """Kernel evaluated at coincident source and target points."""


class NonConvergence(SlitFanoError):
    """A series did not reach the requested tolerance within its term cap."""


class ModeResonance(SlitFanoError):
    """Frequency sits on a cavity resonance of a slit (sin of a mode wavenumber vanishes)."""


class QuadratureFailure(SlitFanoError):
    """Quadrature produced non-finite entries."""


class SingularSystem(SlitFanoError):
    """Discrete boundary-integral system is numerically singular.

    Attributes:
        condition: Estimated 1-norm condition number of the system.
    """

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class OutsideValidRegion(SlitFanoError):
    """Evaluation point lies outside the region where a formula is valid."""


class DivisionByZeroLambda(SlitFanoError):
    """An eigenvalue lambda vanished exactly (frequency is a resonance)."""


class ContourThroughZero(SlitFanoError):
    """Argument-principle contour passes through (or too near) a zero."""


class BranchCut(SlitFanoError):
    """Contour crosses a branch cut of a Rayleigh wavenumber zeta_n."""


class NoConvergence(SlitFanoError):
    """Root refinement exhausted its iteration budget."""


class EscapedRegion(SlitFanoError):
    """Root iterate left the box it was seeded in."""


class RootCountMismatch(SlitFanoError):
    """Argument-principle count disagrees with the refined root."""


class FeatureNotFound(SlitFanoError):
    """Fano dip/peak pair not bracketed within the window cap.

    Attributes:
        best: Best extrema seen before giving up, as a dict.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best or {}


class SingularOperator(SlitFanoError):
    """A reduced operator could not be inverted."""


class ConfigError(SlitFanoError):
    """Malformed run configuration.

    Attributes:
        line: 1-based line number of the offending entry, or None.
    """

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
