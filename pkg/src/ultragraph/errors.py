"""Exception hierarchy shared by all ultragraph modules."""


class UltragraphError(ValueError):
    """Base class for every error raised by ultragraph."""


class InputError(UltragraphError):
    """Malformed edge-list input; carries the 1-based offending line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateEdge(InputError):
    pass


class NonPositiveWeight(InputError):
    pass


class MalformedLine(InputError):
    pass


class DisconnectedGraph(UltragraphError):
    pass


class FewerThanTwoPoints(UltragraphError):
    pass


class NotUltrametric(UltragraphError):
    pass


class InvalidPartition(UltragraphError):
    pass


class ZeroSpectralGap(UltragraphError):
    pass


class NotSymmetric(UltragraphError):
    pass


class DimensionMismatch(UltragraphError):
    pass


class IntervalViolation(UltragraphError):
    """Eigenvalue sandwich failed; ``worst`` is (index, lower, value, upper)."""

    def __init__(self, message, worst):
        self.worst = worst
        super().__init__(message)


class DegenerateSpectrum(UltragraphError):
    pass


class NotPositiveSemidefinite(UltragraphError):
    pass


class OrderUnavailable(UltragraphError):
    pass


class PoleInC(UltragraphError):
    pass


class Divergent(UltragraphError):
    pass


class HypothesisViolated(UltragraphError):
    pass
