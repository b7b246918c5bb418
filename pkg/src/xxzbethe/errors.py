"""Exception hierarchy shared by all modules."""


class XXZError(Exception):
    """Base class for every error raised by the package."""


class InvalidSpec(XXZError, ValueError):
    """Chain parameters or excitation data violate their invariants."""


class SingularSystem(XXZError):
    """Discretised integral operator is numerically singular or the interval is invalid."""


class UnboundedBoundary(XXZError):
    """No finite Fermi boundary exists for the requested density."""


class FieldOutOfRange(XXZError, ValueError):
    """Magnetic field lies outside the window with a finite Fermi zone."""


class NoConvergence(XXZError):
    """An iterative solver exhausted its budget."""


class OutOfRange(XXZError, ValueError):
    """A value lies outside the range of a monotone map being inverted."""


class ContourTooClose(XXZError):
    """Requested contour leaves the strip where the counting function is holomorphic."""


class ZeroDensity(XXZError):
    """Density zero makes a normalised quantity meaningless."""
