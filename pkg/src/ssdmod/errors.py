"""Exception taxonomy shared across the package.

Every failure mode that a caller can act on gets its own class; the CLI
maps these onto its exit-code contract (2 = bad input, 3 = precision or
solver cap, 4 = domain violation).
"""


class SsdmodError(Exception):
    """Base class for all package errors."""


class BadParameter(SsdmodError):
    """Constructor or CLI parameter outside its documented domain."""


class DescriptorMismatch(SsdmodError):
    """Operands belong to different field / Witt-ring descriptors."""


class DivisionByZero(SsdmodError):
    """Inverse of zero in a field or of a non-unit in a Witt ring."""


class NotDivisible(SsdmodError):
    """divide-by-p applied to an element of valuation zero."""


class NotUnimodular(SsdmodError):
    """Matrix inverse requested for a matrix whose determinant is not a unit."""


class NotContained(SsdmodError):
    """Lattice index requested for a pair without containment."""


class PrecisionExhausted(SsdmodError):
    """A decision would read coordinates at or beyond the effective precision."""

    def __init__(self, msg="", suggested_precision=None):
        super().__init__(msg)
        self.suggested_precision = suggested_precision


class NoStabilization(SsdmodError):
    """A fixed-point or closure iteration exceeded its cap."""


class InconclusiveCutoff(SsdmodError):
    """The f-profile did not stabilize before I_max."""


class BoundViolated(SsdmodError):
    """A proved bound (q <= d-1, m <= q+1, ...) failed; hard error."""


class CrosscheckFailed(SsdmodError):
    """Two independent computations of the same invariant disagree."""


class NotDieudonne(SsdmodError):
    """Matrix fails the Dieudonne-module integrality conditions."""


class ExtensionCapExceeded(SsdmodError):
    """Field-extension escalation passed the configured cap."""


class NoInvertibleSolution(SsdmodError):
    """Lang base equation solved, but no invertible representative found."""

    def __init__(self, msg="", solution_dim=None):
        super().__init__(msg)
        self.solution_dim = solution_dim


class NotInO(SsdmodError):
    """Element is not in the endomorphism span O at effective precision."""


class NotSymplectic(SsdmodError):
    """Element fails iota(g) * g = 1."""


class WitnessNotFound(SsdmodError):
    """Best-effort polarized witness search exhausted; inconclusive, not a disproof."""


class IncompatibleModule(SsdmodError):
    """A quasi-polarization fails one of its invariants against the module."""


class NotFound(SsdmodError):
    """A required algebraic element (theta, generator, root) does not exist."""
