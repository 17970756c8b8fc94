"""Exception hierarchy shared across the package."""


class PswcError(Exception):
    """Base class for all errors raised by pswc."""


class NotAntisymmetric(PswcError):
    """Matrix expected to be antisymmetric is not."""


class Singular(PswcError):
    """Matrix expected to be invertible is (numerically) singular."""


class OddDimension(PswcError):
    """Matrix dimension must be even (phase space is 2n-dimensional)."""


class DimensionMismatch(PswcError):
    """Vector/matrix dimensions do not agree."""


class FactorizationFailed(PswcError):
    """Darboux factorization residual exceeds tolerance."""


class NotPositiveDefinite(PswcError):
    """Matrix expected to be symmetric positive definite is not."""


class GridMismatch(PswcError):
    """Operands sampled on incompatible grids."""


class GridCapExceeded(PswcError):
    """Requested grid exceeds the configured point/memory cap."""


class ResampleInaccurate(PswcError):
    """Off-lattice resampling error estimate exceeds tolerance."""


class OffLatticeReflection(PswcError):
    """Grossmann-Royer center 2*x0 does not lie on the grid lattice."""


class MidpointUnavailable(PswcError):
    """Sampled symbol cannot be evaluated at the requested half-lattice points."""


class NotHermitian(PswcError):
    """Operator matrix is not Hermitian (within tolerance)."""


class NotSymplectic(PswcError):
    """Matrix is not symplectic with respect to the standard form."""


class NotInRange(PswcError):
    """Field is not in the range of the wavepacket transform."""


class DegenerateProjection(PswcError):
    """Pulled-back eigenvector candidate is numerically zero."""


class IndexCap(PswcError):
    """Hermite index exceeds the configured maximum."""


class BoundNotSatisfied(PswcError):
    """Sub-Gaussian envelope bound fails on the grid."""


class BoundaryMassWarning(UserWarning):
    """More than the allowed fraction of field mass sits in the outer shell."""
