"""Exception types raised by heteronet"""


class HeteronetError(ValueError):
    """Base class for all heteronet errors"""


class InvalidParameters(HeteronetError):
    """Model parameters violate the rate orderings C_i > E_i > 0"""


class PreconditionError(HeteronetError):
    """An operation was called outside its documented preconditions"""


class DomainStableManifold(HeteronetError):
    """Point lies on the local stable manifold excluded from a map's domain"""


class DomainUnstableManifold(HeteronetError):
    """Point lies on the local unstable manifold excluded from an inverse map's domain"""


class DomainRange(HeteronetError):
    """Radial coordinate outside the chart of the section"""


class ImageRange(HeteronetError):
    """Point is not in the image of the forward map being inverted"""


class OutsideDomain(HeteronetError):
    """Point is not in the region where a map is defined"""


class SectionMismatch(HeteronetError, TypeError):
    """A map received a point on the wrong cross section"""


class CoincidentManifolds(HeteronetError):
    """gamma = 0: the invariant manifolds of the periodic orbits coincide"""


class NTooSmall(HeteronetError):
    """Turn index N is below the threshold where the slabs fit in the out-regions"""

    def __init__(self, n: int, threshold: float):
        self.n = n
        self.threshold = threshold
        super().__init__(f"N={n} must exceed the threshold {threshold:.6g}")


class EmptyIntersection(HeteronetError):
    """Image of a slab misses the target slab"""

    def __init__(self, i: int, j: int, message: str = ""):
        self.i = i
        self.j = j
        super().__init__(message or f"R(S_{i}) does not meet S_{j}")


class RefinementFailure(HeteronetError):
    """Word realization stopped before the whole word was realized"""

    def __init__(self, depth: int, message: str):
        self.depth = depth
        super().__init__(f"{message} (depth reached: {depth})")


class NoCrossing(HeteronetError):
    """Event function never changes sign on the integrated span"""


class IntegrationError(HeteronetError):
    """ODE integration failed (step-size underflow or blow-up)"""


class ConfigError(HeteronetError):
    """Run configuration is malformed"""
