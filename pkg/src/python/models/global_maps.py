"""Flow-box transitions between the local charts and the gamma unfolding"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..core.errors import DomainRange, ImageRange, OutsideDomain, SectionMismatch
from ..core.model import ModelParams
from ..core.sections import SectionId, SectionPoint
from ..utils.utilities import angle_offset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OutRegion:
    """C_i^out: r2_out in [1-eps_out, 1] and phi2_out within eps_out of theta_i (half-open)"""
    index: int
    theta: float
    half_width: float

    def contains_angle(self, phi2: float) -> bool:
        d = angle_offset(phi2, self.theta)
        return -self.half_width <= d < self.half_width

    def contains(self, q: SectionPoint) -> bool:
        if q.section is not SectionId.SIGMA2_OUT:
            return False
        return q.manifold_distance <= self.half_width and self.contains_angle(q.phi2)


def out_regions(params: ModelParams) -> Tuple[OutRegion, OutRegion]:
    return (
        OutRegion(1, params.theta1_out, params.eps_out),
        OutRegion(2, params.theta2_out, params.eps_out),
    )


def region_symbol(q: SectionPoint, params: ModelParams) -> Optional[int]:
    """Index of the out-region containing q, or None when q lies between them"""
    for region in out_regions(params):
        if region.contains(q):
            return region.index
    return None


def psi02(p: SectionPoint) -> SectionPoint:
    """Sigma0Out -> Sigma2In: identity on (radial, phi1, phi2)"""
    if p.section is not SectionId.SIGMA0_OUT:
        raise SectionMismatch(f"psi02 expects a Sigma0Out point, got {p.section.value}")
    return p.retag(SectionId.SIGMA2_IN)


def psi10(p: SectionPoint) -> SectionPoint:
    """Sigma1Out -> Sigma0In: identity on (radial, phi1, phi2)"""
    if p.section is not SectionId.SIGMA1_OUT:
        raise SectionMismatch(f"psi10 expects a Sigma1Out point, got {p.section.value}")
    return p.retag(SectionId.SIGMA0_IN)


class Unfolding(ABC):
    """
    Chart matching of Sigma2Out onto Sigma1In for the gamma-perturbed transition.

    All methods work with u = 1 - r2_out and s = 1 - r1_in, the distances to the
    tori W^u_loc(C2) and W^s_loc(C1).
    """

    name = "abstract"

    @abstractmethod
    def image(self, u: float, phi1_out: float, phi2_out: float, gamma: float,
              params: ModelParams) -> Tuple[float, float, float]:
        """(u, phi1_out, phi2_out) -> (s, phi1_in, phi2_in)"""

    @abstractmethod
    def preimage(self, s: float, phi1_in: float, phi2_in: float, gamma: float,
                 params: ModelParams) -> Tuple[float, float, float]:
        """(s, phi1_in, phi2_in) -> (u, phi1_out, phi2_out)"""

    @abstractmethod
    def torus_image_gap(self, phi1_in: float, gamma: float, params: ModelParams) -> float:
        """s along the image of the torus {r2_out = 1}, as a function of phi1_in"""


class TransverseUnfolding(Unfolding):
    """
    s = u + gamma*c(phi2_out), phi1_in = phi2_out, phi2_in = phi1_out.

    c(phi) = cos(phi - m) - cos(D/2) with m the midpoint of theta1_out and
    theta2_out and D their separation; c vanishes exactly at theta1_out and
    theta2_out, so at gamma > 0 the torus r2_out = 1 crosses r1_in = 1 along
    the two circles phi1_in = theta_i. At gamma = 0 the map is a relabeling.
    """

    name = "transverse"

    @staticmethod
    def _half_separation(params: ModelParams) -> float:
        return 0.5 * ((params.theta2_out - params.theta1_out) % (2.0 * math.pi))

    def profile(self, phi: float, params: ModelParams) -> float:
        """c(phi), evaluated from the offset to the nearest zero for accuracy"""
        half = self._half_separation(params)
        d1 = angle_offset(phi, params.theta1_out)
        d2 = angle_offset(phi, params.theta2_out)
        if abs(d1) <= abs(d2):
            return math.sin(d1) * math.sin(half) - 2.0 * math.sin(0.5 * d1) ** 2 * math.cos(half)
        return -math.sin(d2) * math.sin(half) - 2.0 * math.sin(0.5 * d2) ** 2 * math.cos(half)

    def profile_slope(self, phi: float, params: ModelParams) -> float:
        half = self._half_separation(params)
        mid = params.theta1_out + half
        return -math.sin(phi - mid)

    def solve_offset(self, i: int, value: float, params: ModelParams) -> float:
        """
        Offset d from theta_i^out with c(theta_i + d) = value, on the branch through d = 0.

        Raises:
            ImageRange: value is not attained on that branch
        """
        half = self._half_separation(params)
        target = value + math.cos(half)
        if not -1.0 <= target <= 1.0:
            raise ImageRange(f"c = {value} is not attained near theta_{i}")
        if i == 1:
            if abs(half - 0.5 * math.pi) < 1e-15:
                return math.asin(value)
            return half - math.acos(target)
        if abs(half - 0.5 * math.pi) < 1e-15:
            return -math.asin(value)
        return math.acos(target) - half

    def image(self, u, phi1_out, phi2_out, gamma, params):
        return u + gamma * self.profile(phi2_out, params), phi2_out, phi1_out

    def preimage(self, s, phi1_in, phi2_in, gamma, params):
        return s - gamma * self.profile(phi1_in, params), phi2_in, phi1_in

    def torus_image_gap(self, phi1_in, gamma, params):
        return params.surf_amp * gamma * self.profile(phi1_in, params)


class RectangularShiftUnfolding(Unfolding):
    """
    Literal X3 + gamma shift of the rectangular coordinates.

    With X3 + i*X4 = r2_out*exp(i*phi2_out): r1_in = |X3 + gamma + i*X4|,
    phi1_in = arg(X3 + gamma + i*X4) lifted next to phi2_out, phi2_in = phi1_out.
    """

    name = "rectangular"

    @staticmethod
    def _one_minus_sqrt(x: float) -> float:
        # 1 - sqrt(1 + x) without cancellation
        return -x / (1.0 + math.sqrt(1.0 + x))

    def image(self, u, phi1_out, phi2_out, gamma, params):
        r = 1.0 - u
        x = -u * (2.0 - u) + 2.0 * gamma * r * math.cos(phi2_out) + gamma * gamma
        s = self._one_minus_sqrt(x)
        arg = math.atan2(r * math.sin(phi2_out), r * math.cos(phi2_out) + gamma)
        phi1_in = phi2_out + angle_offset(arg, phi2_out)
        return s, phi1_in, phi1_out

    def preimage(self, s, phi1_in, phi2_in, gamma, params):
        radius = 1.0 - s
        x = -s * (2.0 - s) - 2.0 * gamma * radius * math.cos(phi1_in) + gamma * gamma
        u = self._one_minus_sqrt(x)
        arg = math.atan2(radius * math.sin(phi1_in), radius * math.cos(phi1_in) - gamma)
        phi2_out = phi1_in + angle_offset(arg, phi1_in)
        return u, phi2_in, phi2_out

    def torus_image_gap(self, phi1_in, gamma, params):
        radius = gamma * math.cos(phi1_in) + math.sqrt(1.0 - (gamma * math.sin(phi1_in)) ** 2)
        return params.surf_amp * (1.0 - radius)


DEFAULT_UNFOLDING = TransverseUnfolding()

UNFOLDINGS = {
    TransverseUnfolding.name: TransverseUnfolding,
    RectangularShiftUnfolding.name: RectangularShiftUnfolding,
}


def psi21(p: SectionPoint, gamma: float, params: ModelParams,
          unfolding: Unfolding = DEFAULT_UNFOLDING) -> SectionPoint:
    """
    Transition from C1^out u C2^out in Sigma2Out to Sigma1In.

    Raises:
        OutsideDomain: p is not in C1^out u C2^out
        DomainRange: the image lies past W^s_loc(C1) or outside the section radius
    """
    if p.section is not SectionId.SIGMA2_OUT:
        raise SectionMismatch(f"psi21 expects a Sigma2Out point, got {p.section.value}")
    if region_symbol(p, params) is None:
        raise OutsideDomain(f"point ({p.radial}, phi2={p.phi2}) is not in C1^out or C2^out")
    s, phi1_in, phi2_in = unfolding.image(p.manifold_distance, p.phi1, p.phi2, gamma, params)
    if s < 0.0:
        raise DomainRange(f"image lies past W^s_loc(C1) (1 - r1_in = {s:.3g})")
    if s > params.eps:
        raise DomainRange(f"image lies outside Sigma1In (1 - r1_in = {s:.3g} > eps)")
    return SectionPoint.from_gap(SectionId.SIGMA1_IN, s, phi1_in, phi2_in)


def psi21_inverse(p: SectionPoint, gamma: float, params: ModelParams,
                  unfolding: Unfolding = DEFAULT_UNFOLDING) -> SectionPoint:
    """
    Inverse of psi21.

    Raises:
        ImageRange: the preimage is not in C1^out u C2^out
    """
    if p.section is not SectionId.SIGMA1_IN:
        raise SectionMismatch(f"psi21_inverse expects a Sigma1In point, got {p.section.value}")
    u, phi1_out, phi2_out = unfolding.preimage(p.manifold_distance, p.phi1, p.phi2, gamma, params)
    if u < 0.0:
        raise ImageRange(f"preimage lies beyond W^u_loc(C2) (1 - r2_out = {u})")
    q = SectionPoint.from_gap(SectionId.SIGMA2_OUT, u, phi1_out, phi2_out)
    if region_symbol(q, params) is None:
        raise ImageRange("preimage is not in C1^out or C2^out")
    return q


def transverse_crossings(gamma: float, params: ModelParams, num: int = 720,
                         unfolding: Unfolding = DEFAULT_UNFOLDING) -> np.ndarray:
    """
    Angles phi2_out where the image of the torus {r2_out = 1} crosses {r1_in = 1}.

    Returns the sign-change locations of s(phi) over one fundamental domain.
    """
    phis = np.linspace(0.0, 2.0 * math.pi, num, endpoint=False) + 0.5 * math.pi / num
    gaps = np.array([unfolding.image(0.0, 0.0, phi, gamma, params)[0] for phi in phis])
    signs = np.sign(gaps)
    changes = np.nonzero(signs != np.roll(signs, -1))[0]
    return phis[changes]
