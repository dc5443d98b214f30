"""Cross sections, coordinate charts and lifted-angle bookkeeping"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from .constants import TWO_PI
from .errors import DomainRange, OutsideDomain


class SectionId(Enum):
    """The six cross sections of the network"""
    SIGMA0_IN = "Sigma0In"
    SIGMA0_OUT = "Sigma0Out"
    SIGMA1_IN = "Sigma1In"
    SIGMA1_OUT = "Sigma1Out"
    SIGMA2_IN = "Sigma2In"
    SIGMA2_OUT = "Sigma2Out"


# section -> (fixed coordinate name, fixed value as (a, b) meaning a + b*eps,
#             free radial name, radial value on the local invariant manifold)
_CHARTS = {
    SectionId.SIGMA0_IN: ("r1", (0.0, 1.0), "r2", 0.0),
    SectionId.SIGMA0_OUT: ("r2", (0.0, 1.0), "r1", 0.0),
    SectionId.SIGMA1_IN: ("r2", (0.0, 1.0), "r1", 1.0),
    SectionId.SIGMA1_OUT: ("r1", (1.0, -1.0), "r2", 0.0),
    SectionId.SIGMA2_IN: ("r2", (1.0, -1.0), "r1", 0.0),
    SectionId.SIGMA2_OUT: ("r1", (0.0, 1.0), "r2", 1.0),
}


def manifold_locus(section: SectionId) -> float:
    """Radial value of the local stable/unstable manifold inside the section"""
    return _CHARTS[section][3]


def fixed_coordinate(section: SectionId, eps: float) -> Tuple[str, float]:
    """Name and value of the radial coordinate that is constant on the section"""
    name, (a, b), _, _ = _CHARTS[section]
    return name, a + b * eps


@dataclass(frozen=True)
class SectionPoint:
    """
    A point on one of the six sections.

    radial is the free radial coordinate of the chart; phi1 and phi2 are lifted
    (never reduced) angles. gap, when given, is the exact distance from the
    local invariant-manifold locus, kept because 1 - radial loses all digits
    close to the tori r = 1.
    """
    section: SectionId
    radial: float
    phi1: float
    phi2: float
    gap: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.section, SectionId):
            raise TypeError(f"section must be a SectionId, got {self.section!r}")
        for name in ("radial", "phi1", "phi2"):
            if not math.isfinite(getattr(self, name)):
                raise DomainRange(f"{name} must be finite")
        if self.gap is not None and not self.gap >= 0:
            raise DomainRange(f"gap must be nonnegative, got {self.gap}")

    @classmethod
    def from_gap(cls, section: SectionId, gap: float, phi1: float, phi2: float) -> "SectionPoint":
        """Build a point from its distance to the invariant-manifold locus"""
        locus = manifold_locus(section)
        radial = locus - gap if locus == 1.0 else gap
        return cls(section, radial, phi1, phi2, gap)

    @property
    def manifold_distance(self) -> float:
        if self.gap is not None:
            return self.gap
        return abs(self.radial - manifold_locus(self.section))

    @property
    def on_manifold(self) -> bool:
        return self.manifold_distance == 0.0

    def retag(self, section: SectionId) -> "SectionPoint":
        """Same free coordinates on another section"""
        return replace(self, section=section)

    def reduced(self) -> "SectionPoint":
        return replace(self, phi1=reduce_angle(self.phi1)[0], phi2=reduce_angle(self.phi2)[0])

    def as_row(self) -> dict:
        return {
            "section": self.section.value,
            "radial": self.radial,
            "phi1": self.phi1,
            "phi2": self.phi2,
        }


@dataclass(frozen=True)
class State4:
    """Ambient rectangular coordinates"""
    x1: float
    x2: float
    x3: float
    x4: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4])

    @classmethod
    def from_array(cls, values) -> "State4":
        x1, x2, x3, x4 = (float(v) for v in values)
        return cls(x1, x2, x3, x4)


def reduce_angle(lifted: float) -> Tuple[float, int]:
    """
    Split a lifted angle into its principal part in [0, 2pi) and a winding number.

    Args:
        lifted: Unwound angle

    Returns:
        (principal, winding) with lifted = principal + 2*pi*winding
    """
    if not math.isfinite(lifted):
        raise DomainRange(f"cannot reduce non-finite angle {lifted}")
    winding = math.floor(lifted / TWO_PI)
    principal = lifted - winding * TWO_PI
    if principal >= TWO_PI:
        principal -= TWO_PI
        winding += 1
    elif principal < 0.0:
        principal += TWO_PI
        winding -= 1
    return principal, int(winding)


def reduce_angles(lifted: np.ndarray) -> np.ndarray:
    """Vectorised principal parts in [0, 2pi)"""
    lifted = np.asarray(lifted, dtype=float)
    principal = lifted - np.floor(lifted / TWO_PI) * TWO_PI
    return np.where(principal >= TWO_PI, principal - TWO_PI, principal)


def to_cartesian(p: SectionPoint, eps: float) -> State4:
    """Bipolar coordinates (r1, phi1, r2, phi2) of a section point to R^4"""
    fixed_name, fixed_value = fixed_coordinate(p.section, eps)
    if fixed_name == "r1":
        r1, r2 = fixed_value, p.radial
    else:
        r1, r2 = p.radial, fixed_value
    return State4(
        r1 * math.cos(p.phi1),
        r1 * math.sin(p.phi1),
        r2 * math.cos(p.phi2),
        r2 * math.sin(p.phi2),
    )


def to_section(s: State4, section: SectionId, eps: float, tol: float = 1e-12) -> SectionPoint:
    """
    Read an ambient point in the chart of a section.

    Winding information is not recoverable: angles come back in [0, 2pi).

    Raises:
        OutsideDomain: the fixed radial coordinate differs from its section value by more than tol
    """
    r1 = math.hypot(s.x1, s.x2)
    r2 = math.hypot(s.x3, s.x4)
    fixed_name, fixed_value = fixed_coordinate(section, eps)
    fixed_actual, radial = (r1, r2) if fixed_name == "r1" else (r2, r1)
    if abs(fixed_actual - fixed_value) > tol:
        raise OutsideDomain(
            f"{fixed_name}={fixed_actual} is not on {section.value} ({fixed_name}={fixed_value})"
        )
    phi1 = reduce_angle(math.atan2(s.x2, s.x1))[0]
    phi2 = reduce_angle(math.atan2(s.x4, s.x3))[0]
    return SectionPoint(section, radial, phi1, phi2)


def chart_range(section: SectionId, eps: float, eps_out: float) -> Tuple[float, float]:
    """Admissible interval of the free radial coordinate"""
    if section is SectionId.SIGMA1_IN:
        return 1.0 - eps, 1.0
    if section is SectionId.SIGMA2_OUT:
        return 1.0 - eps_out, 1.0
    if section in (SectionId.SIGMA0_IN, SectionId.SIGMA2_IN):
        return 0.0, eps
    return 0.0, math.inf


def points_to_frame(points: Iterable[SectionPoint]) -> pd.DataFrame:
    """Table of section points with columns section, radial, phi1, phi2"""
    rows: List[dict] = [p.as_row() for p in points]
    return pd.DataFrame(rows, columns=["section", "radial", "phi1", "phi2"])
