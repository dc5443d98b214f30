"""Closed-form local transition maps near O, C1 and C2"""

import math
from dataclasses import dataclass
from typing import Tuple

from ..core.errors import DomainRange, DomainStableManifold, ImageRange, SectionMismatch
from ..core.model import ModelParams
from ..core.sections import SectionId, SectionPoint


@dataclass(frozen=True)
class LocalNode:
    """Linearized saddle with contraction C, expansion E and its two sections"""
    index: int
    section_in: SectionId
    section_out: SectionId
    contraction: float
    expansion: float


def local_node(node: int, params: ModelParams) -> LocalNode:
    if node == 0:
        return LocalNode(0, SectionId.SIGMA0_IN, SectionId.SIGMA0_OUT, params.C0, params.E0)
    if node == 1:
        return LocalNode(1, SectionId.SIGMA1_IN, SectionId.SIGMA1_OUT, params.C1, params.E1)
    if node == 2:
        return LocalNode(2, SectionId.SIGMA2_IN, SectionId.SIGMA2_OUT, params.C2, params.E2)
    raise ValueError(f"node must be 0, 1 or 2, got {node}")


def _require_section(p: SectionPoint, expected: SectionId):
    if p.section is not expected:
        raise SectionMismatch(f"expected a point on {expected.value}, got {p.section.value}")


def _transit(node: LocalNode, p: SectionPoint, params: ModelParams) -> Tuple[SectionPoint, float]:
    _require_section(p, node.section_in)
    gap = p.manifold_distance
    if gap <= 0.0:
        raise DomainStableManifold(f"{p.section.value} point lies on the local stable manifold")
    if gap > params.eps:
        raise DomainRange(f"distance {gap} to the stable manifold exceeds eps={params.eps}")

    log_ratio = math.log(params.eps) - math.log(gap)
    flight_time = log_ratio / node.expansion
    gap_out = params.eps * math.exp(-(node.contraction / node.expansion) * log_ratio)
    out = SectionPoint.from_gap(
        node.section_out,
        gap_out,
        p.phi1 + params.omega1 * flight_time,
        p.phi2 + params.omega2 * flight_time,
    )
    return out, flight_time


def pi0(p: SectionPoint, params: ModelParams) -> Tuple[SectionPoint, float]:
    """
    Transition near the bifocus O from Sigma0In to Sigma0Out.

    r1_out = eps^(1-delta0) * r2_in^delta0 and both angles advance by omega_j*T
    with T = ln(eps/r2_in)/E0.
    """
    return _transit(local_node(0, params), p, params)


def pi1(p: SectionPoint, params: ModelParams) -> Tuple[SectionPoint, float]:
    """Transition near C1 from Sigma1In (1-eps <= r1 < 1) to Sigma1Out"""
    return _transit(local_node(1, params), p, params)


def pi2(p: SectionPoint, params: ModelParams) -> Tuple[SectionPoint, float]:
    """Transition near C2 from Sigma2In (0 < r1 <= eps) to Sigma2Out"""
    return _transit(local_node(2, params), p, params)


def pi_inverse(node: int, q: SectionPoint, params: ModelParams) -> SectionPoint:
    """
    Invert the local map of a node.

    Args:
        node: 0, 1 or 2
        q: Point on the node's out-section
        params: Model parameters

    Returns:
        The in-section point mapped onto q

    Raises:
        ImageRange: q is not in the image of the forward map
    """
    spec = local_node(node, params)
    _require_section(q, spec.section_out)
    gap_out = q.manifold_distance
    if not 0.0 < gap_out <= params.eps:
        raise ImageRange(f"distance {gap_out} is outside the image (0, {params.eps}] of pi{node}")

    log_ratio = (math.log(params.eps) - math.log(gap_out)) * spec.expansion / spec.contraction
    flight_time = log_ratio / spec.expansion
    return SectionPoint.from_gap(
        spec.section_in,
        params.eps * math.exp(-log_ratio),
        q.phi1 - params.omega1 * flight_time,
        q.phi2 - params.omega2 * flight_time,
    )
