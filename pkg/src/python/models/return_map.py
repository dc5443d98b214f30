"""Half-return map G, the full return R_gamma and itinerary iteration"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from ..core.constants import TWO_PI, BOUNDARY_TOL
from ..core.errors import (
    DomainRange,
    DomainStableManifold,
    DomainUnstableManifold,
    HeteronetError,
    ImageRange,
    PreconditionError,
    SectionMismatch,
)
from ..core.model import ModelParams, derived_constants
from ..core.sections import SectionId, SectionPoint
from ..utils.utilities import angle_offset
from .global_maps import (
    DEFAULT_UNFOLDING,
    TransverseUnfolding,
    Unfolding,
    psi02,
    psi10,
    psi21_inverse,
    region_symbol,
)
from .local_maps import pi0, pi1, pi2

logger = logging.getLogger(__name__)


def _in_gap(p: SectionPoint, params: ModelParams) -> float:
    if p.section is not SectionId.SIGMA1_IN:
        raise SectionMismatch(f"expected a Sigma1In point, got {p.section.value}")
    gap = p.manifold_distance
    if gap <= 0.0:
        raise DomainStableManifold("point lies on W^s_loc(C1)")
    if gap > params.eps:
        raise DomainRange(f"1 - r1_in = {gap} exceeds eps={params.eps}")
    return gap


def g_closed(p: SectionPoint, params: ModelParams) -> SectionPoint:
    """
    Closed form of G = Pi2 o Psi02 o Pi0 o Psi10 o Pi1 from Sigma1In to Sigma2Out.

    With L = ln(eps) - ln(1 - r1_in): 1 - r2_out = eps*exp(-delta*L) = k(eps)*(1 - r1_in)^delta
    and phi_j advances by xi*omega_j*L. G does not depend on gamma.

    Args:
        p: Point on Sigma1In with 1 - eps <= r1_in < 1
        params: Model parameters

    Returns:
        Point on Sigma2Out with lifted angles
    """
    gap = _in_gap(p, params)
    dc = derived_constants(params)
    log_ratio = math.log(params.eps) - math.log(gap)
    return SectionPoint.from_gap(
        SectionId.SIGMA2_OUT,
        params.eps * math.exp(-dc.delta * log_ratio),
        p.phi1 + dc.xi * params.omega1 * log_ratio,
        p.phi2 + dc.xi * params.omega2 * log_ratio,
    )


def half_return_legs(p: SectionPoint, params: ModelParams) -> List[Tuple[SectionPoint, float]]:
    """Intermediate points and flight times of the five-map composition"""
    q1, t1 = pi1(p, params)
    q0, t0 = pi0(psi10(q1), params)
    q2, t2 = pi2(psi02(q0), params)
    return [(q1, t1), (q0, t0), (q2, t2)]


def g_composed(p: SectionPoint, params: ModelParams) -> SectionPoint:
    """G evaluated by explicit composition; independent check of g_closed"""
    return half_return_legs(p, params)[-1][0]


def flight_time(p: SectionPoint, params: ModelParams) -> float:
    """Time from Sigma1In to Sigma2Out: xi*(ln(eps) - ln(1 - r1_in))"""
    gap = _in_gap(p, params)
    return derived_constants(params).xi * (math.log(params.eps) - math.log(gap))


def g_inverse(q: SectionPoint, params: ModelParams) -> SectionPoint:
    """
    Closed form of G^-1 from Sigma2Out to Sigma1In.

    Raises:
        DomainUnstableManifold: r2_out = 1
        ImageRange: 1 - r2_out > eps
    """
    if q.section is not SectionId.SIGMA2_OUT:
        raise SectionMismatch(f"expected a Sigma2Out point, got {q.section.value}")
    gap_out = q.manifold_distance
    if gap_out <= 0.0:
        raise DomainUnstableManifold("point lies on W^u_loc(C2)")
    if gap_out > params.eps:
        raise ImageRange(f"1 - r2_out = {gap_out} exceeds eps={params.eps}")
    dc = derived_constants(params)
    log_ratio = (math.log(params.eps) - math.log(gap_out)) / dc.delta
    return SectionPoint.from_gap(
        SectionId.SIGMA1_IN,
        params.eps * math.exp(-log_ratio),
        q.phi1 - dc.xi * params.omega1 * log_ratio,
        q.phi2 - dc.xi * params.omega2 * log_ratio,
    )


def g_closed_array(gaps: np.ndarray, phi1: np.ndarray, phi2: np.ndarray,
                   params: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised g_closed on (1 - r1_in, phi1, phi2); returns (1 - r2_out, phi1_out, phi2_out)"""
    gaps = np.asarray(gaps, dtype=float)
    if np.any(gaps <= 0.0) or np.any(gaps > params.eps):
        raise DomainRange("every 1 - r1_in must lie in (0, eps]")
    dc = derived_constants(params)
    log_ratio = np.log(params.eps) - np.log(gaps)
    return (
        params.eps * np.exp(-dc.delta * log_ratio),
        np.asarray(phi1, dtype=float) + dc.xi * params.omega1 * log_ratio,
        np.asarray(phi2, dtype=float) + dc.xi * params.omega2 * log_ratio,
    )


def g_inverse_array(gaps_out: np.ndarray, phi1: np.ndarray, phi2: np.ndarray,
                    params: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised g_inverse on (1 - r2_out, phi1, phi2); returns (1 - r1_in, phi1_in, phi2_in)"""
    gaps_out = np.asarray(gaps_out, dtype=float)
    if np.any(gaps_out <= 0.0) or np.any(gaps_out > params.eps):
        raise DomainUnstableManifold("every 1 - r2_out must lie in (0, eps]")
    dc = derived_constants(params)
    log_ratio = (np.log(params.eps) - np.log(gaps_out)) / dc.delta
    return (
        params.eps * np.exp(-log_ratio),
        np.asarray(phi1, dtype=float) - dc.xi * params.omega1 * log_ratio,
        np.asarray(phi2, dtype=float) - dc.xi * params.omega2 * log_ratio,
    )


@dataclass
class ReturnOutcome:
    """Result of one application of R_gamma; escape is a normal outcome"""
    point: Optional[SectionPoint]       # image on Sigma1In, None on escape
    symbol: Optional[int]               # out-region crossed, None if between regions
    flight_time: float
    out_point: SectionPoint             # G(p) on Sigma2Out
    escaped: bool = False
    reason: str = ""


def return_map(p: SectionPoint, gamma: float, params: ModelParams,
               unfolding: Unfolding = DEFAULT_UNFOLDING) -> ReturnOutcome:
    """
    Apply R_gamma = Psi21 o G once.

    Args:
        p: Point on Sigma1In off W^s_loc(C1)
        gamma: Unfolding parameter
        params: Model parameters
        unfolding: Psi21 chart convention

    Returns:
        ReturnOutcome; escaped is set when G(p) misses both out-regions or
        the image leaves the Sigma1In chart
    """
    q = g_closed(p, params)
    time = flight_time(p, params)
    symbol = region_symbol(q, params)
    if symbol is None:
        return ReturnOutcome(None, None, time, q, True, "G(p) lies outside C1^out and C2^out")
    s, phi1_in, phi2_in = unfolding.image(q.manifold_distance, q.phi1, q.phi2, gamma, params)
    if s <= 0.0:
        return ReturnOutcome(None, symbol, time, q, True, "image lies on or past W^s_loc(C1)")
    if s > params.eps:
        return ReturnOutcome(None, symbol, time, q, True, "image leaves the Sigma1In chart")
    image = SectionPoint.from_gap(SectionId.SIGMA1_IN, s, phi1_in, phi2_in)
    return ReturnOutcome(image, symbol, time, q)


def inverse_return(p: SectionPoint, gamma: float, params: ModelParams,
                   unfolding: Unfolding = DEFAULT_UNFOLDING) -> Tuple[SectionPoint, int]:
    """
    Apply R_gamma^-1 = G^-1 o Psi21^-1 once.

    Returns:
        (preimage on Sigma1In, symbol of the out-region the preimage's orbit crosses)

    Raises:
        ImageRange: p has no preimage in C1^out u C2^out
    """
    q = psi21_inverse(p, gamma, params, unfolding)
    return g_inverse(q, params), region_symbol(q, params)


@dataclass
class Itinerary:
    """Orbit of R_gamma (or R_gamma^-1) with its symbol coding"""
    start: SectionPoint
    symbols: List[int] = field(default_factory=list)
    points: List[SectionPoint] = field(default_factory=list)
    flight_times: List[float] = field(default_factory=list)
    escaped: bool = False
    escape_reason: str = ""
    domain_error: Optional[str] = None
    backward: bool = False

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def complete(self) -> bool:
        return not self.escaped and self.domain_error is None

    def to_frame(self) -> pd.DataFrame:
        """Rows step, symbol, r1in, phi1, phi2, flight_time"""
        rows = [
            {
                "step": k + 1,
                "symbol": self.symbols[k],
                "r1in": pt.radial,
                "phi1": pt.phi1,
                "phi2": pt.phi2,
                "flight_time": self.flight_times[k],
            }
            for k, pt in enumerate(self.points)
        ]
        return pd.DataFrame(rows, columns=["step", "symbol", "r1in", "phi1", "phi2", "flight_time"])


def iterate(p: SectionPoint, gamma: float, n: int, params: ModelParams,
            unfolding: Unfolding = DEFAULT_UNFOLDING) -> Itinerary:
    """
    Apply return_map up to n times, stopping at the first escape.

    A starting point outside the domain of G gives an empty itinerary with
    domain_error set.
    """
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    itinerary = Itinerary(start=p)
    current = p
    for _ in range(n):
        try:
            outcome = return_map(current, gamma, params, unfolding)
        except HeteronetError as exc:
            itinerary.domain_error = str(exc)
            break
        if outcome.escaped:
            itinerary.escaped = True
            itinerary.escape_reason = outcome.reason
            break
        itinerary.symbols.append(outcome.symbol)
        itinerary.points.append(outcome.point)
        itinerary.flight_times.append(outcome.flight_time)
        current = outcome.point
    logger.debug(f"Iterated {len(itinerary)} of {n} returns (escaped={itinerary.escaped})")
    return itinerary


def iterate_backward(p: SectionPoint, gamma: float, n: int, params: ModelParams,
                     unfolding: Unfolding = DEFAULT_UNFOLDING) -> Itinerary:
    """
    Apply inverse_return up to n times.

    points[k] is R^-(k+1)(p) and symbols[k] the out-region its forward orbit
    crosses on the way back to R^-k(p).
    """
    if n < 1:
        raise PreconditionError(f"n must be >= 1, got {n}")
    itinerary = Itinerary(start=p, backward=True)
    current = p
    for _ in range(n):
        try:
            previous, symbol = inverse_return(current, gamma, params, unfolding)
        except (ImageRange, DomainUnstableManifold) as exc:
            itinerary.escaped = True
            itinerary.escape_reason = str(exc)
            break
        except HeteronetError as exc:
            itinerary.domain_error = str(exc)
            break
        itinerary.symbols.append(symbol)
        itinerary.points.append(previous)
        itinerary.flight_times.append(flight_time(previous, params))
        current = previous
    return itinerary


def shell_log_bounds(n: int, params: ModelParams) -> Tuple[float, float]:
    """Range of L = ln(eps) - ln(1 - r1_in) covered by the N-th shell"""
    dc = derived_constants(params)
    width = TWO_PI / (dc.xi * params.omega2)
    return n * width, (n + 1) * width


def a_n(n: int, params: ModelParams) -> float:
    """Outer radius of the N-th out-slab in 1 - r2_out: eps*exp(-2*pi*N*delta/(xi*omega2))"""
    dc = derived_constants(params)
    return params.eps * math.exp(-TWO_PI * n * dc.delta / (dc.xi * params.omega2))


def b_n(n: int, params: ModelParams) -> float:
    """Outer radius of the N-th in-shell in 1 - r1_in: eps*exp(-2*pi*N/(xi*omega2))"""
    dc = derived_constants(params)
    return params.eps * math.exp(-TWO_PI * n / (dc.xi * params.omega2))


@dataclass
class FixedPoint:
    point: SectionPoint
    symbol: int
    n: int
    winding: int                        # m in xi*(omega1 + omega2)*L = 2*pi*m
    residual: float


def return_residual(p: SectionPoint, image: SectionPoint) -> float:
    """Max of |ds| and the angle differences reduced mod 2pi"""
    return max(
        abs(image.manifold_distance - p.manifold_distance),
        abs(angle_offset(image.phi1 - p.phi1, 0.0)),
        abs(angle_offset(image.phi2 - p.phi2, 0.0)),
    )


def _newton_polish(p: SectionPoint, gamma: float, params: ModelParams,
                   unfolding: TransverseUnfolding) -> SectionPoint:
    dc = derived_constants(params)
    xw1 = dc.xi * params.omega1
    xw2 = dc.xi * params.omega2
    log_eps = math.log(params.eps)

    def residual(x):
        L, phi1, phi2 = x
        u = params.eps * math.exp(-dc.delta * L)
        beta = phi2 + xw2 * L
        s_next = u + gamma * unfolding.profile(beta, params)
        return [
            log_eps - math.log(s_next) - L,
            angle_offset(beta - phi1, 0.0),
            angle_offset(phi1 + xw1 * L - phi2, 0.0),
        ]

    def jacobian(x):
        L, phi1, phi2 = x
        u = params.eps * math.exp(-dc.delta * L)
        beta = phi2 + xw2 * L
        slope = gamma * unfolding.profile_slope(beta, params)
        s_next = u + gamma * unfolding.profile(beta, params)
        return [
            [(dc.delta * u - slope * xw2) / s_next - 1.0, 0.0, -slope / s_next],
            [xw2, -1.0, 1.0],
            [xw1, 1.0, -1.0],
        ]

    L0 = log_eps - math.log(p.manifold_distance)
    sol = optimize.root(residual, [L0, p.phi1, p.phi2], jac=jacobian, method="hybr", tol=1e-15)
    L, phi1, phi2 = sol.x
    return SectionPoint.from_gap(SectionId.SIGMA1_IN, params.eps * math.exp(-L), phi1, phi2)


def find_fixed_point(symbol: int, n: int, gamma: float, params: ModelParams,
                     unfolding: TransverseUnfolding = DEFAULT_UNFOLDING,
                     polish: bool = True) -> FixedPoint:
    """
    Fixed point of R_gamma inside the N-th shell with the given symbol.

    A fixed point needs xi*(omega1 + omega2)*L = 2*pi*m, phi1_in = phi2_out = beta
    near theta_symbol and 1 - r1_in = u(L) + gamma*c(beta); the candidate L closest
    to the middle of the shell is solved in closed form and then Newton-polished.

    Raises:
        PreconditionError: gamma <= 0 or no admissible beta inside the out-window
    """
    if gamma <= 0:
        raise PreconditionError("fixed points of R_gamma need gamma > 0")
    if symbol not in (1, 2):
        raise PreconditionError(f"symbol must be 1 or 2, got {symbol}")
    dc = derived_constants(params)
    lo, hi = shell_log_bounds(n, params)
    step = TWO_PI / (dc.xi * (params.omega1 + params.omega2))
    candidates = [m for m in range(int(math.ceil(lo / step)), int(math.floor(hi / step)) + 1)
                  if lo <= m * step < hi]
    if not candidates:
        raise PreconditionError(f"no fixed-point winding fits in shell N={n}")
    m = min(candidates, key=lambda k: abs(k * step - 0.5 * (lo + hi)))
    L = m * step
    s = params.eps * math.exp(-L)
    u = params.eps * math.exp(-dc.delta * L)
    try:
        offset = unfolding.solve_offset(symbol, (s - u) / gamma, params)
    except ImageRange as exc:
        raise PreconditionError(f"no fixed point with symbol {symbol} in shell N={n}: {exc}")
    if abs(offset) >= params.eps_out:
        raise PreconditionError(
            f"fixed point of shell N={n} would leave C{symbol}^out (offset {offset:.3g})"
        )
    beta = params.theta_out(symbol) + offset
    point = SectionPoint.from_gap(SectionId.SIGMA1_IN, s, beta, beta - dc.xi * params.omega2 * L)

    outcome = return_map(point, gamma, params, unfolding)
    residual = math.inf if outcome.escaped else return_residual(point, outcome.point)
    if polish and residual > BOUNDARY_TOL:
        logger.debug(f"Polishing fixed point of shell N={n} (residual {residual:.3g})")
        point = _newton_polish(point, gamma, params, unfolding)
        outcome = return_map(point, gamma, params, unfolding)
        residual = math.inf if outcome.escaped else return_residual(point, outcome.point)
    return FixedPoint(point, symbol, n, m, residual)
