"""Spiralling sheets, scrolls, the Upsilon estimates and subsidiary connections"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from ..core.constants import (
    TWO_PI,
    FD_RELATIVE_STEP,
    FD_RTOL,
    SPIRAL_ENVELOPE_TOL,
    SPIRAL_MIN_SAMPLES,
    SPIRAL_MIN_SPAN,
)
from ..core.errors import CoincidentManifolds, DomainUnstableManifold, PreconditionError
from ..core.model import ModelParams, derived_constants
from ..core.sections import SectionId, SectionPoint
from ..utils.utilities import log_grid
from .global_maps import DEFAULT_UNFOLDING, TransverseUnfolding, Unfolding, region_symbol
from .return_map import g_closed_array, g_inverse_array, shell_log_bounds

logger = logging.getLogger(__name__)

Planar = Callable[[float, float], float]


@dataclass(frozen=True)
class MeridianProfile:
    """
    Function Xi on the annulus 1 - delta_hat <= u^2 + v^2 <= 1, constant on the unit circle.

    The surface {phi1 = Xi(r cos phi2, r sin phi2)} is the object pushed through G.
    """
    value: Planar
    du: Planar
    dv: Planar
    delta_hat: float = 0.5
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.delta_hat <= 1:
            raise PreconditionError(f"delta_hat must lie in (0, 1], got {self.delta_hat}")
        spread = self.circle_spread()
        if spread > 1e-12:
            raise PreconditionError(f"profile {self.name} is not constant on the unit circle "
                                    f"(spread {spread:.3g})")

    def circle_spread(self, samples: int = 256) -> float:
        angles = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        values = np.array([self.value(math.cos(a), math.sin(a)) for a in angles])
        return float(values.max() - values.min())

    def __call__(self, u: float, v: float) -> float:
        return self.value(u, v)


def constant_profile(c: float = 0.0) -> MeridianProfile:
    return MeridianProfile(lambda u, v: c, lambda u, v: 0.0, lambda u, v: 0.0, name=f"constant({c})")


def quadratic_profile() -> MeridianProfile:
    """Xi = 1 - u^2 - v^2, vanishing on the unit circle"""
    return MeridianProfile(
        lambda u, v: 1.0 - u * u - v * v,
        lambda u, v: -2.0 * u,
        lambda u, v: -2.0 * v,
        name="quadratic",
    )


def tilted_profile(a: float = 1.0) -> MeridianProfile:
    """Xi = a*u*(1 - u^2 - v^2); unlike the quadratic profile it depends on the angle"""
    return MeridianProfile(
        lambda u, v: a * u * (1.0 - u * u - v * v),
        lambda u, v: a * (1.0 - 3.0 * u * u - v * v),
        lambda u, v: -2.0 * a * u * v,
        name=f"tilted({a})",
    )


PROFILES = {
    "constant": constant_profile,
    "quadratic": quadratic_profile,
    "tilted": tilted_profile,
}


@dataclass(frozen=True)
class _Frame:
    """Quantities shared by Upsilon and its derivatives at one (1 - r2, phi2)"""
    log_ratio: float                    # L = (ln eps - ln(1 - r2))/delta
    s: float                            # 1 - r1_in of the preimage, eps*exp(-L)
    m: float                            # r1_in = 1 - s
    w: float                            # phi2_in = phi2 - xi*omega2*L
    u: float
    v: float


def _frame(gap: float, phi2: float, params: ModelParams) -> _Frame:
    if not gap > 0:
        raise DomainUnstableManifold(f"1 - r2 must be positive, got {gap}")
    dc = derived_constants(params)
    log_ratio = (math.log(params.eps) - math.log(gap)) / dc.delta
    s = params.eps * math.exp(-log_ratio)
    m = 1.0 - s
    w = phi2 - dc.xi * params.omega2 * log_ratio
    return _Frame(log_ratio, s, m, w, m * math.cos(w), m * math.sin(w))


def _resolve_gap(r2: Optional[float], gap: Optional[float]) -> float:
    if gap is not None:
        return gap
    if r2 is None:
        raise PreconditionError("either r2 or gap is required")
    if r2 >= 1.0:
        raise DomainUnstableManifold(f"r2 must be < 1, got {r2}")
    return 1.0 - r2


def upsilon(r2: Optional[float], phi2: float, xi_profile: MeridianProfile, params: ModelParams,
            gap: Optional[float] = None) -> float:
    """
    phi1_out on the image G(F_in) as a function of (r2_out, phi2_out).

    Upsilon = Xi(M cos W, M sin W) - (xi*omega1/delta)*ln(1 - r2) for eps = 1, with
    M = 1 - (1 - r2)^(1/delta) and W = phi2 + (xi*omega2/delta)*ln(1 - r2).
    Pass gap = 1 - r2 directly to avoid cancellation near r2 = 1.
    """
    f = _frame(_resolve_gap(r2, gap), phi2, params)
    dc = derived_constants(params)
    return xi_profile(f.u, f.v) + dc.xi * params.omega1 * f.log_ratio


def dupsilon_dphi2(r2: Optional[float], phi2: float, xi_profile: MeridianProfile,
                   params: ModelParams, gap: Optional[float] = None) -> float:
    f = _frame(_resolve_gap(r2, gap), phi2, params)
    return -xi_profile.du(f.u, f.v) * f.v + xi_profile.dv(f.u, f.v) * f.u


@dataclass
class Remainder:
    """Terms of (1 - r2)*dUpsilon/dr2 = xi*omega1/delta + R"""
    R: float
    R1: float
    R2: float
    fd_log_derivative: float            # central difference of (1 - r2)*dUpsilon/dr2
    fd_residual: float                  # relative mismatch with xi*omega1/delta + R
    verified: bool


def remainder(r2: Optional[float], phi2: float, xi_profile: MeridianProfile, params: ModelParams,
              gap: Optional[float] = None) -> Remainder:
    """
    R1 = (1/delta)(1 - r2)^(1/delta)[Xi_u cos W + Xi_v sin W],
    R2 = (xi*omega2/delta)(1 - (1 - r2)^(1/delta))[Xi_u sin W - Xi_v cos W],
    cross-checked against a central difference of upsilon with step 1e-7*(1 - r2).
    """
    g = _resolve_gap(r2, gap)
    f = _frame(g, phi2, params)
    dc = derived_constants(params)
    xi_u = xi_profile.du(f.u, f.v)
    xi_v = xi_profile.dv(f.u, f.v)
    cos_w, sin_w = math.cos(f.w), math.sin(f.w)
    r1_term = (f.s / dc.delta) * (xi_u * cos_w + xi_v * sin_w)
    r2_term = (dc.xi * params.omega2 / dc.delta) * f.m * (xi_u * sin_w - xi_v * cos_w)
    total = r1_term + r2_term

    # d/dr2 = -d/dg
    h = FD_RELATIVE_STEP * g
    fd = -g * (upsilon(None, phi2, xi_profile, params, gap=g + h)
               - upsilon(None, phi2, xi_profile, params, gap=g - h)) / (2.0 * h)
    expected = dc.xi * params.omega1 / dc.delta + total
    residual = abs(fd - expected) / max(abs(expected), 1e-300)
    return Remainder(total, r1_term, r2_term, fd, residual, residual <= FD_RTOL)


@dataclass
class ClaimLimits:
    """Uniform limits of the Upsilon derivatives over a phi2 grid"""
    gaps: List[float]
    log_derivative_error: List[float]   # max |(1 - r2) dUpsilon/dr2 - xi*omega1/delta|
    phi2_derivative: List[float]        # max |dUpsilon/dphi2|
    coefficient: float                  # xi*omega1/delta

    @property
    def monotone(self) -> bool:
        a = np.asarray(self.log_derivative_error)
        b = np.asarray(self.phi2_derivative)
        return bool(np.all(np.diff(a) <= 0) and np.all(np.diff(b) <= 0))

    @property
    def passed(self) -> bool:
        return (self.monotone
                and self.log_derivative_error[-1] < 1e-2 * self.coefficient
                and self.phi2_derivative[-1] < 1e-2)


def claim_limits(xi_profile: MeridianProfile, params: ModelParams,
                 gaps: Sequence[float] = (1e-3, 1e-4, 1e-5, 1e-6), n_phi: int = 64) -> ClaimLimits:
    """Max over an n_phi-point grid of |R| and |dUpsilon/dphi2| at each 1 - r2 in gaps"""
    dc = derived_constants(params)
    phis = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    errors, slopes = [], []
    for g in gaps:
        errors.append(max(abs(remainder(None, phi, xi_profile, params, gap=g).R) for phi in phis))
        slopes.append(max(abs(dupsilon_dphi2(None, phi, xi_profile, params, gap=g)) for phi in phis))
    return ClaimLimits(list(gaps), errors, slopes, dc.xi * params.omega1 / dc.delta)


def eta_monotone(xi_profile: MeridianProfile, params: ModelParams, gap_max: float = 1e-3,
                 gap_min: float = 1e-12, n_r: int = 200, n_phi: int = 64) -> bool:
    """
    h(r2, phi2) = 1 - exp(-(delta/(xi*omega1))*Upsilon) strictly increasing in r2.

    Tested on exp(-(delta/(xi*omega1))*Upsilon), which must strictly decrease as
    1 - r2 decreases; this avoids the cancellation in 1 - exp(...).
    """
    dc = derived_constants(params)
    scale = dc.delta / (dc.xi * params.omega1)
    gaps = log_grid(gap_min, gap_max, n_r)[::-1]
    for phi in np.linspace(0.0, TWO_PI, n_phi, endpoint=False):
        tail = np.array([math.exp(-scale * upsilon(None, phi, xi_profile, params, gap=g)) for g in gaps])
        if not np.all(np.diff(tail) < 0):
            logger.debug(f"eta monotonicity fails on the slice phi2={phi:.4f}")
            return False
    return True


@dataclass
class SpiralVerdict:
    is_spiral: bool
    theta_monotone_from: float          # parameter value where the monotone tail starts
    theta_range: float                  # lifted span of theta over the tail
    envelope_upper: np.ndarray
    envelope_lower: np.ndarray
    limit_h: float
    reason: str = ""


def classify_spiral(samples: Sequence[Tuple[float, float]], tol: float = SPIRAL_ENVELOPE_TOL,
                    min_span: float = SPIRAL_MIN_SPAN,
                    parameters: Optional[Sequence[float]] = None) -> SpiralVerdict:
    """
    Decide whether a sampled curve (theta lifted, h) is a spiral.

    The curve spirals when theta is monotone on a tail spanning at least
    min_span, the per-turn max and min of h form monotone envelopes, and the
    last full turn has h-oscillation at most tol.

    Args:
        samples: (theta, h) pairs ordered by the curve parameter
        tol: Convergence tolerance of the envelopes
        min_span: Smallest accepted lifted span of the monotone tail
        parameters: Curve parameter of each sample (defaults to the index)

    Returns:
        SpiralVerdict
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[0] < SPIRAL_MIN_SAMPLES:
        raise PreconditionError(f"classify_spiral needs at least {SPIRAL_MIN_SAMPLES} samples")
    theta, h = data[:, 0], data[:, 1]
    params_ = np.arange(len(theta), dtype=float) if parameters is None else np.asarray(parameters)
    empty = np.array([])

    steps = np.diff(theta)
    moving = np.nonzero(steps != 0)[0]
    if len(moving) == 0:
        return SpiralVerdict(False, float(params_[0]), 0.0, empty, empty, float(h[-1]), "theta is constant")
    direction = np.sign(steps[moving[-1]])
    against = np.nonzero(np.sign(steps) != direction)[0]
    start = int(against[-1]) + 1 if len(against) else 0
    tail_theta = (theta[start:] - theta[start]) * direction
    tail_h = h[start:]
    span = float(tail_theta[-1]) if len(tail_theta) else 0.0
    if span < min_span:
        return SpiralVerdict(False, float(params_[start]), span, empty, empty, float(h[-1]),
                             f"span below threshold ({span:.4g} < {min_span:.4g})")

    turns = np.floor(tail_theta / TWO_PI).astype(int)
    complete = int(np.floor(span / TWO_PI))
    upper = np.array([tail_h[turns == k].max() for k in range(complete) if np.any(turns == k)])
    lower = np.array([tail_h[turns == k].min() for k in range(complete) if np.any(turns == k)])
    limit = 0.5 * (upper[-1] + lower[-1])
    slack = 1e-12 * max(1.0, float(np.max(np.abs(tail_h))))
    falling = np.all(np.diff(upper) <= slack) and np.all(np.diff(lower) <= slack)
    rising = np.all(np.diff(upper) >= -slack) and np.all(np.diff(lower) >= -slack)
    converged = upper[-1] - lower[-1] <= tol
    reason = ""
    if not (falling or rising):
        reason = "envelopes are not monotone"
    elif not converged:
        reason = f"envelopes do not meet within tol ({upper[-1] - lower[-1]:.3g})"
    return SpiralVerdict(
        bool((falling or rising) and converged),
        float(params_[start]),
        span,
        upper,
        lower,
        float(limit),
        reason,
    )


@dataclass
class SheetGrid:
    """Slices at fixed angles, each sampled on a log grid of distances to the torus"""
    angles: np.ndarray
    gaps: np.ndarray

    @classmethod
    def default(cls, n_slices: int = 16, gap_min: float = 1e-12, gap_max: float = 0.25,
                n_gaps: int = 400) -> "SheetGrid":
        return cls(np.linspace(0.0, TWO_PI, n_slices, endpoint=False),
                   log_grid(gap_min, gap_max, n_gaps)[::-1])


@dataclass
class SheetSample:
    frame: pd.DataFrame
    verdicts: List[SpiralVerdict]
    tol: float = SPIRAL_ENVELOPE_TOL

    @property
    def passed(self) -> bool:
        """Every slice spirals and accumulates on the torus (limit distance 0)"""
        return all(v.is_spiral and abs(v.limit_h) <= self.tol for v in self.verdicts)


def sheet_image(xi_profile: MeridianProfile, grid: Optional[SheetGrid], params: ModelParams,
                tol: float = SPIRAL_ENVELOPE_TOL) -> SheetSample:
    """
    Push F_in = {phi1_in = Xi(r1 cos phi2_in, r1 sin phi2_in)} through G.

    Each slice phi2_in = const is followed as 1 - r1_in decreases and classified
    in the (phi2_out lifted, 1 - r2_out) plane.
    """
    grid = grid or SheetGrid.default()
    gaps = np.asarray(grid.gaps, dtype=float)
    rows, verdicts = [], []
    for k, angle in enumerate(grid.angles):
        r1 = 1.0 - gaps
        phi1 = np.array([xi_profile(r * math.cos(angle), r * math.sin(angle)) for r in r1])
        gap_out, phi1_out, phi2_out = g_closed_array(gaps, phi1, np.full_like(gaps, angle), params)
        verdicts.append(classify_spiral(np.column_stack([phi2_out, gap_out]), tol, parameters=gaps))
        rows.append(pd.DataFrame({
            "slice": k, "phi2_in": angle, "gap_in": gaps,
            "r2out": 1.0 - gap_out, "phi1out": phi1_out, "phi2out": phi2_out,
        }))
    frame = pd.concat(rows, ignore_index=True)
    logger.debug(f"sheet_image: {sum(v.is_spiral for v in verdicts)}/{len(verdicts)} slices spiral")
    return SheetSample(frame, verdicts, tol)


def sheet_preimage(xi_profile: MeridianProfile, grid: Optional[SheetGrid], params: ModelParams,
                   tol: float = SPIRAL_ENVELOPE_TOL) -> SheetSample:
    """
    Pull F_out = {phi1_out = Xi(r2 cos phi2_out, r2 sin phi2_out)} back through G^-1.

    Slices phi2_out = const are classified in the (phi2_in lifted, 1 - r1_in) plane
    and must accumulate on {r1_in = 1}.
    """
    grid = grid or SheetGrid.default(gap_min=1e-300, n_gaps=800)
    gaps = np.asarray(grid.gaps, dtype=float)
    gaps = gaps[gaps <= params.eps]
    rows, verdicts = [], []
    for k, angle in enumerate(grid.angles):
        r2 = 1.0 - gaps
        phi1 = np.array([xi_profile(r * math.cos(angle), r * math.sin(angle)) for r in r2])
        gap_in, phi1_in, phi2_in = g_inverse_array(gaps, phi1, np.full_like(gaps, angle), params)
        verdicts.append(classify_spiral(np.column_stack([phi2_in, gap_in]), tol, parameters=gaps))
        rows.append(pd.DataFrame({
            "slice": k, "phi2_out": angle, "gap_out": gaps,
            "r1in": 1.0 - gap_in, "phi1in": phi1_in, "phi2in": phi2_in,
        }))
    return SheetSample(pd.concat(rows, ignore_index=True), verdicts, tol)


@dataclass
class ScrollVerdict:
    is_scroll: bool
    left: SpiralVerdict
    right: SpiralVerdict
    rays_checked: int
    interlaced: bool


def _ray_crossings(theta: np.ndarray, h: np.ndarray, alpha: float) -> np.ndarray:
    """Values of h where the lifted curve theta passes angle alpha (mod 2pi)"""
    turn = np.floor((theta - alpha) / TWO_PI)
    idx = np.nonzero(turn[1:] != turn[:-1])[0]
    out = []
    for k in idx:
        t0 = theta[k]
        target = alpha + TWO_PI * max(turn[k], turn[k + 1])
        w = (target - t0) / (theta[k + 1] - t0)
        out.append(h[k] + w * (h[k + 1] - h[k]))
    return np.array(out)


def scroll_check(i: int, params: ModelParams, phi1_out: float = 0.0, n_rays: int = 8,
                 gap_min: float = 1e-300, n_gaps: int = 4000,
                 tol: float = SPIRAL_ENVELOPE_TOL) -> ScrollVerdict:
    """
    Pull back the boundary disks phi2_out = theta_i -/+ eps_out of C_i^out by G^-1.

    The slices are spirals in (phi2_in, 1 - r1_in); the region between them is a
    scroll when, along every ray phi2_in = alpha, crossings of the two spirals
    alternate.
    """
    gaps = log_grid(gap_min, params.eps_out, n_gaps)[::-1]
    curves = []
    for sign in (-1.0, 1.0):
        phi2 = params.theta_out(i) + sign * params.eps_out
        gap_in, _, phi2_in = g_inverse_array(gaps, np.full_like(gaps, phi1_out), np.full_like(gaps, phi2), params)
        curves.append((phi2_in, gap_in))
    left = classify_spiral(np.column_stack(curves[0]), tol, parameters=gaps)
    right = classify_spiral(np.column_stack(curves[1]), tol, parameters=gaps)

    interlaced = True
    for alpha in np.linspace(0.0, TWO_PI, n_rays, endpoint=False):
        hits_left = _ray_crossings(curves[0][0], curves[0][1], alpha)
        hits_right = _ray_crossings(curves[1][0], curves[1][1], alpha)
        labels = np.concatenate([np.zeros(len(hits_left)), np.ones(len(hits_right))])
        order = np.argsort(np.concatenate([hits_left, hits_right]))[::-1]
        sequence = labels[order]
        if len(sequence) < 4 or np.any(sequence[1:] == sequence[:-1]):
            interlaced = False
            break
    return ScrollVerdict(left.is_spiral and right.is_spiral and interlaced, left, right, n_rays, interlaced)


@dataclass
class ConnectionCurve:
    """Points of W^u(C2) n Sigma1In whose R_gamma image lies on W^s_loc(C1)"""
    n: int                              # turn (shell) index
    target: int                         # out-region the connection passes through
    sheet: int                          # branch of the model surface
    rays: np.ndarray                    # phi2_in of each sample
    gaps: np.ndarray                    # 1 - r1_in
    phi1: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gaps))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "n": self.n, "target": self.target, "sheet": self.sheet,
            "r1in": 1.0 - self.gaps, "phi1": self.phi1, "phi2": self.rays,
        })


def surface_angle(s: float, sheet: int, gamma: float, params: ModelParams,
                  unfolding: Unfolding = DEFAULT_UNFOLDING) -> float:
    """
    phi1_in on the model surface W^u(C2) n Sigma1In at distance s from {r1_in = 1}.

    The surface is the image of {r2_out = 1}; sheet 1 is the branch rising from
    its first crossing with the torus, sheet 2 the branch falling back to it.
    """
    amplitude = params.surf_amp * gamma
    if isinstance(unfolding, TransverseUnfolding):
        return params.theta_out(sheet) + unfolding.solve_offset(sheet, s / amplitude, params)

    phis = np.linspace(params.theta1_out, params.theta1_out + TWO_PI, 4097)
    gaps = np.array([unfolding.torus_image_gap(phi, gamma, params) for phi in phis])
    positive = gaps > 0
    rise = np.nonzero(~positive[:-1] & positive[1:])[0]
    if len(rise) == 0:
        raise PreconditionError("the model surface does not meet Sigma1In")
    top = rise[0] + int(np.argmax(np.where(positive[rise[0]:], gaps[rise[0]:], -np.inf)))
    if sheet == 1:
        lo, hi = phis[rise[0]], phis[top]
    else:
        fall = top + int(np.argmax(~positive[top:]))
        lo, hi = phis[top], phis[fall]
    return brentq(lambda phi: unfolding.torus_image_gap(phi, gamma, params) - s, lo, hi, xtol=1e-15)


def find_connections(gamma: float, n_range: Iterable[int], params: ModelParams, sheet: int = 1,
                     n_rays: int = 32, samples_per_shell: int = 64,
                     unfolding: Unfolding = DEFAULT_UNFOLDING) -> List[ConnectionCurve]:
    """
    Heteroclinic connections C2 -> C1 that make one extra loop around the network.

    For each ray phi2_in = alpha and shell N, the defect 1 - r1_in of R_gamma(p) is
    followed along the model surface; its zeros (brentq in ln(1 - r1_in)) are points
    whose image lands on W^s_loc(C1). Roots are grouped by (N, target out-region).

    Raises:
        CoincidentManifolds: gamma = 0
    """
    if gamma <= 0:
        raise CoincidentManifolds("gamma = 0: W^u(C2) and W^s(C1) coincide, connections are not isolated")
    dc = derived_constants(params)
    amplitude = params.surf_amp * gamma
    log_eps = math.log(params.eps)

    def defect(log_s: float, alpha: float) -> float:
        s = math.exp(log_s)
        L = log_eps - log_s
        u = params.eps * math.exp(-dc.delta * L)
        beta = surface_angle(s, sheet, gamma, params, unfolding)
        return unfolding.image(u, beta + dc.xi * params.omega1 * L, alpha + dc.xi * params.omega2 * L,
                               gamma, params)[0]

    curves: List[ConnectionCurve] = []
    rays = np.linspace(0.0, TWO_PI, n_rays, endpoint=False)
    for n in n_range:
        L_lo, L_hi = shell_log_bounds(n, params)
        s_hi = params.eps * math.exp(-L_lo)
        if s_hi >= amplitude:
            logger.warning(f"Shell N={n} reaches beyond the model surface; skipped")
            continue
        grid = np.linspace(log_eps - L_hi, log_eps - L_lo, samples_per_shell)
        found = {1: [], 2: []}
        for alpha in rays:
            values = np.array([defect(x, alpha) for x in grid])
            for k in np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]:
                root = brentq(defect, grid[k], grid[k + 1], args=(alpha,), xtol=1e-14)
                s = math.exp(root)
                L = log_eps - root
                beta = surface_angle(s, sheet, gamma, params, unfolding)
                q = SectionPoint.from_gap(
                    SectionId.SIGMA2_OUT,
                    params.eps * math.exp(-dc.delta * L),
                    beta + dc.xi * params.omega1 * L,
                    alpha + dc.xi * params.omega2 * L,
                )
                target = region_symbol(q, params)
                if target is None:
                    continue
                found[target].append((alpha, s, beta))
        for target in (1, 2):
            if found[target]:
                alpha, s, beta = (np.array(col) for col in zip(*found[target]))
                curves.append(ConnectionCurve(n, target, sheet, alpha, s, beta))
        logger.debug(f"Shell N={n}: {sum(1 for c in curves if c.n == n)} connection curves")
    return curves


def connection_decay(curves: Sequence[ConnectionCurve]) -> Tuple[float, np.ndarray]:
    """
    Mean ratio of the largest 1 - r1_in between consecutive shells.

    Returns:
        (mean ratio, per-shell maxima ordered by N)
    """
    by_n = {}
    for curve in curves:
        by_n[curve.n] = max(by_n.get(curve.n, 0.0), curve.max_gap)
    ns = sorted(by_n)
    maxima = np.array([by_n[n] for n in ns])
    if len(maxima) < 2:
        raise PreconditionError("need curves from at least two shells")
    return float(np.mean(maxima[1:] / maxima[:-1])), maxima
