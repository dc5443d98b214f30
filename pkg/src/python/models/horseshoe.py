"""Slabs, Conley-Moser checks and symbolic realization of the horseshoes Lambda_N"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..core.constants import (
    TWO_PI,
    BOUNDARY_TOL,
    BOX_DIAMETER_TOL,
    COVER_MARGIN,
    DEFAULT_GRID,
    EPS_MACHINE,
    MAX_SHOOTING_SWEEPS,
    NU_SLOPE_RTOL,
    PERIODIC_HEAD_STEPS,
    PERIODIC_TAIL_STEPS,
    ROUNDING_FLOOR_ULPS,
    SHELL_EDGE_MARGIN,
    SHOOTING_SEEDS,
    SHOOTING_SWEEP_TOL,
    WORD_PADDING,
)
from ..core.errors import (
    CoincidentManifolds,
    EmptyIntersection,
    ImageRange,
    NTooSmall,
    PreconditionError,
    RefinementFailure,
)
from ..core.model import ModelParams, derived_constants
from ..core.sections import SectionId, SectionPoint
from ..utils.box import Box, grow
from ..utils.utilities import angle_offset, log_grid
from .global_maps import DEFAULT_UNFOLDING, TransverseUnfolding, Unfolding, out_regions
from .return_map import (
    Itinerary,
    a_n,
    b_n,
    g_closed,
    g_inverse,
    iterate,
    iterate_backward,
    return_map,
    return_residual,
    shell_log_bounds,
)

logger = logging.getLogger(__name__)

FACES = ("EL", "ER", "TI", "TO")


def n_threshold(params: ModelParams) -> float:
    """Smallest admissible turn index: N must exceed ln(eps/eps_out)*xi*omega2/(2*pi*delta)"""
    if params.eps_out <= 0:
        return math.inf
    dc = derived_constants(params)
    return math.log(params.eps / params.eps_out) * dc.xi * params.omega2 / (TWO_PI * dc.delta)


@dataclass(frozen=True)
class OutSlab:
    """M_{N,i}^out on Sigma2Out: a_{N+1} <= 1 - r2_out <= a_N, |phi2_out - theta_i| <= eps_out"""
    n: int
    i: int
    a_n: float
    a_n1: float
    theta: float
    half_width: float

    def face_distance(self, q: SectionPoint, face: str) -> float:
        """Distance of a Sigma2Out point from one boundary face (relative in the radial gap)"""
        if face == "EL":
            return abs(angle_offset(q.phi2, self.theta - self.half_width))
        if face == "ER":
            return abs(angle_offset(q.phi2, self.theta + self.half_width))
        if face == "TI":
            return abs(q.manifold_distance / self.a_n - 1.0)
        if face == "TO":
            return abs(q.manifold_distance / self.a_n1 - 1.0)
        raise ValueError(f"unknown face {face!r}")

    def contains(self, q: SectionPoint, tol: float = 0.0) -> bool:
        if q.section is not SectionId.SIGMA2_OUT:
            return False
        gap = q.manifold_distance
        return (self.a_n1 * (1.0 - tol) <= gap <= self.a_n * (1.0 + tol)
                and abs(angle_offset(q.phi2, self.theta)) <= self.half_width + tol)


def out_slab(n: int, i: int, params: ModelParams, check_threshold: bool = True) -> OutSlab:
    """
    Build M_{N,i}^out.

    Raises:
        NTooSmall: N does not exceed the threshold, so T^I would stick out of C_i^out
    """
    if i not in (1, 2):
        raise PreconditionError(f"slab index must be 1 or 2, got {i}")
    if check_threshold:
        threshold = n_threshold(params)
        if not n > threshold:
            raise NTooSmall(n, threshold)
    return OutSlab(n, i, a_n(n, params), a_n(n + 1, params), params.theta_out(i), params.eps_out)


@dataclass(frozen=True)
class InSlab:
    """
    S_{N,i} = G^-1(M_{N,i}^out) on Sigma1In, described by the images of the four faces.

    Each face is parametrized by the Sigma2Out coordinates (1 - r2_out, phi1_out) on E^L/E^R
    and (phi1_out, phi2_out) on T^I/T^O; angles are lifted.
    """
    out: OutSlab
    b_n: float
    b_n1: float
    params: ModelParams

    @property
    def r1_extent(self) -> float:
        """Radial thickness of the shell holding S_{N,i}"""
        return self.b_n - self.b_n1

    def face_point(self, face: str, gap_out: float, phi1_out: float, phi2_out: float) -> SectionPoint:
        """Closed-form G^-1 of a point on one face of M_{N,i}^out"""
        p = self.params
        dc = derived_constants(p)
        n = self.out.n
        if face in ("TI", "TO"):
            k = n if face == "TI" else n + 1
            return SectionPoint.from_gap(
                SectionId.SIGMA1_IN,
                self.b_n if face == "TI" else self.b_n1,
                phi1_out - (p.omega1 / p.omega2) * TWO_PI * k,
                phi2_out - TWO_PI * k,
            )
        sign = -1.0 if face == "EL" else 1.0
        log_out = math.log(gap_out / p.eps)
        return SectionPoint.from_gap(
            SectionId.SIGMA1_IN,
            p.eps * math.exp(log_out / dc.delta),
            phi1_out + (dc.xi * p.omega1 / dc.delta) * log_out,
            self.out.theta + sign * self.out.half_width + (dc.xi * p.omega2 / dc.delta) * log_out,
        )

    def sample_face(self, face: str, samples: int = 64) -> List[Tuple[SectionPoint, Tuple[float, float, float]]]:
        """(point on Sigma1In, its Sigma2Out parameters) over a samples x samples face grid"""
        out = self.out
        phi1s = np.linspace(0.0, TWO_PI, samples)
        if face in ("EL", "ER"):
            sign = -1.0 if face == "EL" else 1.0
            grid = itertools.product(log_grid(out.a_n1, out.a_n, samples), phi1s,
                                     [out.theta + sign * out.half_width])
        elif face in ("TI", "TO"):
            gap = out.a_n if face == "TI" else out.a_n1
            phi2s = np.linspace(out.theta - out.half_width, out.theta + out.half_width, samples)
            grid = itertools.product([gap], phi1s, phi2s)
        else:
            raise ValueError(f"unknown face {face!r}")
        return [(self.face_point(face, g, a, b), (g, a, b)) for g, a, b in grid]

    def contains(self, p: SectionPoint) -> bool:
        if p.section is not SectionId.SIGMA1_IN:
            return False
        gap = p.manifold_distance
        if not self.b_n1 <= gap <= self.b_n:
            return False
        return self.out.contains(g_closed(p, self.params))


def in_slab_boundaries(n: int, i: int, params: ModelParams) -> InSlab:
    return InSlab(out_slab(n, i, params), b_n(n, params), b_n(n + 1, params), params)


@dataclass
class BoundaryCheck:
    """Forward consistency of sampled face preimages"""
    errors: Dict[str, float]
    tol: float = BOUNDARY_TOL

    @property
    def passed(self) -> bool:
        return all(err <= self.tol for err in self.errors.values())


def boundary_check(slab: InSlab, samples: int = 64, tol: float = BOUNDARY_TOL) -> BoundaryCheck:
    """Map each sampled face preimage with g_closed and measure its distance from the named face"""
    errors = {}
    for face in FACES:
        worst = 0.0
        for point, _ in slab.sample_face(face, samples):
            q = g_closed(point, slab.params)
            worst = max(worst, slab.out.face_distance(q, face))
        errors[face] = worst
        logger.debug(f"Face {face} of S_{slab.out.n},{slab.out.i}: max error {worst:.3g}")
    return BoundaryCheck(errors, tol)


@dataclass
class WindingReport:
    """Lifted angle spans along each face preimage"""
    n: int
    i: int
    spans: Dict[str, Tuple[float, float]]     # face -> (phi1_in span, phi2_in span)
    eps_out: float
    tol: float = BOUNDARY_TOL

    @property
    def passed(self) -> bool:
        for face, (span1, span2) in self.spans.items():
            if span1 < TWO_PI - self.tol:
                return False
            if face in ("EL", "ER") and abs(span2 - TWO_PI) > self.tol:
                return False
            if face in ("TI", "TO") and abs(span2 - 2.0 * self.eps_out) > self.tol:
                return False
        return True


def winding_check(n: int, i: int, params: ModelParams, samples: int = 64) -> WindingReport:
    """
    Spans of lifted phi1_in and phi2_in along G^-1 of each face of M_{N,i}^out.

    E faces: both angles sweep at least 2pi, phi2_in exactly 2pi between the shells.
    T faces: phi1_in sweeps 2pi and phi2_in sweeps 2*eps_out.
    """
    slab = InSlab(out_slab(n, i, params, check_threshold=False), b_n(n, params), b_n(n + 1, params), params)
    spans = {}
    for face in FACES:
        pts = [pt for pt, _ in slab.sample_face(face, samples)]
        phi1 = np.array([pt.phi1 for pt in pts])
        phi2 = np.array([pt.phi2 for pt in pts])
        spans[face] = (float(phi1.max() - phi1.min()), float(phi2.max() - phi2.min()))
    return WindingReport(n, i, spans, params.eps_out)


@dataclass
class PairVerdict:
    """Slab condition and contraction data for H_{i,j,N}"""
    i: int
    j: int
    slab_ok: bool
    nu_h: float = math.nan
    nu_v: float = math.nan
    K: float = math.nan
    d_h: float = math.nan               # largest phi2-window extent of H over the stable coordinates
    d_v: float = math.nan               # phi1 extent of V = R(H)
    boundary_error: float = math.nan
    rounding_floor: float = math.nan    # boundary tolerance added for rounding of the lifted angles
    message: str = ""

    def to_dict(self) -> Dict:
        def clean(x):
            return None if isinstance(x, float) and not math.isfinite(x) else x

        return {
            "i": self.i,
            "j": self.j,
            "slab_ok": self.slab_ok,
            "nu_h": clean(self.nu_h),
            "nu_v": clean(self.nu_v),
            "K": clean(self.K),
            "d_h": clean(self.d_h),
            "d_v": clean(self.d_v),
            "boundary_error": clean(self.boundary_error),
            "rounding_floor": clean(self.rounding_floor),
            "message": self.message,
        }


@dataclass
class ConleyMoserReport:
    n: int
    gamma: float
    pairs: List[PairVerdict] = field(default_factory=list)
    slab_r1_extent: float = math.nan
    diagnostics: List[str] = field(default_factory=list)
    tolerances: Dict[str, float] = field(default_factory=lambda: {"boundary": BOUNDARY_TOL})

    @property
    def passed(self) -> bool:
        if len(self.pairs) != 4 or not all(p.slab_ok for p in self.pairs):
            return False
        return max(max(p.nu_h, p.nu_v) for p in self.pairs) < 1.0

    @property
    def nu_h(self) -> float:
        values = [p.nu_h for p in self.pairs if math.isfinite(p.nu_h)]
        return max(values) if values else math.nan

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "pairs": [p.to_dict() for p in self.pairs],
            "pass": self.passed,
            "slab_r1_extent": self.slab_r1_extent,
            "diagnostics": list(self.diagnostics),
            "tolerances": dict(self.tolerances),
        }


def _window_pieces(base: float, theta: float, half: float) -> List[Tuple[float, float]]:
    """Lifted sub-intervals of [base, base + 2pi] whose angle lies within half of theta"""
    if 2.0 * half >= TWO_PI:
        return [(base, base + TWO_PI)]
    t0 = (theta - half - base) % TWO_PI
    pieces = [(base + t0, base + min(t0 + 2.0 * half, TWO_PI))]
    if t0 + 2.0 * half > TWO_PI:
        pieces.append((base, base + t0 + 2.0 * half - TWO_PI))
    return pieces


def _pair_verdict(i: int, j: int, n: int, gamma: float, params: ModelParams,
                  unfolding: TransverseUnfolding, grid: int) -> PairVerdict:
    dc = derived_constants(params)
    xw1 = dc.xi * params.omega1
    xw2 = dc.xi * params.omega2
    lo, hi = shell_log_bounds(n, params)
    width = hi - lo
    s_top, s_bottom = b_n(n, params), b_n(n + 1, params)
    theta_i, theta_j = params.theta_out(i), params.theta_out(j)
    half = params.eps_out

    def u_of(L):
        return params.eps * math.exp(-dc.delta * L)

    def image_frame(L, phi1, v):
        phi2 = theta_i + v - xw2 * L
        p = SectionPoint.from_gap(SectionId.SIGMA1_IN, params.eps * math.exp(-L), phi1, phi2)
        outcome = return_map(p, gamma, params, unfolding)
        if outcome.escaped or outcome.symbol != i:
            return None
        gap = outcome.point.manifold_distance
        L_next = math.log(params.eps) - math.log(gap)
        # rounding of the lifted angles reaches L_next amplified by gamma / gap
        scale = gamma * (abs(phi1) + abs(phi2) + (xw1 + xw2) * L) + u_of(L)
        floor = ROUNDING_FLOOR_ULPS * EPS_MACHINE * scale / gap
        return L_next, outcome.point.phi2 + xw2 * L_next, floor * max(1.0, xw2)

    d_h = 0.0
    d_v = 0.0
    boundary_error = 0.0
    rounding_floor = 0.0
    empty = 0
    phis = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    for L in np.linspace(lo, hi, grid):
        u = u_of(L)
        try:
            v_bottom = unfolding.solve_offset(i, (s_bottom - u) / gamma, params)
            v_top = unfolding.solve_offset(i, (s_top - u) / gamma, params)
        except ImageRange:
            return PairVerdict(i, j, False, message=f"shell N={n} is not reached from C{i}^out")
        if max(abs(v_bottom), abs(v_top)) >= half:
            return PairVerdict(
                i, j, False,
                message=f"image of C{i}^out crosses shell N={n} outside the window "
                        f"(offset {max(abs(v_bottom), abs(v_top)):.3g} >= eps_out)",
            )
        d_v = max(d_v, abs(v_top - v_bottom))

        base_shift = xw1 * L + xw2 * lo
        critical = (theta_j - half - base_shift) % TWO_PI
        for phi1 in np.append(phis, critical):
            total = 0.0
            for beta0, beta1 in _window_pieces(phi1 + base_shift, theta_j, half):
                vs = []
                for beta in (beta0, beta1):
                    L_next = (beta - phi1 - xw1 * L) / xw2
                    vs.append(unfolding.solve_offset(i, (params.eps * math.exp(-L_next) - u) / gamma, params))
                total += abs(vs[1] - vs[0])
                for v in vs:
                    frame = image_frame(L, phi1, v)
                    if frame is None:
                        boundary_error = math.inf
                        continue
                    L_next, beta_next, floor = frame
                    rounding_floor = max(rounding_floor, floor)
                    boundary_error = max(boundary_error, min(
                        abs(L_next - lo), abs(L_next - hi),
                        abs(angle_offset(beta_next, theta_j - half)),
                        abs(angle_offset(beta_next, theta_j + half)),
                    ))
                frame = image_frame(L, phi1, 0.5 * (vs[0] + vs[1]))
                if frame is None or not (lo - BOUNDARY_TOL - frame[2] <= frame[0] <= hi + BOUNDARY_TOL + frame[2]
                                         and abs(angle_offset(frame[1], theta_j)) <= half + BOUNDARY_TOL):
                    return PairVerdict(i, j, False, message=f"interior of H_{i}{j} leaves S_{n},{j}")
            if total == 0.0:
                empty += 1
            d_h = max(d_h, total)

    if empty == grid * (grid + 1):
        return PairVerdict(i, j, False, message=str(EmptyIntersection(i, j)))

    nu_h = d_h / (2.0 * half)
    c_mid = 0.5 * (s_top + s_bottom)
    L_spread = abs(math.log((u_of(lo) + c_mid) / (u_of(hi) + c_mid))) / width
    nu_v = max(d_v / TWO_PI, L_spread)
    slab_ok = empty == 0 and boundary_error <= BOUNDARY_TOL + rounding_floor
    message = "" if slab_ok else (
        f"H_{i}{j} is not fully intersecting (empty at {empty} samples, boundary error {boundary_error:.3g} "
        f"against a rounding floor of {rounding_floor:.3g})"
    )
    return PairVerdict(i, j, slab_ok, nu_h, nu_v, nu_h * math.exp(TWO_PI * n), d_h, d_v,
                       boundary_error, rounding_floor, message)


def verify_conley_moser(n: int, gamma: float, params: ModelParams, grid: int = DEFAULT_GRID,
                        unfolding: Unfolding = DEFAULT_UNFOLDING) -> ConleyMoserReport:
    """
    Slab and contraction checks for the four pairs (i, j) of S_{N,1}, S_{N,2}.

    H_{i,j} is traced in the slab frame (L, phi1_in, phi2_out): for every grid point of the
    stable coordinates (L, phi1_in) the phi2_out-interval landing in S_{N,j} is solved in
    closed form and its endpoints are pushed through return_map to confirm they reach the
    boundary of S_{N,j}.

    Args:
        n: Turn index of the shell
        gamma: Unfolding parameter
        params: Model parameters
        grid: Samples per stable coordinate
        unfolding: Must be a TransverseUnfolding

    Returns:
        ConleyMoserReport; failures are reported, never raised

    Raises:
        NTooSmall: n does not exceed the slab threshold
    """
    out_slab(n, 1, params)
    if not isinstance(unfolding, TransverseUnfolding):
        raise PreconditionError("the horseshoe construction needs the transverse unfolding")
    report = ConleyMoserReport(n, gamma, slab_r1_extent=b_n(n, params) - b_n(n + 1, params))
    failure = None
    if gamma <= 0:
        failure = "coincident manifolds: gamma = 0 leaves no transverse crossing"
    elif gamma >= params.eps_out:
        failure = f"perturbation leaves window: gamma = {gamma} >= eps_out = {params.eps_out}"
    for i, j in itertools.product((1, 2), repeat=2):
        if failure is not None:
            report.pairs.append(PairVerdict(i, j, False, message=failure))
            continue
        verdict = _pair_verdict(i, j, n, gamma, params, unfolding, grid)
        if verdict.message:
            report.diagnostics.append(f"({i},{j}): {verdict.message}")
        report.pairs.append(verdict)
    if failure is not None:
        report.diagnostics.append(failure)
    logger.info(f"Conley-Moser N={n} gamma={gamma}: {'pass' if report.passed else 'fail'} "
                f"(nu_h={report.nu_h:.3g})")
    return report


@dataclass
class NuRegression:
    slope: float
    expected: float                     # -2*pi/(xi*omega2)
    n_values: List[int]

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.expected) / abs(self.expected)

    @property
    def within(self) -> bool:
        return self.relative_error <= NU_SLOPE_RTOL


def nu_regression(reports: Sequence[ConleyMoserReport], params: ModelParams) -> NuRegression:
    """Least-squares slope of ln(nu_h) against N over passing reports"""
    usable = [r for r in reports if r.passed]
    if len(usable) < 2:
        raise PreconditionError("nu_h regression needs at least two passing reports")
    ns = np.array([r.n for r in usable], dtype=float)
    slope = np.polyfit(ns, np.log([r.nu_h for r in usable]), 1)[0]
    dc = derived_constants(params)
    return NuRegression(float(slope), -TWO_PI / (dc.xi * params.omega2), [r.n for r in usable])


# Symbolic shooting

@dataclass
class _Shot:
    L: np.ndarray                       # L_0 .. L_n
    beta: np.ndarray                    # phi2_out of points 0 .. n-1
    phi1_start: float
    sweeps: int
    change: float
    converged: bool
    reason: str = ""


def _shoot(symbols: Sequence[int], shells: Sequence[Tuple[float, float]], L_start: float,
           phi1_start: float, L_end: float, gamma: float, params: ModelParams,
           unfolding: TransverseUnfolding) -> _Shot:
    """
    Solve for an orbit segment with prescribed symbols and shells.

    With beta_k = phi2_out of point k: beta_k = theta_{w_k} + c^-1((s_{k+1} - u(L_k))/gamma)
    is solved from the radial data and L_{k+1} = (beta_{k+1} - beta_{k-1} - xi*omega1*L_k)/(xi*omega2)
    is taken modulo the shell width; sweeps alternate until nothing moves.
    """
    n = len(symbols)
    dc = derived_constants(params)
    xw1 = dc.xi * params.omega1
    xw2 = dc.xi * params.omega2
    L = np.array([0.5 * (lo + hi) for lo, hi in shells])
    L[0], L[n] = L_start, L_end
    beta = np.full(n, np.nan)
    thetas = [params.theta_out(w) for w in symbols]
    change = math.inf
    for sweep in range(1, MAX_SHOOTING_SWEEPS + 1):
        try:
            new_beta = np.array([
                thetas[k] + unfolding.solve_offset(
                    symbols[k],
                    (params.eps * math.exp(-L[k + 1]) - params.eps * math.exp(-dc.delta * L[k])) / gamma,
                    params,
                )
                for k in range(n)
            ])
        except ImageRange as exc:
            return _Shot(L, beta, phi1_start, sweep, change, False, str(exc))
        new_L = L.copy()
        for k in range(1, n):
            lo, hi = shells[k]
            previous_phi1 = phi1_start if k == 1 else new_beta[k - 2]
            raw = (new_beta[k] - previous_phi1 - xw1 * new_L[k - 1]) / xw2
            new_L[k] = lo + (raw - lo) % (hi - lo)
        if sweep > 1:
            change = float(max(np.max(np.abs(new_beta - beta)), np.max(np.abs(new_L - L))))
        L, beta = new_L, new_beta
        if change < SHOOTING_SWEEP_TOL:
            offsets = np.abs([angle_offset(b, t) for b, t in zip(beta, thetas)])
            if np.any(offsets >= params.eps_out):
                k = int(np.argmax(offsets))
                return _Shot(L, beta, phi1_start, sweep, change, False,
                             f"step {k} leaves C{symbols[k]}^out (offset {offsets[k]:.3g})")
            return _Shot(L, beta, phi1_start, sweep, change, True)
    return _Shot(L, beta, phi1_start, MAX_SHOOTING_SWEEPS, change, False,
                 f"no convergence after {MAX_SHOOTING_SWEEPS} sweeps (change {change:.3g})")


def _chain_points(shot: _Shot, params: ModelParams) -> List[SectionPoint]:
    dc = derived_constants(params)
    xw1 = dc.xi * params.omega1
    xw2 = dc.xi * params.omega2
    n = len(shot.beta)
    phi1 = [shot.phi1_start] + list(shot.beta)
    points = [
        SectionPoint.from_gap(SectionId.SIGMA1_IN, params.eps * math.exp(-shot.L[k]), phi1[k],
                              shot.beta[k] - xw2 * shot.L[k])
        for k in range(n)
    ]
    points.append(SectionPoint.from_gap(SectionId.SIGMA1_IN, params.eps * math.exp(-shot.L[n]), phi1[n],
                                        phi1[n - 1] + xw1 * shot.L[n - 1]))
    return points


def _edge_margin(shot: _Shot, shells: Sequence[Tuple[float, float]], start: int, stop: int) -> float:
    margin = math.inf
    for k in range(max(start, 1), min(stop, len(shot.beta))):
        lo, hi = shells[k]
        margin = min(margin, (shot.L[k] - lo) / (hi - lo), (hi - shot.L[k]) / (hi - lo))
    return margin


def _cyclic(word: Sequence[int], count: int, before: bool) -> Tuple[int, ...]:
    if count <= 0:
        return ()
    repeated = tuple(word) * (count // len(word) + 1)
    return repeated[-count:] if before else repeated[:count]


@dataclass
class StepCheck:
    forward_symbols: List[int]
    backward_symbols: List[int]
    forward_residual: float
    backward_residual: float
    failed_at: Optional[int]


def _check_steps(chain: List[SectionPoint], symbols: Sequence[int], start: int, gamma: float,
                 params: ModelParams, unfolding: Unfolding) -> StepCheck:
    """
    Verify each step of a chain from both sides.

    Forward: return_map(chain[k]) lands on chain[k+1] with the expected symbol. Backward:
    the Psi21 preimage of chain[k+1] matches G(chain[k]) and g_inverse undoes G.
    """
    regions = out_regions(params)
    check = StepCheck([], [], 0.0, 0.0, None)
    for offset, symbol in enumerate(symbols):
        k = start + offset
        outcome = return_map(chain[k], gamma, params, unfolding)
        if outcome.escaped:
            check.failed_at = offset
            return check
        check.forward_symbols.append(outcome.symbol)
        forward = return_residual(chain[k + 1], outcome.point)

        q = outcome.out_point
        u, phi1_out, phi2_out = unfolding.preimage(
            chain[k + 1].manifold_distance, chain[k + 1].phi1, chain[k + 1].phi2, gamma, params
        )
        back = g_inverse(q, params)
        backward = max(
            abs(u - q.manifold_distance),
            abs(angle_offset(phi1_out - q.phi1, 0.0)),
            abs(angle_offset(phi2_out - q.phi2, 0.0)),
            abs(back.manifold_distance / chain[k].manifold_distance - 1.0),
            abs(angle_offset(back.phi1 - chain[k].phi1, 0.0)),
            abs(angle_offset(back.phi2 - chain[k].phi2, 0.0)),
        )
        back_symbol = next((r.index for r in regions if r.contains_angle(phi2_out)), None)
        check.backward_symbols.append(back_symbol)
        check.forward_residual = max(check.forward_residual, forward)
        check.backward_residual = max(check.backward_residual, backward)
        if (outcome.symbol != symbol or back_symbol != symbol
                or forward > BOUNDARY_TOL or backward > BOUNDARY_TOL):
            check.failed_at = offset
            return check
    return check


@dataclass
class RealizedWord:
    """Orbit segment of R_gamma carrying a prescribed word"""
    word: Tuple[int, ...]
    present: int                        # index in word of the returned point
    n: int
    gamma: float
    chain: List[SectionPoint]           # padded orbit segment solved by shooting
    offset: int                         # chain index of word[0]
    itinerary: Itinerary                # iterate(point) over word[present:]
    backward: Itinerary                 # iterate_backward(point) over word[:present]
    forward_symbols: List[int]          # symbols of the chain steps, checked with return_map
    backward_symbols: List[int]         # the same steps checked through the Psi21 preimage
    forward_residual: float
    backward_residual: float
    sweeps: int
    box_diameter: float                 # hull of the present point over the free ends of the padding

    @property
    def point(self) -> SectionPoint:
        return self.chain[self.offset + self.present]

    @property
    def orbit_depth(self) -> int:
        """Number of word symbols reproduced by the floating-point orbit of point"""
        depth = 0
        for got, want in zip(self.itinerary.symbols, self.word[self.present:]):
            if got != want:
                break
            depth += 1
        for got, want in zip(self.backward.symbols, reversed(self.word[:self.present])):
            if got != want:
                break
            depth += 1
        return depth

    @property
    def chain_verified(self) -> bool:
        """Every chain step reproduced from both sides and the refinement box below tolerance"""
        return (self.forward_symbols == list(self.word)
                and self.backward_symbols == list(self.word)
                and self.forward_residual <= BOUNDARY_TOL
                and self.backward_residual <= BOUNDARY_TOL
                and self.box_diameter < BOX_DIAMETER_TOL)

    @property
    def verified(self) -> bool:
        return self.chain_verified and self.orbit_depth == len(self.word)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for k, symbol in enumerate(self.word):
            pt = self.chain[self.offset + k]
            rows.append({"index": k - self.present, "symbol": symbol, "r1in": pt.radial,
                         "gap": pt.manifold_distance, "phi1": pt.phi1, "phi2": pt.phi2})
        return pd.DataFrame(rows, columns=["index", "symbol", "r1in", "gap", "phi1", "phi2"])


def _shot_coordinates(shot: _Shot, k: int) -> Tuple[float, float, float]:
    """(L, phi1_in, phi2_out) of point k of a shot"""
    phi1 = shot.phi1_start if k == 0 else shot.beta[k - 1]
    return shot.L[k], phi1, shot.beta[k]


def _refinement_box(shot: _Shot, symbols: Sequence[int], shells: Sequence[Tuple[float, float]], k: int,
                    gamma: float, params: ModelParams, unfolding: TransverseUnfolding) -> float:
    """
    Diameter of the hull of point k over shots with the free ends moved across their shells.

    The samples span the orbit segments carrying the padded symbols, so the diameter measures
    how tightly the padding pins down the point.
    """
    L_ref, phi1_ref, beta_ref = _shot_coordinates(shot, k)
    samples = [(0.0, 0.0, 0.0)]
    lo_start, hi_start = shells[0]
    lo_end, hi_end = shells[-1]
    edge = 1e-9
    for turn in range(4):
        phi1 = shot.phi1_start + 0.5 * math.pi * turn
        for L_start in (lo_start + edge * (hi_start - lo_start), hi_start - edge * (hi_start - lo_start)):
            for L_end in (lo_end + edge * (hi_end - lo_end), hi_end - edge * (hi_end - lo_end)):
                other = _shoot(symbols, shells, L_start, phi1, L_end, gamma, params, unfolding)
                if not other.converged:
                    logger.debug(f"Refinement shot from phi1={phi1:.3f}: {other.reason}")
                    continue
                L, phi1_k, beta = _shot_coordinates(other, k)
                samples.append((L - L_ref, angle_offset(phi1_k, phi1_ref), angle_offset(beta, beta_ref)))
    if len(samples) == 1:
        return math.inf
    return Box.hull(np.array(samples)).diameter()


def _realize(word: Sequence[int], present: int, shells_n: Sequence[int], gamma: float,
             params: ModelParams, unfolding: Unfolding, pad: int,
             check_range: Optional[Tuple[int, int]] = None) -> RealizedWord:
    word = tuple(int(w) for w in word)
    if not word:
        raise PreconditionError("word must contain at least one symbol")
    if any(w not in (1, 2) for w in word):
        raise PreconditionError(f"symbols must be 1 or 2, got {word}")
    if gamma <= 0:
        raise CoincidentManifolds("words are only realized for gamma > 0")
    if not isinstance(unfolding, TransverseUnfolding):
        raise PreconditionError("word realization needs the transverse unfolding")

    past = _cyclic(word, pad, before=True)
    future = _cyclic(word, pad, before=False)
    symbols = past + word + future
    shell_ids = [shells_n[0]] * pad + list(shells_n) + [shells_n[-1]] * (pad + 1)
    shells = [shell_log_bounds(k, params) for k in shell_ids]
    offset = len(past)
    start, stop = check_range if check_range is not None else (offset, offset + len(word) + 1)

    best = None
    best_margin = -math.inf
    last_reason = ""
    for seed in range(SHOOTING_SEEDS):
        mid_start = 0.5 * sum(shells[0])
        mid_end = 0.5 * sum(shells[-1])
        shot = _shoot(symbols, shells, mid_start, TWO_PI * seed / SHOOTING_SEEDS, mid_end,
                      gamma, params, unfolding)
        if not shot.converged:
            last_reason = shot.reason
            logger.debug(f"Seed {seed} for word {word}: {shot.reason}")
            continue
        margin = _edge_margin(shot, shells, start, stop)
        if margin > best_margin:
            best, best_margin = shot, margin
        if margin >= SHELL_EDGE_MARGIN:
            break
    if best is None:
        raise RefinementFailure(0, f"shooting failed for word {word}: {last_reason}")
    if best_margin < SHELL_EDGE_MARGIN:
        logger.warning(f"Word {word}: orbit passes within {best_margin:.2%} of a shell edge")

    chain = _chain_points(best, params)
    check = _check_steps(chain, word, offset, gamma, params, unfolding)
    if check.failed_at is not None:
        raise RefinementFailure(check.failed_at, f"verification of word {word} failed")
    diameter = _refinement_box(best, symbols, shells, offset + present, gamma, params, unfolding)
    if diameter >= BOX_DIAMETER_TOL:
        raise RefinementFailure(len(word), f"refinement box for word {word} has diameter {diameter:.3g}")

    point = chain[offset + present]
    if present < len(word):
        forward = iterate(point, gamma, len(word) - present, params, unfolding)
    else:
        forward = Itinerary(start=point)
    if present > 0:
        backward = iterate_backward(point, gamma, present, params, unfolding)
    else:
        backward = Itinerary(start=point, backward=True)
    realized = RealizedWord(word, present, shells_n[0], gamma, chain, offset, forward, backward,
                            check.forward_symbols, check.backward_symbols, check.forward_residual,
                            check.backward_residual, best.sweeps, diameter)
    if realized.orbit_depth < len(word) and check_range is None:
        logger.warning(f"Word {word}: the floating-point orbit follows {realized.orbit_depth} of "
                       f"{len(word)} symbols; the rest is carried by the verified chain")
    logger.debug(f"Realized word {word} in {best.sweeps} sweeps (box diameter {diameter:.3g})")
    return realized


def realize_word(word: Sequence[int], n: int, gamma: float, params: ModelParams,
                 unfolding: Unfolding = DEFAULT_UNFOLDING, pad: int = WORD_PADDING) -> RealizedWord:
    """
    Point of S_{N,word[0]} whose next len(word) returns cross the out-regions named by the word.

    The word is embedded in its own periodic extension, pad symbols on each side, so the
    realized point also lies in the depth-pad cylinders of Lambda_N.

    The itinerary is the floating-point orbit of the returned point. Each return expands
    errors by roughly 1/nu_h, so long words are followed only to orbit_depth symbols; verified
    is set when that orbit reproduces the whole word, chain_verified when the shooting chain does.

    Raises:
        NTooSmall: n below the slab threshold
        CoincidentManifolds: gamma <= 0
        RefinementFailure: shooting or verification failed, with the depth reached
    """
    out_slab(n, 1, params)
    return _realize(word, 0, [n] * len(word), gamma, params, unfolding, pad)


def realize_bi_word(past: Sequence[int], future: Sequence[int], n: int, gamma: float,
                    params: ModelParams, unfolding: Unfolding = DEFAULT_UNFOLDING,
                    pad: int = WORD_PADDING) -> RealizedWord:
    """
    Point whose backward orbit crosses past (read right to left) and forward orbit crosses future.

    future[0] is the symbol of the returned point itself.
    """
    if not future:
        raise PreconditionError("future must contain the symbol of the present point")
    out_slab(n, 1, params)
    word = tuple(past) + tuple(future)
    return _realize(word, len(past), [n] * len(word), gamma, params, unfolding, pad)


@dataclass
class PeriodicOrbit:
    block: Tuple[int, ...]
    n: int
    gamma: float
    points: List[SectionPoint]
    closing_residual: float             # distance between the orbit start and its return after one period
    map_residual: float                 # max step residual of return_map around the orbit

    @property
    def point(self) -> SectionPoint:
        return self.points[0]


def _frame_distance(p: SectionPoint, q: SectionPoint, params: ModelParams) -> float:
    log_eps = math.log(params.eps)
    return max(
        abs((log_eps - math.log(p.manifold_distance)) - (log_eps - math.log(q.manifold_distance))),
        abs(angle_offset(p.phi1 - q.phi1, 0.0)),
        abs(angle_offset(p.phi2 - q.phi2, 0.0)),
    )


def realize_periodic(block: Sequence[int], n: int, gamma: float, params: ModelParams,
                     unfolding: Unfolding = DEFAULT_UNFOLDING) -> PeriodicOrbit:
    """
    Periodic point of R_gamma in Lambda_N whose symbols repeat block.

    A long chain of repeated blocks is shot; the transient from the free starting point
    contracts away and a period near the end of the chain is returned.
    """
    block = tuple(block)
    if not block:
        raise PreconditionError("block must contain at least one symbol")
    out_slab(n, 1, params)
    period = len(block)
    head = period * math.ceil(PERIODIC_HEAD_STEPS / period)
    repeats = (head + PERIODIC_TAIL_STEPS) // period + 2
    word = block * repeats
    realized = _realize(word, head, [n] * len(word), gamma, params, unfolding, pad=0,
                        check_range=(head, head + period + 1))
    orbit = realized.chain[head:head + period]
    closing = _frame_distance(orbit[0], realized.chain[head + period], params)
    map_residual = 0.0
    for k, pt in enumerate(orbit):
        outcome = return_map(pt, gamma, params, unfolding)
        target = orbit[(k + 1) % period]
        map_residual = math.inf if outcome.escaped else max(map_residual, return_residual(target, outcome.point))
    return PeriodicOrbit(block, n, gamma, orbit, closing, map_residual)


# Cover of Lambda_N

@dataclass
class CoverBox:
    """
    Box in the slab frame (L, phi1_in - phi1_ref, phi2_out - beta_ref).

    L = ln(eps) - ln(1 - r1_in); angle coordinates are reduced about the reference angles.
    """
    box: Box
    past: Tuple[int, ...]
    future: Tuple[int, ...]
    phi1_ref: float
    beta_ref: float

    def coordinates(self, p: SectionPoint, params: ModelParams) -> np.ndarray:
        dc = derived_constants(params)
        L = math.log(params.eps) - math.log(p.manifold_distance)
        return np.array([
            L,
            angle_offset(p.phi1, self.phi1_ref),
            angle_offset(p.phi2 + dc.xi * params.omega2 * L, self.beta_ref),
        ])

    def contains(self, p: SectionPoint, params: ModelParams) -> bool:
        return self.coordinates(p, params) in self.box


@dataclass
class CoverLevel:
    depth: int
    boxes: List[CoverBox]
    unresolved: int = 0

    @property
    def content(self) -> float:
        return sum(b.box.content() for b in self.boxes)

    @property
    def count(self) -> int:
        return len(self.boxes)

    @property
    def mean_diameter(self) -> float:
        return float(np.mean([b.box.diameter() for b in self.boxes])) if self.boxes else math.nan


@dataclass
class LambdaCover:
    n: int
    gamma: float
    levels: List[CoverLevel]
    exhausted: bool = False
    message: str = ""

    @property
    def contents(self) -> List[float]:
        return [level.content for level in self.levels]

    @property
    def content_ratios(self) -> List[float]:
        c = self.contents
        return [c[k + 1] / c[k] for k in range(len(c) - 1)]

    @property
    def decreasing(self) -> bool:
        return all(r < 1.0 for r in self.content_ratios)

    def box_counting_exponent(self) -> float:
        """Crude slope of ln(count) against -ln(mean diameter) over depths >= 1"""
        usable = [lv for lv in self.levels[1:] if lv.boxes]
        if len(usable) < 2:
            return math.nan
        x = -np.log([lv.mean_diameter for lv in usable])
        y = np.log([lv.count for lv in usable])
        return float(np.polyfit(x, y, 1)[0])

    def contains(self, p: SectionPoint, params: ModelParams, depth: Optional[int] = None) -> bool:
        level = self.levels[-1 if depth is None else depth]
        return any(b.contains(p, params) for b in level.boxes)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for level in self.levels:
            for b in level.boxes:
                rows.append({
                    "depth": level.depth,
                    "past": "".join(map(str, b.past)),
                    "future": "".join(map(str, b.future)),
                    "L_lo": b.box.lower[0], "L_hi": b.box.upper[0],
                    "phi1_lo": b.phi1_ref + b.box.lower[1], "phi1_hi": b.phi1_ref + b.box.upper[1],
                    "beta_lo": b.beta_ref + b.box.lower[2], "beta_hi": b.beta_ref + b.box.upper[2],
                    "content": b.box.content(),
                })
        return pd.DataFrame(rows)


def _cylinder_boxes(past: Tuple[int, ...], future: Tuple[int, ...], n: int, gamma: float,
                    params: ModelParams, unfolding: TransverseUnfolding, grid: int) -> List[CoverBox]:
    """Hull boxes of the cylinder {past . future} sampled over the free ends of the segment"""
    lo, hi = shell_log_bounds(n, params)
    width = hi - lo
    edge = 1e-9 * width
    symbols = past + future
    shells = [(lo, hi)] * (len(symbols) + 1)
    d = len(past)
    phi1_ref = params.theta_out(past[-1])
    beta_ref = params.theta_out(future[0])
    samples = []
    for phi1 in np.linspace(0.0, TWO_PI, grid, endpoint=False):
        for L_start in (lo + edge, hi - edge):
            for L_end in (lo + edge, hi - edge):
                shot = _shoot(symbols, shells, L_start, phi1, L_end, gamma, params, unfolding)
                if shot.converged:
                    samples.append((shot.L[d], angle_offset(shot.beta[d - 1], phi1_ref),
                                    angle_offset(shot.beta[d], beta_ref)))
    if not samples:
        return []
    samples = np.array(sorted(samples))
    # a cylinder straddling the shell edge is split into its two sides
    gaps = np.diff(samples[:, 0])
    clusters = [samples]
    if gaps.size and gaps.max() > 0.5 * width:
        cut = int(np.argmax(gaps)) + 1
        clusters = [samples[:cut], samples[cut:]]
    boxes = []
    for cluster in clusters:
        hull = Box.hull(cluster)
        boxes.append(CoverBox(grow(hull, COVER_MARGIN * hull.extent() + 1e-12), past, future,
                              phi1_ref, beta_ref))
    return boxes


def lambda_cover(n: int, gamma: float, depth: int, params: ModelParams, grid: int = DEFAULT_GRID,
                 unfolding: Unfolding = DEFAULT_UNFOLDING, progress: bool = False) -> LambdaCover:
    """
    Box covers of the points whose orbit stays in S_{N,1} u S_{N,2} for depth steps both ways.

    Depth 0 is the pair of slabs; depth d has one box per two-sided cylinder with d past and
    d + 1 future symbols (two when the cylinder straddles a shell edge). Contents are box
    volumes in the slab frame.

    Raises:
        NTooSmall: n below the slab threshold
        CoincidentManifolds: gamma <= 0
    """
    out_slab(n, 1, params)
    if gamma <= 0:
        raise CoincidentManifolds("Lambda_N needs gamma > 0")
    if not isinstance(unfolding, TransverseUnfolding):
        raise PreconditionError("the horseshoe cover needs the transverse unfolding")
    if depth < 0:
        raise PreconditionError(f"depth must be >= 0, got {depth}")

    lo, hi = shell_log_bounds(n, params)
    half = params.eps_out
    slabs = [
        CoverBox(Box([lo, -math.pi, -half], [hi, math.pi, half]), (), (i,), 0.0, params.theta_out(i))
        for i in (1, 2)
    ]
    cover = LambdaCover(n, gamma, [CoverLevel(0, slabs)])
    for d in range(1, depth + 1):
        words = [(p, f) for p in itertools.product((1, 2), repeat=d)
                 for f in itertools.product((1, 2), repeat=d + 1)]
        level = CoverLevel(d, [])
        for past, future in tqdm(words, desc=f"cover depth {d}", disable=not progress):
            boxes = _cylinder_boxes(past, future, n, gamma, params, unfolding, grid)
            if not boxes:
                level.unresolved += 1
            level.boxes.extend(boxes)
        cover.levels.append(level)
        logger.debug(f"Depth {d}: {level.count} boxes, content {level.content:.3e}")
        if level.unresolved:
            cover.exhausted = True
            cover.message = f"{level.unresolved} cylinders at depth {d} unresolved on a grid of {grid}"
            logger.warning(cover.message)
            break
    return cover


# Shell-to-shell orbits (experimental)

@dataclass
class HeteroclinicRelation:
    """Orbit segments leaving Lambda_N towards Lambda_M and back"""
    n: int
    m: int
    forward: Optional[RealizedWord]
    backward: Optional[RealizedWord]
    messages: List[str] = field(default_factory=list)
    experimental: bool = True

    @property
    def related(self) -> bool:
        return (self.forward is not None and self.forward.verified
                and self.backward is not None and self.backward.verified)


def heteroclinic_relation(n: int, m: int, gamma: float, params: ModelParams, length: int = 4,
                          unfolding: Unfolding = DEFAULT_UNFOLDING) -> HeteroclinicRelation:
    """
    Search for orbit segments that spend length returns in shell N and then length in shell M,
    and the reverse. Success is evidence, not a certificate.
    """
    out_slab(min(n, m), 1, params)
    relation = HeteroclinicRelation(n, m, None, None)
    word = (1,) * (2 * length)
    for attr, shells in (("forward", [n] * length + [m] * length), ("backward", [m] * length + [n] * length)):
        try:
            setattr(relation, attr, _realize(word, length, shells, gamma, params, unfolding, pad=length))
        except (RefinementFailure, CoincidentManifolds) as exc:
            relation.messages.append(f"{attr}: {exc}")
    return relation
