"""ODE backend: truncated Hopf-Hopf system, Gaspard-type unfoldings and event detection"""

import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import optimize
from scipy.integrate import solve_ivp
from tqdm import tqdm

from ..core.constants import (
    BLOWUP_BOUND,
    DEFAULT_INTEGRATION_TOL,
    DEFAULT_METHOD,
    EQUILIBRIUM_RESIDUAL,
    EQUILIBRIUM_SEEDS,
    EQUIVARIANCE_SAMPLES,
    EVENT_TOL,
    HET_BRACKET_FRACTION,
    HET_START_OFFSET,
    LOCAL_DEVIATION_TOL,
    LOCAL_SAMPLE_GAP_MIN,
    MAX_INTEGRATION_TOL,
    MIN_INTEGRATION_TOL,
    RECTANGULAR_SWITCH_RADIUS,
    TWO_PI,
)
from ..core.errors import IntegrationError, InvalidParameters, NoCrossing, PreconditionError
from ..core.model import ModelParams
from ..core.sections import SectionId, SectionPoint, State4, fixed_coordinate, to_section
from ..utils.utilities import log_grid, make_rng
from .local_maps import local_node, pi0, pi1, pi2

logger = logging.getLogger(__name__)

Perturbation = Callable[[float, float], float]
Field = Callable[[np.ndarray], np.ndarray]

COORDINATES = ("bipolar", "cartesian", "amplitude", "local")
SUBSTEPS = 8                    # dense-output samples per solver step when scanning for crossings


@dataclass(frozen=True)
class HHCoefficients:
    """Coefficients of the order-5 truncated Hopf-Hopf normal form"""
    p11: float = 1.0
    p12: float = 3.0
    p21: float = -2.0
    p22: float = -1.0
    s1: float = -0.1
    s2: float = -0.1
    mu1: float = -1e-3
    mu2: float = 7.5e-4
    omega1: float = 0.45
    omega2: float = 0.75

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidParameters(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameters(f"{f.name} must be finite, got {value!r}")

    @property
    def delta_c(self) -> float:
        return self.p21 / self.p11 if self.p11 != 0 else math.inf

    @property
    def theta_c(self) -> float:
        return self.p12 / self.p22 if self.p22 != 0 else math.inf

    @property
    def sign_condition(self) -> float:
        """p21(p21-p11)s1 + p12(p12-p22)s2, negative in the difficult case"""
        return (self.p21 * (self.p21 - self.p11) * self.s1
                + self.p12 * (self.p12 - self.p22) * self.s2)

    def condition_violations(self) -> List[str]:
        """List every violated difficult-case condition (empty if none)"""
        problems = []
        if not self.p11 * self.p22 < 0:
            problems.append(f"p11*p22 < 0 violated (p11={self.p11}, p22={self.p22})")
        if not self.delta_c < 0:
            problems.append(f"delta_c = p21/p11 must be negative, got {self.delta_c}")
        if not self.theta_c < 0:
            problems.append(f"theta_c = p12/p22 must be negative, got {self.theta_c}")
        if not self.delta_c * self.theta_c > 1:
            problems.append(f"delta_c*theta_c must exceed 1, got {self.delta_c * self.theta_c}")
        if not self.sign_condition < 0:
            problems.append(f"p21(p21-p11)s1 + p12(p12-p22)s2 must be negative, got {self.sign_condition}")
        if self.omega1 <= 0 or self.omega2 <= 0:
            problems.append("omega1 and omega2 must be positive")
        return problems

    def with_mu(self, mu1: float, mu2: float) -> "HHCoefficients":
        return replace(self, mu1=mu1, mu2=mu2)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def amplitude_field(r: np.ndarray, c: HHCoefficients) -> np.ndarray:
    """Radial part of the truncated system"""
    r1, r2 = r[0], r[1]
    return np.array([
        r1 * (c.mu1 + c.p11 * r1**2 + c.p12 * r2**2 + c.s1 * r2**4),
        r2 * (c.mu2 + c.p21 * r1**2 + c.p22 * r2**2 + c.s2 * r1**4),
    ])


def amplitude_jacobian(r: np.ndarray, c: HHCoefficients) -> np.ndarray:
    r1, r2 = float(r[0]), float(r[1])
    a = c.mu1 + c.p11 * r1**2 + c.p12 * r2**2 + c.s1 * r2**4
    b = c.mu2 + c.p21 * r1**2 + c.p22 * r2**2 + c.s2 * r1**4
    return np.array([
        [a + 2 * c.p11 * r1**2, r1 * (2 * c.p12 * r2 + 4 * c.s1 * r2**3)],
        [r2 * (2 * c.p21 * r1 + 4 * c.s2 * r1**3), b + 2 * c.p22 * r2**2],
    ])


def truncated_field(state: np.ndarray, c: HHCoefficients) -> np.ndarray:
    """
    Truncated Hopf-Hopf field in bipolar coordinates.

    Args:
        state: (r1, r2, phi1, phi2) with r1, r2 >= 0
        c: Normal form coefficients

    Returns:
        (dr1, dr2, dphi1, dphi2); the angles rotate at constant speed
    """
    radial = amplitude_field(state, c)
    return np.array([radial[0], radial[1], c.omega1, c.omega2])


def cartesian_field(x: np.ndarray, c: HHCoefficients, gamma: float = 0.0,
                    H: Optional[Sequence[Optional[Perturbation]]] = None) -> np.ndarray:
    """Truncated (or Gaspard-perturbed) field in rectangular coordinates x1..x4"""
    x1, x2, x3, x4 = x
    r1 = math.hypot(x1, x2)
    r2 = math.hypot(x3, x4)
    a = c.mu1 + c.p11 * r1**2 + c.p12 * r2**2 + c.s1 * r2**4
    b = c.mu2 + c.p21 * r1**2 + c.p22 * r2**2 + c.s2 * r1**4
    w1, w2 = c.omega1, c.omega2
    if gamma != 0.0 and H is not None:
        h = _perturbation_values(H, r1, r2)
        # H1, H2 are odd in their own radius, so H/r extends continuously to r = 0
        a += gamma * h[0] / r1 if r1 > 0 else 0.0
        b += gamma * h[1] / r2 if r2 > 0 else 0.0
        w1 += gamma * h[2]
        w2 += gamma * h[3]
    return np.array([a * x1 - w1 * x2, a * x2 + w1 * x1, b * x3 - w2 * x4, b * x4 + w2 * x3])


def _perturbation_values(H: Sequence[Optional[Perturbation]], r1: float, r2: float) -> np.ndarray:
    return np.array([0.0 if h is None else float(h(r1, r2)) for h in H])


def check_perturbation(H: Sequence[Optional[Perturbation]], samples: int = EQUIVARIANCE_SAMPLES,
                       seed: int = 0) -> List[str]:
    """
    Spot-check the Gaspard-type contract on a perturbation.

    H1 must be odd in r1 and even in r2, H2 odd in r2 and even in r1, H3 and H4
    even in both. H1 and H2 must vanish to order 6 at the origin.

    Returns:
        Descriptions of every violation found (empty if none)
    """
    if len(H) != 4:
        raise PreconditionError(f"H needs four components, got {len(H)}")
    rng = make_rng(seed)
    points = rng.uniform(0.1, 0.9, size=(samples, 2))
    # (sign under r1 -> -r1, sign under r2 -> -r2) per component
    parity = ((-1.0, 1.0), (1.0, -1.0), (1.0, 1.0), (1.0, 1.0))
    problems = []
    for k, h in enumerate(H):
        if h is None:
            continue
        s1, s2 = parity[k]
        for r1, r2 in points:
            value = float(h(r1, r2))
            scale = 1e-12 * (1.0 + abs(value))
            if abs(float(h(-r1, r2)) - s1 * value) > scale:
                problems.append(f"H{k + 1} breaks the r1 -> -r1 symmetry at ({r1:.3g}, {r2:.3g})")
                break
            if abs(float(h(r1, -r2)) - s2 * value) > scale:
                problems.append(f"H{k + 1} breaks the r2 -> -r2 symmetry at ({r1:.3g}, {r2:.3g})")
                break
        if k < 2:
            lam = 1e-2
            for r1, r2 in points:
                small = abs(float(h(lam * r1, lam * r2)))
                if small > 10.0 * lam**6 * max(abs(float(h(r1, r2))), 1e-300):
                    problems.append(f"H{k + 1} does not vanish to order 6 at the origin")
                    break
    return problems


class GaspardField:
    """
    Truncated field plus a gamma-scaled perturbation H = (H1, H2, H3, H4).

    The perturbation contract is spot-checked once on construction; violations
    are logged as warnings and kept in self.violations.
    """

    def __init__(self, c: HHCoefficients, gamma: float,
                 H: Sequence[Optional[Perturbation]], check: bool = True, seed: int = 0):
        self.logger = logging.getLogger(__name__)
        self.c = c
        self.gamma = gamma
        self.H = tuple(H)
        self.violations: List[str] = []
        if len(self.H) != 4:
            raise PreconditionError(f"H needs four components, got {len(self.H)}")
        if check:
            self.violations = check_perturbation(self.H, seed=seed)
            for problem in self.violations:
                self.logger.warning(f"Gaspard perturbation: {problem}")

    def __call__(self, state: np.ndarray) -> np.ndarray:
        base = truncated_field(state, self.c)
        if self.gamma == 0.0:
            return base
        return base + self.gamma * _perturbation_values(self.H, state[0], state[1])

    def cartesian(self, x: np.ndarray) -> np.ndarray:
        return cartesian_field(x, self.c, self.gamma, self.H)


def gaspard_field(state: np.ndarray, c: HHCoefficients, gamma: float,
                  H: Sequence[Optional[Perturbation]]) -> np.ndarray:
    """One evaluation of the Gaspard-type unfolding (builds and checks a GaspardField)"""
    return GaspardField(c, gamma, H)(state)


@dataclass(frozen=True)
class HetCurvePoint:
    mu1: float
    mu2: float
    order: int                          # order of the expansion in mu1 that was evaluated
    delta_c: float
    theta_c: float


def het_curve(mu1: float, c: HHCoefficients) -> HetCurvePoint:
    """
    First-order location of the heteroclinic cycle in the (mu1, mu2) plane.

    mu2 = -((delta_c - 1)/(theta_c - 1)) * mu1

    Raises:
        PreconditionError: theta_c = 1
    """
    theta_c = c.theta_c
    if abs(theta_c - 1.0) < 1e-14:
        raise PreconditionError("theta_c = 1: the Het curve is undefined")
    mu2 = -((c.delta_c - 1.0) / (theta_c - 1.0)) * mu1
    return HetCurvePoint(mu1=mu1, mu2=mu2 + 0.0, order=1, delta_c=c.delta_c, theta_c=theta_c)


@dataclass
class Equilibrium:
    kind: str                           # "O", "E1", "E2" or "interior"
    r1: float
    r2: float
    eigenvalues: np.ndarray
    stability: str                      # sink, source, saddle or non-hyperbolic
    residual: float

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "r1": self.r1,
            "r2": self.r2,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in np.asarray(self.eigenvalues, dtype=complex)],
            "stability": self.stability,
            "residual": self.residual,
        }


@dataclass
class EquilibriumSet:
    equilibria: List[Equilibrium] = field(default_factory=list)
    failed_seeds: List[Tuple[float, float]] = field(default_factory=list)

    def by_kind(self, kind: str) -> List[Equilibrium]:
        return [e for e in self.equilibria if e.kind == kind]

    def to_dict(self) -> Dict:
        return {
            "equilibria": [e.to_dict() for e in self.equilibria],
            "failed_seeds": [list(s) for s in self.failed_seeds],
        }


def _stability(eigenvalues: np.ndarray, jac: np.ndarray) -> str:
    re = np.real(eigenvalues)
    zero = 1e-12 * max(1.0, float(np.linalg.norm(jac)))
    if np.any(np.abs(re) <= zero):
        return "non-hyperbolic"
    if np.all(re < 0):
        return "sink"
    if np.all(re > 0):
        return "source"
    return "saddle"


def _equilibrium(kind: str, r1: float, r2: float, c: HHCoefficients) -> Equilibrium:
    r = np.array([r1, r2])
    jac = amplitude_jacobian(r, c)
    eigenvalues = np.linalg.eigvals(jac)
    if np.all(np.abs(np.imag(eigenvalues)) == 0):
        eigenvalues = np.real(eigenvalues)
    residual = float(np.max(np.abs(amplitude_field(r, c))))
    return Equilibrium(kind, r1, r2, eigenvalues, _stability(eigenvalues, jac), residual)


def _axis_root(p: float, mu: float) -> Optional[float]:
    # r*(mu + p*r^2) = 0 restricted to r > 0
    if p == 0:
        return None
    for root in np.roots([p, 0.0, mu]):
        if abs(root.imag) == 0 and root.real > 0:
            return float(root.real)
    return None


def amplitude_equilibria(c: HHCoefficients) -> EquilibriumSet:
    """
    Find the equilibria of the amplitude system in the closed positive quadrant.

    Axis equilibria come from the radial polynomials; interior equilibria are
    solved in the squared variables (x, y) = (r1^2, r2^2) from a log-spaced grid
    of Newton seeds and deduplicated.

    Returns:
        EquilibriumSet with the origin, E1 (r2 = 0), E2 (r1 = 0), interior points
        and the seeds whose solve did not converge
    """
    result = EquilibriumSet()
    result.equilibria.append(_equilibrium("O", 0.0, 0.0, c))

    r1_axis = _axis_root(c.p11, c.mu1)
    if r1_axis is not None:
        result.equilibria.append(_equilibrium("E1", r1_axis, 0.0, c))
    r2_axis = _axis_root(c.p22, c.mu2)
    if r2_axis is not None:
        result.equilibria.append(_equilibrium("E2", 0.0, r2_axis, c))

    def squared(v):
        x, y = v
        return [c.mu1 + c.p11 * x + c.p12 * y + c.s1 * y**2,
                c.mu2 + c.p21 * x + c.p22 * y + c.s2 * x**2]

    scale = max(abs(c.mu1), abs(c.mu2), 1e-12)
    seeds = np.geomspace(1e-2 * scale, max(1e2 * scale, 1e2), EQUILIBRIUM_SEEDS)
    found: List[np.ndarray] = []
    for x0 in seeds:
        for y0 in seeds:
            solution, info, ier, msg = optimize.fsolve(squared, [x0, y0], full_output=True, xtol=1e-14)
            if ier != 1 or np.max(np.abs(info["fvec"])) > EQUILIBRIUM_RESIDUAL:
                result.failed_seeds.append((float(x0), float(y0)))
                logger.debug(f"Interior seed ({x0:.3g}, {y0:.3g}) did not converge: {msg}")
                continue
            x, y = solution
            if x <= 1e-12 * scale or y <= 1e-12 * scale:
                continue
            if any(np.linalg.norm(solution - f) <= 1e-8 * (1.0 + np.linalg.norm(f)) for f in found):
                continue
            found.append(solution)
            result.equilibria.append(_equilibrium("interior", math.sqrt(x), math.sqrt(y), c))
    return result


@dataclass
class Event:
    """
    Level-set event g(state) = 0, usable directly as a solve_ivp event.

    terminal and direction follow the solve_ivp conventions.
    """
    name: str
    level: Callable[[np.ndarray], float]
    terminal: bool = False
    direction: float = 0.0
    section: Optional[SectionId] = None

    def __call__(self, t: float, y: np.ndarray) -> float:
        return self.level(y)


def radial_pair(y: np.ndarray, coordinates: str) -> Tuple[float, float]:
    """(r1, r2) of a state in bipolar, amplitude or cartesian coordinates"""
    if coordinates == "cartesian":
        return math.hypot(y[0], y[1]), math.hypot(y[2], y[3])
    return float(y[0]), float(y[1])


def section_level(section: SectionId, eps: float, coordinates: str = "bipolar") -> Callable[[np.ndarray], float]:
    """Level function whose zero set is the section's fixed radial coordinate"""
    name, value = fixed_coordinate(section, eps)
    index = 0 if name == "r1" else 1

    def level(y: np.ndarray) -> float:
        return radial_pair(y, coordinates)[index] - value

    return level


def section_event(section: SectionId, eps: float, coordinates: str = "bipolar",
                  direction: float = 0.0, terminal: bool = False) -> Event:
    return Event(section.value, section_level(section, eps, coordinates), terminal, direction, section)


def _section_point(y: np.ndarray, section: SectionId, eps: float, coordinates: str) -> SectionPoint:
    if coordinates == "cartesian":
        return to_section(State4.from_array(y), section, eps, tol=1e-9)
    name, _ = fixed_coordinate(section, eps)
    radial = float(y[1]) if name == "r1" else float(y[0])
    return SectionPoint(section, radial, float(y[2]), float(y[3]))


@dataclass
class EventRecord:
    name: str
    t: float
    state: np.ndarray
    point: Optional[SectionPoint] = None

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "t": self.t,
            "state": [float(v) for v in self.state],
            "point": None if self.point is None else self.point.as_row(),
        }


@dataclass
class Trajectory:
    """Solver output with dense interpolation and recorded events"""
    t: np.ndarray
    y: np.ndarray                       # shape (dimension, samples)
    sol: object                         # scipy OdeSolution
    events: List[EventRecord]
    method: str
    tol: float                          # per-step error bound, also bounds the interpolant
    coordinates: str = "bipolar"

    def __post_init__(self):
        steps = np.diff(self.t)
        if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
            raise IntegrationError("trajectory times are not strictly monotone")

    @property
    def forward(self) -> bool:
        return self.t.size < 2 or self.t[-1] > self.t[0]

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        return self.sol(t)

    @property
    def end(self) -> np.ndarray:
        return self.y[:, -1]

    def to_frame(self) -> pd.DataFrame:
        """Samples as a table; bipolar states are written in rectangular coordinates"""
        if self.coordinates == "bipolar":
            r1, r2, p1, p2 = self.y
            data = {"t": self.t, "x1": r1 * np.cos(p1), "x2": r1 * np.sin(p1),
                    "x3": r2 * np.cos(p2), "x4": r2 * np.sin(p2)}
        elif self.coordinates == "cartesian":
            data = {"t": self.t, "x1": self.y[0], "x2": self.y[1], "x3": self.y[2], "x4": self.y[3]}
        elif self.coordinates == "amplitude":
            data = {"t": self.t, "r1": self.y[0], "r2": self.y[1]}
        else:
            data = {"t": self.t, "x": self.y[0], "y": self.y[1], "phi1": self.y[2], "phi2": self.y[3]}
        return pd.DataFrame(data)

    def events_to_list(self) -> List[Dict]:
        return [e.to_dict() for e in self.events]


def integrate(start: Union[State4, Sequence[float], np.ndarray], field: Field,
              t_span: Tuple[float, float], tol: float = DEFAULT_INTEGRATION_TOL,
              method: str = DEFAULT_METHOD, events: Sequence[Event] = (),
              coordinates: str = "bipolar", atol: Optional[float] = None,
              blowup: float = BLOWUP_BOUND, eps: float = 1.0) -> Trajectory:
    """
    Integrate an autonomous field with an embedded Runge-Kutta pair and dense output.

    Args:
        start: State4 (rectangular) or a state vector in the given coordinates
        field: Callable state -> derivative
        t_span: (t0, t1); t1 < t0 integrates backward
        tol: Relative (and default absolute) per-step error bound
        method: solve_ivp method name
        events: Level-set events; section events are also read as SectionPoints
        coordinates: "bipolar", "cartesian", "amplitude" or "local"
        atol: Absolute tolerance when it must differ from tol
        blowup: Bound on the radial norm
        eps: Section radius used to read section events

    Returns:
        Trajectory

    Raises:
        PreconditionError: tol outside [1e-13, 1e-3] or unknown coordinates
        IntegrationError: step-size underflow or blow-up
    """
    if not MIN_INTEGRATION_TOL <= tol <= MAX_INTEGRATION_TOL:
        raise PreconditionError(
            f"tol must lie in [{MIN_INTEGRATION_TOL}, {MAX_INTEGRATION_TOL}], got {tol}"
        )
    if coordinates not in COORDINATES:
        raise PreconditionError(f"unknown coordinates {coordinates!r}")
    if isinstance(start, State4):
        if coordinates != "cartesian":
            raise PreconditionError("a State4 start needs cartesian coordinates")
        y0 = start.as_array()
    else:
        y0 = np.asarray(start, dtype=float)

    def radial_norm(y):
        return math.hypot(*radial_pair(y, coordinates)) if coordinates != "amplitude" else float(np.linalg.norm(y))

    blowup_event = Event("blowup", lambda y: blowup - radial_norm(y), terminal=True)
    all_events = [blowup_event] + list(events)

    sol = solve_ivp(
        lambda t, y: field(y),
        t_span,
        y0,
        method=method,
        rtol=tol,
        atol=tol if atol is None else atol,
        dense_output=True,
        events=all_events,
    )
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}")
    if sol.t_events[0].size:
        raise IntegrationError(f"blow-up: state norm exceeded {blowup} at t={sol.t_events[0][0]:.6g}")

    records = []
    for k, event in enumerate(events, start=1):
        for t_event, y_event in zip(sol.t_events[k], sol.y_events[k]):
            point = None
            if event.section is not None:
                point = _section_point(y_event, event.section, eps, coordinates)
            records.append(EventRecord(event.name, float(t_event), np.asarray(y_event), point))
    forward = t_span[1] >= t_span[0]
    records.sort(key=lambda r: r.t if forward else -r.t)

    logger.debug(f"Integrated {len(sol.t)} steps with {method}, {len(records)} events")
    return Trajectory(sol.t, sol.y, sol.sol, records, method, tol, coordinates)


def choose_coordinates(start: Sequence[float], switch_radius: float = RECTANGULAR_SWITCH_RADIUS) -> str:
    """Rectangular coordinates when a radius of the bipolar start is below the switch radius"""
    return "cartesian" if min(start[0], start[1]) < switch_radius else "bipolar"


def _bipolar_to_cartesian(state: Sequence[float]) -> np.ndarray:
    r1, r2, p1, p2 = state
    return np.array([r1 * math.cos(p1), r1 * math.sin(p1), r2 * math.cos(p2), r2 * math.sin(p2)])


def integrate_hopf(start: Sequence[float], c: HHCoefficients, t_span: Tuple[float, float],
                   gamma: float = 0.0, H: Optional[Sequence[Optional[Perturbation]]] = None,
                   tol: float = DEFAULT_INTEGRATION_TOL, method: str = DEFAULT_METHOD,
                   sections: Sequence[SectionId] = (), eps: float = 1.0,
                   switch_radius: float = RECTANGULAR_SWITCH_RADIUS) -> Trajectory:
    """
    Integrate the truncated or Gaspard-perturbed system from a bipolar start.

    Bipolar coordinates are used unless a radius starts below switch_radius, in
    which case the state is converted to rectangular coordinates.
    """
    gaspard = GaspardField(c, gamma, H if H is not None else (None,) * 4)
    coordinates = choose_coordinates(start, switch_radius)
    events = [section_event(s, eps, coordinates) for s in sections]
    if coordinates == "cartesian":
        return integrate(_bipolar_to_cartesian(start), gaspard.cartesian, t_span, tol, method,
                         events, coordinates, eps=eps)
    return integrate(start, gaspard, t_span, tol, method, events, coordinates, eps=eps)


@dataclass
class Crossing:
    t: float
    state: np.ndarray
    point: Optional[SectionPoint] = None


def poincare_cross(traj: Trajectory, section: Union[SectionId, Callable[[np.ndarray], float]],
                   direction: float = 0.0, eps: float = 1.0) -> List[Crossing]:
    """
    Locate every crossing of a section or level set along a trajectory.

    Sign changes are scanned on the dense output and each one is refined with
    brentq to EVENT_TOL.

    Args:
        traj: Integrated trajectory
        section: SectionId or level function of the state
        direction: +1 keeps increasing crossings, -1 decreasing ones, 0 both
        eps: Section radius, for SectionId sections

    Returns:
        Crossings in integration order

    Raises:
        NoCrossing: the level function never changes sign in the requested direction
    """
    if isinstance(section, SectionId):
        level = section_level(section, eps, traj.coordinates)
        section_id = section
    else:
        level = section
        section_id = None

    pieces = [np.linspace(traj.t[k], traj.t[k + 1], SUBSTEPS + 1)[:-1] for k in range(len(traj.t) - 1)]
    times = np.concatenate(pieces + [traj.t[-1:]])
    states = traj.sol(times)
    values = np.array([level(states[:, j]) for j in range(times.size)])

    crossings = []
    for k in range(times.size - 1):
        g0, g1 = values[k], values[k + 1]
        rising = g0 < 0 <= g1
        falling = g0 > 0 >= g1
        if not ((rising and direction >= 0) or (falling and direction <= 0)):
            continue
        t_cross = optimize.brentq(lambda s: level(traj.sol(s)), times[k], times[k + 1], xtol=EVENT_TOL)
        state = traj.sol(t_cross)
        point = None
        if section_id is not None:
            point = _section_point(state, section_id, eps, traj.coordinates)
        crossings.append(Crossing(float(t_cross), state, point))

    if not crossings:
        raise NoCrossing(f"no crossing of {getattr(section, 'value', 'the level set')} on the integrated span")
    return crossings


@dataclass
class LocalComparison:
    """Closed-form local map against the integrated linear flow"""
    node: int
    tol: float
    method: str
    compared: int
    excluded: List[int]                 # sample indices on the stable manifold
    max_radial_deviation: float         # relative
    max_angle_deviation: float          # absolute, lifted angles
    max_time_deviation: float

    @property
    def passed(self) -> bool:
        return max(self.max_radial_deviation, self.max_angle_deviation) < LOCAL_DEVIATION_TOL

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["pass"] = self.passed
        return data


def local_samples(node: int, count: int, params: ModelParams, seed: int = 0) -> List[SectionPoint]:
    """Log-spaced gaps with random lifted angles on the in-section of a node"""
    section = local_node(node, params).section_in
    rng = make_rng(seed)
    gaps = log_grid(LOCAL_SAMPLE_GAP_MIN * params.eps, 0.5 * params.eps, count)
    angles = rng.uniform(0.0, TWO_PI, size=(count, 2))
    return [SectionPoint.from_gap(section, float(g), float(a[0]), float(a[1])) for g, a in zip(gaps, angles)]


def compare_local(node: int, samples: Union[int, Sequence[SectionPoint]], params: ModelParams,
                  tol: float = DEFAULT_INTEGRATION_TOL, method: str = DEFAULT_METHOD,
                  seed: int = 0, progress: bool = False) -> LocalComparison:
    """
    Integrate the local linear system of a node and compare with its closed-form map.

    Args:
        node: 0, 1 or 2
        samples: In-section points, or a count of generated samples
        params: Model parameters
        tol: Integrator tolerance

    Returns:
        LocalComparison; samples on the stable manifold are excluded and listed
    """
    spec = local_node(node, params)
    closed_form = (pi0, pi1, pi2)[node]
    if isinstance(samples, int):
        samples = local_samples(node, samples, params, seed)
    C, E = spec.contraction, spec.expansion
    w1, w2 = params.omega1, params.omega2
    eps = params.eps

    def linear(y):
        return np.array([-C * y[0], E * y[1], w1, w2])

    exit_event = Event("exit", lambda y: y[1] - eps, terminal=True, direction=1)

    excluded = []
    radial_dev = angle_dev = time_dev = 0.0
    compared = 0
    for index, p in enumerate(tqdm(samples, desc=f"node {node}", disable=not progress)):
        if p.on_manifold:
            excluded.append(index)
            continue
        out, flight = closed_form(p, params)
        if flight == 0.0:
            end, t_exit = np.array([eps, eps, p.phi1, p.phi2]), 0.0
        else:
            traj = integrate([eps, p.manifold_distance, p.phi1, p.phi2], linear, (0.0, 2.0 * flight + 1.0),
                             tol, method, [exit_event], coordinates="local", atol=1e-300)
            if not traj.events:
                raise NoCrossing(f"sample {index} never reached the out-section of node {node}")
            end, t_exit = traj.events[0].state, traj.events[0].t
        gap_out = out.manifold_distance
        radial_dev = max(radial_dev, abs(end[0] - gap_out) / gap_out)
        angle_dev = max(angle_dev, abs(end[2] - out.phi1), abs(end[3] - out.phi2))
        time_dev = max(time_dev, abs(t_exit - flight))
        compared += 1

    if excluded:
        logger.warning(f"{len(excluded)} samples on the stable manifold of node {node} were excluded")
    report = LocalComparison(node, tol, method, compared, excluded, radial_dev, angle_dev, time_dev)
    logger.info(
        f"Node {node}: radial deviation {radial_dev:.3g}, angle deviation {angle_dev:.3g} over {compared} samples"
    )
    return report


def compare_local_sweep(node: int, tols: Sequence[float], samples: int, params: ModelParams,
                        seed: int = 0) -> List[LocalComparison]:
    """compare_local at each tolerance, on the same samples"""
    points = local_samples(node, samples, params, seed)
    return [compare_local(node, points, params, tol) for tol in tols]


@dataclass
class HetShot:
    """Shooting result for the E2 -> E1 connection of the amplitude system"""
    mu1: float
    mu2_first_order: float
    mu2: float
    defect: float                       # signed gap between W^u(E2) and W^s(E1) on the transversal
    converged: bool
    iterations: int
    method: str
    message: str = ""

    def to_dict(self) -> Dict:
        data = asdict(self)
        for key in ("mu2", "defect"):
            if not math.isfinite(data[key]):
                data[key] = None
        return data


def _connection_defect(c: HHCoefficients, tol: float, offset: float, method: str) -> float:
    if not (-c.mu1 / c.p11 > 0 and -c.mu2 / c.p22 > 0):
        raise PreconditionError(f"E1 and E2 need -mu1/p11 > 0 and -mu2/p22 > 0 (mu1={c.mu1}, mu2={c.mu2})")
    r1s = math.sqrt(-c.mu1 / c.p11)
    r2s = math.sqrt(-c.mu2 / c.p22)
    t_max = 200.0 / min(abs(c.mu1), abs(c.mu2))
    atol = tol * offset * min(r1s, r2s)

    def transversal(y):
        return y[0] / r1s - y[1] / r2s

    def field(y):
        return amplitude_field(y, c)

    crossing = Event("transversal", transversal, terminal=True)
    unstable = integrate([offset * r1s, r2s], field, (0.0, t_max), tol, method, [crossing],
                         coordinates="amplitude", atol=atol)
    stable = integrate([r1s, offset * r2s], field, (0.0, -t_max), tol, method, [crossing],
                       coordinates="amplitude", atol=atol)
    if not unstable.events or not stable.events:
        raise NoCrossing(f"manifold did not reach the transversal at mu2={c.mu2}")
    return float(unstable.events[0].state[0] - stable.events[0].state[0])


def shoot_het(c: HHCoefficients, tol: float = DEFAULT_INTEGRATION_TOL,
              fraction: float = HET_BRACKET_FRACTION, offset: float = HET_START_OFFSET,
              method: str = DEFAULT_METHOD) -> HetShot:
    """
    Tune mu2 near the first-order Het curve until W^u(E2) meets W^s(E1).

    Both one-dimensional manifolds are integrated (forward and backward) to the
    transversal r1/r1* = r2/r2*; the r1-difference at the crossings is driven
    to zero by brentq over mu2 in a bracket of relative half-width fraction.

    Returns:
        HetShot; converged is False when the bracket holds no sign change
    """
    first = het_curve(c.mu1, c).mu2
    lo, hi = sorted((first * (1.0 - fraction), first * (1.0 + fraction)))

    def defect(mu2):
        return _connection_defect(c.with_mu(c.mu1, mu2), tol, offset, method)

    try:
        d_lo, d_hi = defect(lo), defect(hi)
    except NoCrossing as exc:
        logger.error(f"Het shooting failed: {exc}")
        return HetShot(c.mu1, first, math.nan, math.nan, False, 0, method, str(exc))
    if d_lo * d_hi > 0:
        message = f"no sign change of the connection defect on [{lo:.6g}, {hi:.6g}]"
        logger.error(message)
        return HetShot(c.mu1, first, math.nan, min(abs(d_lo), abs(d_hi)), False, 0, method, message)

    mu2, info = optimize.brentq(defect, lo, hi, xtol=1e-18, full_output=True)
    final = defect(mu2)
    logger.info(f"E2 -> E1 connection at mu2={mu2:.10g} (first order {first:.10g}), defect {final:.3g}")
    return HetShot(c.mu1, first, float(mu2), final, bool(info.converged), int(info.iterations), method)
