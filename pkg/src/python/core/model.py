"""Model parameters, derived constants and hypothesis validation"""

import logging
import math
from dataclasses import dataclass, field, asdict, fields
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union, Mapping

import numpy as np

from .constants import (
    TWO_PI,
    DEFAULT_EPS,
    DEFAULT_EPS_IN,
    DEFAULT_EPS_OUT,
    DEFAULT_THETA1,
    DEFAULT_THETA2,
    DEFAULT_DIOPHANTINE_D1,
    DEFAULT_DIOPHANTINE_D2,
    DEFAULT_DIOPHANTINE_BOUND,
)
from .errors import InvalidParameters, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    """Eigenvalue data, unfolding parameter and section geometry of the network"""
    C0: float                           # contraction rate at the bifocus O
    E0: float                           # expansion rate at O
    C1: float                           # contracting Floquet exponent of C1
    E1: float                           # expanding Floquet exponent of C1
    C2: float                           # contracting Floquet exponent of C2
    E2: float                           # expanding Floquet exponent of C2
    omega1: float                       # angular frequency of the (x1, x2) plane
    omega2: float                       # angular frequency of the (x3, x4) plane
    gamma: float = 0.0                  # unfolding parameter
    eps: float = DEFAULT_EPS            # section radius
    eps_in: float = DEFAULT_EPS_IN      # angular half-width of C_i^in
    eps_out: float = DEFAULT_EPS_OUT    # angular half-width of C_i^out
    theta1_in: float = DEFAULT_THETA1
    theta1_out: float = DEFAULT_THETA1
    theta2_in: float = DEFAULT_THETA2
    theta2_out: float = DEFAULT_THETA2
    surf_amp: float = 1.0               # amplitude of the modeled W^u(C2) surface in Sigma1In

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidParameters(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameters(f"{f.name} must be finite, got {value!r}")

    def with_gamma(self, gamma: float) -> "ModelParams":
        """Copy of the parameters with a different unfolding parameter"""
        return self.replace(gamma=gamma)

    def replace(self, **changes) -> "ModelParams":
        data = asdict(self)
        data.update(changes)
        return ModelParams(**data)

    def theta_out(self, i: int) -> float:
        return self.theta1_out if i == 1 else self.theta2_out

    def theta_in(self, i: int) -> float:
        return self.theta1_in if i == 1 else self.theta2_in

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    def invariant_violations(self, include_rates: bool = True) -> List[str]:
        """List every violated parameter-range invariant (empty if none)"""
        problems = []
        for node, (c, e) in enumerate(self.rate_pairs()):
            if include_rates and not c > e > 0:
                problems.append(f"C{node} > E{node} > 0 violated (C{node}={c}, E{node}={e})")
        if self.omega1 <= 0 or self.omega2 <= 0:
            problems.append("omega1 and omega2 must be positive")
        if self.omega1 == self.omega2:
            problems.append("omega1 must differ from omega2")
        if self.eps <= 0:
            problems.append("eps must be positive")
        for name in ("eps_in", "eps_out"):
            value = getattr(self, name)
            if not 0 < value < 0.5:
                problems.append(f"{name} must lie in (0, 0.5), got {value}")
        if self.gamma < 0:
            problems.append("gamma must be nonnegative")
        if self.surf_amp <= 0:
            problems.append("surf_amp must be positive")
        for name in ("theta1_in", "theta1_out", "theta2_in", "theta2_out"):
            value = getattr(self, name)
            if not 0 <= value < TWO_PI:
                problems.append(f"{name} must lie in [0, 2pi), got {value}")
        for side in ("in", "out"):
            sep = _circle_distance(getattr(self, f"theta1_{side}"), getattr(self, f"theta2_{side}"))
            if sep <= 2 * max(self.eps_in, self.eps_out):
                problems.append(f"C1^{side} and C2^{side} overlap (separation {sep:.6g})")
        return problems

    def rate_pairs(self) -> Tuple[Tuple[float, float], ...]:
        return ((self.C0, self.E0), (self.C1, self.E1), (self.C2, self.E2))


@dataclass(frozen=True)
class DerivedConstants:
    """Saddle values and return-time constants of the network"""
    delta0: float                       # C0/E0
    delta1: float                       # C1/E1
    delta2: float                       # C2/E2
    delta: float                        # delta0*delta1*delta2
    xi: float                           # total flight-time coefficient per unit log-distance
    k_eps: float                        # eps**(1 - delta)

    @property
    def xi_over_delta(self) -> float:
        return self.xi / self.delta


def _circle_distance(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


@lru_cache(maxsize=256)
def derived_constants(p: ModelParams) -> DerivedConstants:
    """
    Compute the saddle values and the flight-time coefficient xi.

    Args:
        p: Model parameters

    Returns:
        DerivedConstants with delta_i = C_i/E_i, delta, xi and k(eps)
    """
    for node, (c, e) in enumerate(p.rate_pairs()):
        if not c > e > 0:
            raise InvalidParameters(f"C{node} > E{node} > 0 required (C{node}={c}, E{node}={e})")
    if p.eps <= 0:
        raise InvalidParameters("eps must be positive")

    delta0 = p.C0 / p.E0
    delta1 = p.C1 / p.E1
    delta2 = p.C2 / p.E2
    delta = delta0 * delta1 * delta2
    xi = (1.0 / p.E1) * (1.0 + p.C1 / p.E0 + p.C0 * p.C1 / (p.E0 * p.E2))
    k_eps = p.eps ** (1.0 - delta)
    return DerivedConstants(delta0, delta1, delta2, delta, xi, k_eps)


def xi_delta_identity_residual(p: ModelParams) -> float:
    """Relative residual of xi/delta = (1/C2)(1 + E2/C0 + E0*E2/(C0*C1))"""
    dc = derived_constants(p)
    rhs = (1.0 / p.C2) * (1.0 + p.E2 / p.C0 + p.E0 * p.E2 / (p.C0 * p.C1))
    return abs(dc.xi_over_delta - rhs) / abs(rhs)


@dataclass(frozen=True)
class DiophantineConfig:
    """Constants and scan bound for one Diophantine check"""
    d1: float = DEFAULT_DIOPHANTINE_D1
    d2: float = DEFAULT_DIOPHANTINE_D2
    bound: int = DEFAULT_DIOPHANTINE_BOUND


@dataclass(frozen=True)
class DiophantineVerdict:
    passed: bool
    witness: Tuple[int, int]            # pair (m, n) with the smallest margin
    margin: float                       # |mC - nE| - d1*(|m|+|n|)**(-d2) at the witness
    bound: int
    d1: float
    d2: float


def check_diophantine(C: float, E: float, d1: float, d2: float, bound: int) -> DiophantineVerdict:
    """
    Scan |mC - nE| > d1*(|m|+|n|)^(-d2) over 0 < |m|+|n| <= bound.

    Only one representative of each pair {(m, n), (-m, -n)} is scanned.

    Args:
        C, E: Rates being compared
        d1, d2: Diophantine constants (both positive)
        bound: Largest |m|+|n| scanned

    Returns:
        DiophantineVerdict with the pair minimizing the margin
    """
    if d1 <= 0 or d2 <= 0:
        raise PreconditionError("d1 and d2 must be positive")
    if int(bound) != bound or bound < 1:
        raise PreconditionError(f"bound must be an integer >= 1, got {bound}")
    bound = int(bound)

    m_values = np.arange(0, bound + 1)
    n_values = np.arange(-bound, bound + 1)
    m, n = np.meshgrid(m_values, n_values, indexing="ij")
    order = np.abs(m) + np.abs(n)
    keep = (order > 0) & (order <= bound) & ((m > 0) | (n > 0))
    m, n, order = m[keep], n[keep], order[keep]

    margin = np.abs(m * C - n * E) - d1 * order.astype(float) ** (-d2)
    worst = int(np.argmin(margin))
    return DiophantineVerdict(
        passed=bool(np.all(margin > 0)),
        witness=(int(m[worst]), int(n[worst])),
        margin=float(margin[worst]),
        bound=bound,
        d1=d1,
        d2=d2,
    )


@dataclass
class HypothesisVerdict:
    name: str
    passed: bool
    witness: Optional[str] = None
    note: str = ""


@dataclass
class ValidationReport:
    """Per-hypothesis verdicts and violated parameter invariants"""
    hypotheses: Dict[str, HypothesisVerdict] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.hypotheses.values()) and not self.violations

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "hypotheses": {k: asdict(v) for k, v in self.hypotheses.items()},
            "violations": list(self.violations),
        }


_STRUCTURAL = {
    "P4": "holds by construction: at gamma=0 the out-torus maps onto the in-torus (global_maps.psi21)",
    "P5": "holds by construction: the saddle chain O -> C1 -> C2 is built into the local maps (local_maps)",
    "P6": "holds by construction for gamma>0: transverse crossing along two circles (global_maps.TransverseUnfolding)",
}


def validate_hypotheses(
    p: ModelParams,
    dioph_config: Union[None, DiophantineConfig, Mapping[int, DiophantineConfig]] = None,
) -> ValidationReport:
    """
    Check the rate inequalities, parameter ranges and the Diophantine condition.

    Failures are reported, never raised.

    Args:
        p: Model parameters
        dioph_config: One DiophantineConfig for all nodes, or a mapping node -> config

    Returns:
        ValidationReport
    """
    if dioph_config is None:
        dioph_config = DiophantineConfig()
    if isinstance(dioph_config, DiophantineConfig):
        configs = {node: dioph_config for node in range(3)}
    else:
        configs = {node: dioph_config.get(node, DiophantineConfig()) for node in range(3)}

    report = ValidationReport()
    labels = {0: "P1", 1: "P2", 2: "P3"}
    for node, (c, e) in enumerate(p.rate_pairs()):
        ok = c > e > 0
        report.hypotheses[labels[node]] = HypothesisVerdict(
            name=labels[node],
            passed=ok,
            witness=None if ok else f"C{node}={c}, E{node}={e}",
            note=f"C{node} > E{node} > 0",
        )

    for name, note in _STRUCTURAL.items():
        report.hypotheses[name] = HypothesisVerdict(name=name, passed=True, note=note)

    p7_ok = True
    witnesses = []
    for node, (c, e) in enumerate(p.rate_pairs()):
        cfg = configs[node]
        try:
            verdict = check_diophantine(c, e, cfg.d1, cfg.d2, cfg.bound)
        except PreconditionError as exc:
            p7_ok = False
            witnesses.append(f"node {node}: {exc}")
            continue
        if not verdict.passed:
            p7_ok = False
            witnesses.append(f"node {node}: (m,n)={verdict.witness} margin={verdict.margin:.3g}")
    report.hypotheses["P7"] = HypothesisVerdict(
        name="P7",
        passed=p7_ok,
        witness="; ".join(witnesses) or None,
        note="scanned up to |m|+|n| <= " + ", ".join(str(configs[n].bound) for n in range(3)),
    )

    report.violations = p.invariant_violations(include_rates=False)
    if not report.passed:
        logger.debug(f"Hypothesis validation failed: {report.to_dict()}")
    return report
