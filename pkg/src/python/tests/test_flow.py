"""Tests for the ODE backend and the Hopf-Hopf reference system"""

import math
import unittest

import numpy as np

from ..core.errors import IntegrationError, InvalidParameters, NoCrossing, PreconditionError
from ..core.model import ModelParams
from ..core.sections import SectionId, SectionPoint, State4
from ..models import flow
from ..models.flow import (
    GaspardField,
    HHCoefficients,
    amplitude_equilibria,
    check_perturbation,
    compare_local,
    compare_local_sweep,
    gaspard_field,
    het_curve,
    integrate,
    integrate_hopf,
    poincare_cross,
    radial_pair,
    shoot_het,
    truncated_field,
)


def preset() -> ModelParams:
    return ModelParams(C0=math.sqrt(5), E0=1.0, C1=math.sqrt(3), E1=1.0, C2=math.sqrt(2), E2=1.0,
                       omega1=0.45, omega2=0.75, gamma=0.01, theta2_in=math.pi, theta2_out=math.pi)


def decay(y):
    return -y


def odd_h1(r1, r2):
    return r1 * r2**6


def odd_h2(r1, r2):
    return r2 * r1**6


class TestCoefficients(unittest.TestCase):
    """Test the difficult-case conditions and the Het curve"""

    def test_reference_case(self):
        c = HHCoefficients()
        self.assertEqual(c.condition_violations(), [])
        self.assertAlmostEqual(c.sign_condition, -1.8, places=12)
        self.assertEqual(c.delta_c, -2.0)
        self.assertEqual(c.theta_c, -3.0)

    def test_wrong_sign_of_p12(self):
        problems = HHCoefficients(p12=-3.0).condition_violations()
        self.assertTrue(any("theta_c" in p for p in problems))

    def test_invalid_values(self):
        with self.assertRaises(InvalidParameters):
            HHCoefficients(mu1=math.nan)
        with self.assertRaises(InvalidParameters):
            HHCoefficients(p11=True)

    def test_het_curve(self):
        c = HHCoefficients()
        self.assertAlmostEqual(het_curve(-1e-3, c).mu2, 7.5e-4, places=15)
        self.assertAlmostEqual(het_curve(1e-3, c).mu2, -7.5e-4, places=15)
        self.assertEqual(het_curve(0.0, c).mu2, 0.0)
        self.assertEqual(het_curve(-1e-3, c).order, 1)

    def test_het_curve_undefined(self):
        with self.assertRaises(PreconditionError):
            het_curve(-1e-3, HHCoefficients(p12=-1.0, p22=-1.0))


class TestEquilibria(unittest.TestCase):
    """Test the amplitude equilibria"""

    def setUp(self):
        self.result = amplitude_equilibria(HHCoefficients())

    def test_axis_equilibria(self):
        e1 = self.result.by_kind("E1")[0]
        e2 = self.result.by_kind("E2")[0]
        self.assertAlmostEqual(e1.r1, math.sqrt(1e-3), places=12)
        self.assertAlmostEqual(e2.r2, math.sqrt(7.5e-4), places=12)
        self.assertEqual(e1.stability, "saddle")
        self.assertEqual(e2.stability, "saddle")

    def test_origin(self):
        origin = self.result.by_kind("O")[0]
        np.testing.assert_allclose(sorted(np.real(origin.eigenvalues)), [-1e-3, 7.5e-4], atol=1e-15)
        self.assertEqual(origin.stability, "saddle")

    def test_interior_point(self):
        interior = self.result.by_kind("interior")
        self.assertEqual(len(interior), 1)
        self.assertAlmostEqual(interior[0].r1**2, 2.5e-4, delta=1e-7)
        self.assertAlmostEqual(interior[0].r2**2, 2.5e-4, delta=1e-7)

    def test_residuals(self):
        for e in self.result.equilibria:
            self.assertLessEqual(e.residual, 1e-12)
        self.assertEqual(len(self.result.to_dict()["equilibria"]), len(self.result.equilibria))


class TestIntegrate(unittest.TestCase):
    """Test the integrator wrapper"""

    def test_exponential_decay(self):
        traj = integrate([1.0, 2.0], decay, (0.0, 1.0), coordinates="amplitude")
        np.testing.assert_allclose(traj.end, [math.exp(-1), 2 * math.exp(-1)], rtol=1e-8)
        self.assertTrue(traj.forward)

    def test_time_reversal(self):
        forward = integrate([1.0, 2.0], decay, (0.0, 1.0), coordinates="amplitude")
        back = integrate(forward.end, decay, (1.0, 0.0), coordinates="amplitude")
        np.testing.assert_allclose(back.end, [1.0, 2.0], rtol=1e-8)
        self.assertFalse(back.forward)

    def test_angles_rotate_linearly(self):
        traj = integrate_hopf([0.1, 0.1, 0.0, 0.0], HHCoefficients(), (0.0, 10.0))
        self.assertEqual(traj.coordinates, "bipolar")
        self.assertAlmostEqual(traj.end[2], 4.5, places=9)
        self.assertAlmostEqual(traj.end[3], 7.5, places=9)

    def test_axis_is_invariant(self):
        traj = integrate_hopf([0.0, 0.1, 0.0, 0.0], HHCoefficients(), (0.0, 50.0))
        self.assertEqual(traj.coordinates, "cartesian")
        self.assertEqual(float(np.max(np.abs(traj.y[:2]))), 0.0)

    def test_tolerance_range(self):
        with self.assertRaises(PreconditionError):
            integrate([1.0], decay, (0.0, 1.0), tol=1e-2, coordinates="amplitude")
        with self.assertRaises(PreconditionError):
            integrate([1.0], decay, (0.0, 1.0), tol=1e-14, coordinates="amplitude")

    def test_coordinate_checks(self):
        with self.assertRaises(PreconditionError):
            integrate([1.0], decay, (0.0, 1.0), coordinates="polar")
        with self.assertRaises(PreconditionError):
            integrate(State4(1.0, 0.0, 1.0, 0.0), decay, (0.0, 1.0), coordinates="bipolar")

    def test_blowup(self):
        with self.assertRaises(IntegrationError):
            integrate([1.0], lambda y: y, (0.0, 100.0), coordinates="amplitude")

    def test_frame(self):
        traj = integrate_hopf([0.1, 0.2, 0.0, 0.0], HHCoefficients(), (0.0, 1.0))
        frame = traj.to_frame()
        self.assertEqual(list(frame.columns), ["t", "x1", "x2", "x3", "x4"])
        self.assertAlmostEqual(frame["x1"].iloc[0], 0.1)

    def test_section_events(self):
        # r1 decays through 0.9, the level of Sigma2Out for eps = 0.9
        traj = integrate_hopf([0.95, 0.01, 0.0, 0.0], HHCoefficients(mu1=-1.0), (0.0, 5.0),
                              sections=[SectionId.SIGMA2_OUT], eps=0.9)
        self.assertEqual(len(traj.events), 1)
        point = traj.events[0].point
        self.assertIs(point.section, SectionId.SIGMA2_OUT)
        self.assertLess(point.radial, 0.01)


class TestPoincareCross(unittest.TestCase):
    """Test crossing detection on the dense output"""

    def test_radial_pair(self):
        self.assertEqual(radial_pair(np.array([3.0, 4.0, 0.0, 0.0]), "cartesian"), (5.0, 0.0))
        self.assertEqual(radial_pair(np.array([0.2, 0.3, 1.0, 2.0]), "bipolar"), (0.2, 0.3))

    def test_falling_crossing(self):
        traj = integrate([1.0, 1.0], decay, (0.0, 2.0), coordinates="amplitude")
        crossings = poincare_cross(traj, lambda y: y[0] - math.exp(-1.0), direction=-1)
        self.assertEqual(len(crossings), 1)
        self.assertAlmostEqual(crossings[0].t, 1.0, places=8)

    def test_wrong_direction(self):
        traj = integrate([1.0, 1.0], decay, (0.0, 2.0), coordinates="amplitude")
        with self.assertRaises(NoCrossing):
            poincare_cross(traj, lambda y: y[0] - math.exp(-1.0), direction=1)

    def test_repeated_crossings_in_order(self):
        traj = integrate([1.0, 1.0, 0.1, 0.0], lambda y: np.array([0.0, 0.0, 1.0, 0.0]),
                         (0.0, 4 * math.pi), coordinates="local")
        crossings = poincare_cross(traj, lambda y: math.sin(y[2]))
        self.assertEqual(len(crossings), 4)
        expected = [k * math.pi - 0.1 for k in range(1, 5)]
        np.testing.assert_allclose([c.t for c in crossings], expected, atol=1e-9)


class TestCompareLocal(unittest.TestCase):
    """Test closed-form local maps against the integrated linear flow"""

    def setUp(self):
        self.params = preset()

    def test_all_nodes_agree(self):
        for node in (0, 1, 2):
            report = compare_local(node, 20, self.params, tol=1e-11)
            self.assertEqual(report.compared, 20)
            self.assertTrue(report.passed, msg=str(report.to_dict()))

    def test_stable_manifold_samples_excluded(self):
        samples = [SectionPoint(SectionId.SIGMA0_IN, 0.0, 0.0, 0.0),
                   SectionPoint.from_gap(SectionId.SIGMA0_IN, 0.01, 0.5, 0.5)]
        with self.assertLogs(flow.logger, "WARNING"):
            report = compare_local(0, samples, self.params)
        self.assertEqual(report.excluded, [0])
        self.assertEqual(report.compared, 1)

    def test_tolerance_sweep(self):
        reports = compare_local_sweep(1, (1e-8, 1e-11), 8, self.params)
        self.assertEqual([r.tol for r in reports], [1e-8, 1e-11])
        self.assertTrue(all(r.compared == 8 for r in reports))
        self.assertTrue(reports[-1].passed, msg=str(reports[-1].to_dict()))


class TestHetShooting(unittest.TestCase):
    """Test the E2 -> E1 connection search"""

    def test_connection_near_first_order_curve(self):
        shot = shoot_het(HHCoefficients())
        self.assertTrue(shot.converged, msg=shot.message)
        self.assertLess(abs(shot.mu2 - shot.mu2_first_order), 1e-4)
        self.assertLess(abs(shot.defect), 1e-6)
        self.assertAlmostEqual(shot.mu2_first_order, 7.5e-4, places=15)


class TestGaspard(unittest.TestCase):
    """Test the gamma-scaled perturbation"""

    def test_valid_perturbation(self):
        self.assertEqual(check_perturbation((odd_h1, odd_h2, None, None)), [])

    def test_broken_symmetry_warns(self):
        with self.assertLogs(flow.logger, "WARNING"):
            field = GaspardField(HHCoefficients(), 0.1, (lambda r1, r2: r1**2, None, None, None))
        self.assertTrue(field.violations)

    def test_gamma_zero_is_truncated(self):
        state = np.array([0.2, 0.3, 1.0, 2.0])
        c = HHCoefficients()
        field = GaspardField(c, 0.0, (odd_h1, odd_h2, None, None))
        np.testing.assert_array_equal(field(state), truncated_field(state, c))

    def test_perturbed_field(self):
        state = np.array([0.5, 0.5, 0.0, 0.0])
        c = HHCoefficients()
        field = GaspardField(c, 0.1, (odd_h1, odd_h2, None, None))
        delta = field(state) - truncated_field(state, c)
        self.assertAlmostEqual(delta[0], 0.1 * 0.5**7, places=15)
        self.assertEqual(delta[2], 0.0)

    def test_single_evaluation(self):
        state = np.array([0.5, 0.5, 0.0, 0.0])
        c = HHCoefficients()
        H = (odd_h1, odd_h2, None, None)
        np.testing.assert_array_equal(gaspard_field(state, c, 0.1, H), GaspardField(c, 0.1, H)(state))

    def test_component_count(self):
        with self.assertRaises(PreconditionError):
            GaspardField(HHCoefficients(), 0.1, (odd_h1,))
        with self.assertRaises(PreconditionError):
            check_perturbation((odd_h1, odd_h2))


if __name__ == '__main__':
    unittest.main()
