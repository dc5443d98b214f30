"""Tests for the half-return map, R_gamma and itineraries"""

import math
import unittest

import numpy as np

from ..core.errors import (
    DomainStableManifold,
    DomainUnstableManifold,
    ImageRange,
    PreconditionError,
    SectionMismatch,
)
from ..core.model import ModelParams, derived_constants
from ..core.sections import SectionId, SectionPoint
from ..models.return_map import (
    a_n,
    b_n,
    find_fixed_point,
    flight_time,
    g_closed,
    g_closed_array,
    g_composed,
    g_inverse,
    g_inverse_array,
    half_return_legs,
    inverse_return,
    iterate,
    iterate_backward,
    return_map,
    shell_log_bounds,
)
from ..utils.utilities import angle_offset, log_grid, make_rng


def preset() -> ModelParams:
    return ModelParams(C0=math.sqrt(5), E0=1.0, C1=math.sqrt(3), E1=1.0, C2=math.sqrt(2), E2=1.0,
                       omega1=0.45, omega2=0.75, gamma=0.01, theta2_in=math.pi, theta2_out=math.pi)


def start_for(gap_out: float, phi1_out: float, phi2_out: float, params: ModelParams) -> SectionPoint:
    """Sigma1In point whose G-image is the given Sigma2Out point"""
    return g_inverse(SectionPoint.from_gap(SectionId.SIGMA2_OUT, gap_out, phi1_out, phi2_out), params)


class TestHalfReturn(unittest.TestCase):
    """Test G in closed form against the explicit composition"""

    def setUp(self):
        self.params = preset()
        rng = make_rng(7)
        self.points = [
            SectionPoint.from_gap(SectionId.SIGMA1_IN, gap, *rng.uniform(0, 2 * math.pi, 2))
            for gap in log_grid(1e-12, 1.0, 25)
        ]

    def test_closed_matches_composed(self):
        for p in self.points:
            a = g_closed(p, self.params)
            b = g_composed(p, self.params)
            self.assertIs(a.section, SectionId.SIGMA2_OUT)
            self.assertLessEqual(abs(a.manifold_distance / b.manifold_distance - 1.0), 1e-10)
            self.assertLessEqual(abs(a.phi1 - b.phi1), 1e-10)
            self.assertLessEqual(abs(a.phi2 - b.phi2), 1e-10)

    def test_flight_time_is_sum_of_legs(self):
        for p in self.points[::5]:
            legs = half_return_legs(p, self.params)
            self.assertAlmostEqual(flight_time(p, self.params), sum(t for _, t in legs), places=9)

    def test_flight_time_formula(self):
        p = SectionPoint.from_gap(SectionId.SIGMA1_IN, math.exp(-2.0), 0.0, 0.0)
        self.assertAlmostEqual(flight_time(p, self.params), 2.0 * derived_constants(self.params).xi, places=12)

    def test_inverse_round_trip(self):
        for p in self.points:
            back = g_inverse(g_closed(p, self.params), self.params)
            self.assertLessEqual(abs(back.manifold_distance / p.manifold_distance - 1.0), 1e-9)
            self.assertAlmostEqual(back.phi1, p.phi1, places=9)
            self.assertAlmostEqual(back.phi2, p.phi2, places=9)

    def test_array_forms_agree(self):
        gaps = log_grid(1e-6, 1.0, 9)
        phi = np.linspace(0.0, 3.0, 9)
        out_gap, out1, out2 = g_closed_array(gaps, phi, phi, self.params)
        back_gap, back1, _ = g_inverse_array(out_gap, out1, out2, self.params)
        np.testing.assert_allclose(back_gap, gaps, rtol=1e-9)
        np.testing.assert_allclose(back1, phi, atol=1e-9)

    def test_domain_errors(self):
        with self.assertRaises(DomainStableManifold):
            g_closed(SectionPoint(SectionId.SIGMA1_IN, 1.0, 0.0, 0.0), self.params)
        with self.assertRaises(SectionMismatch):
            g_closed(SectionPoint.from_gap(SectionId.SIGMA2_OUT, 0.1, 0.0, 0.0), self.params)
        with self.assertRaises(DomainUnstableManifold):
            g_inverse(SectionPoint(SectionId.SIGMA2_OUT, 1.0, 0.0, 0.0), self.params)
        with self.assertRaises(ImageRange):
            g_inverse(SectionPoint.from_gap(SectionId.SIGMA2_OUT, 2.0, 0.0, 0.0), self.params)


class TestReturnMap(unittest.TestCase):
    """Test R_gamma, escapes and itineraries"""

    def setUp(self):
        self.params = preset()

    def test_out_point_does_not_depend_on_gamma(self):
        p = start_for(1e-3, 0.3, 0.02, self.params)
        outs = [return_map(p, g, self.params).out_point for g in (0.0, 0.01, 0.1)]
        for q in outs[1:]:
            self.assertEqual(q, outs[0])

    def test_return_in_first_window(self):
        p = start_for(1e-3, 0.3, 0.02, self.params)
        outcome = return_map(p, 0.01, self.params)
        self.assertFalse(outcome.escaped)
        self.assertEqual(outcome.symbol, 1)
        self.assertAlmostEqual(outcome.point.manifold_distance, 1e-3 + 0.01 * math.sin(0.02), places=12)

    def test_escape_between_windows(self):
        p = start_for(1e-3, 0.3, 0.5 * math.pi, self.params)
        outcome = return_map(p, 0.01, self.params)
        self.assertTrue(outcome.escaped)
        self.assertIsNone(outcome.point)
        self.assertIsNone(outcome.symbol)

    def test_escape_past_stable_torus(self):
        p = start_for(1e-5, 0.3, -0.05, self.params)
        outcome = return_map(p, 0.01, self.params)
        self.assertTrue(outcome.escaped)
        self.assertEqual(outcome.symbol, 1)
        self.assertIn("W^s_loc", outcome.reason)

    def test_iterate_stops_at_escape(self):
        p = start_for(1e-3, 0.3, 0.5 * math.pi, self.params)
        itinerary = iterate(p, 0.01, 5, self.params)
        self.assertEqual(len(itinerary), 0)
        self.assertTrue(itinerary.escaped)
        self.assertFalse(itinerary.complete)

    def test_iterate_domain_error(self):
        itinerary = iterate(SectionPoint(SectionId.SIGMA1_IN, 1.0, 0.0, 0.0), 0.01, 3, self.params)
        self.assertIsNotNone(itinerary.domain_error)

    def test_iterate_needs_positive_count(self):
        p = start_for(1e-3, 0.3, 0.02, self.params)
        with self.assertRaises(PreconditionError):
            iterate(p, 0.01, 0, self.params)
        with self.assertRaises(PreconditionError):
            iterate_backward(p, 0.01, 0, self.params)

    def test_backward_step_recovers_start(self):
        p = start_for(1e-3, 0.3, 0.02, self.params)
        image = return_map(p, 0.01, self.params).point
        back = iterate_backward(image, 0.01, 1, self.params)
        self.assertEqual(back.symbols, [1])
        self.assertTrue(back.backward)
        self.assertLessEqual(abs(back.points[0].manifold_distance / p.manifold_distance - 1.0), 1e-9)
        self.assertAlmostEqual(back.points[0].phi2, p.phi2, places=9)

    def test_inverse_return(self):
        p = start_for(1e-3, 0.3, 0.02, self.params)
        previous, symbol = inverse_return(return_map(p, 0.01, self.params).point, 0.01, self.params)
        self.assertEqual(symbol, 1)
        self.assertEqual(previous.section, SectionId.SIGMA1_IN)
        self.assertAlmostEqual(angle_offset(previous.phi1, p.phi1), 0.0, places=9)

    def test_frame_columns(self):
        p = find_fixed_point(1, 6, 0.01, self.params).point
        frame = iterate(p, 0.01, 2, self.params).to_frame()
        self.assertEqual(list(frame.columns), ["step", "symbol", "r1in", "phi1", "phi2", "flight_time"])
        self.assertEqual(list(frame["symbol"]), [1, 1])


class TestShellsAndFixedPoints(unittest.TestCase):
    """Test shell radii and the fixed points of R_gamma"""

    def setUp(self):
        self.params = preset()
        self.dc = derived_constants(self.params)

    def test_shell_radii(self):
        width = 2 * math.pi / (self.dc.xi * 0.75)
        self.assertAlmostEqual(b_n(6, self.params), math.exp(-6 * width), places=15)
        self.assertAlmostEqual(a_n(6, self.params) / b_n(6, self.params) ** self.dc.delta, 1.0, places=9)
        lo, hi = shell_log_bounds(6, self.params)
        self.assertAlmostEqual(hi - lo, width, places=12)

    def test_fixed_points_in_both_windows(self):
        for symbol in (1, 2):
            fp = find_fixed_point(symbol, 6, 0.01, self.params)
            self.assertEqual(fp.symbol, symbol)
            self.assertLessEqual(fp.residual, 1e-9)
            outcome = return_map(fp.point, 0.01, self.params)
            self.assertEqual(outcome.symbol, symbol)
            lo, hi = shell_log_bounds(6, self.params)
            L = -math.log(fp.point.manifold_distance)
            self.assertTrue(lo <= L < hi)

    def test_fixed_point_angles_close(self):
        fp = find_fixed_point(1, 6, 0.01, self.params)
        image = return_map(fp.point, 0.01, self.params).point
        self.assertLess(abs(angle_offset(image.phi1, fp.point.phi1)), 1e-9)

    def test_fixed_point_preconditions(self):
        with self.assertRaises(PreconditionError):
            find_fixed_point(1, 6, 0.0, self.params)
        with self.assertRaises(PreconditionError):
            find_fixed_point(3, 6, 0.01, self.params)


if __name__ == '__main__':
    unittest.main()
