"""Tests for spiral classification, the Upsilon estimates, scrolls and connections"""

import math
import unittest

import numpy as np

from ..core.errors import CoincidentManifolds, DomainUnstableManifold, PreconditionError
from ..core.model import ModelParams, derived_constants
from ..models.geometry import (
    MeridianProfile,
    SheetGrid,
    claim_limits,
    classify_spiral,
    connection_decay,
    constant_profile,
    dupsilon_dphi2,
    eta_monotone,
    find_connections,
    quadratic_profile,
    remainder,
    scroll_check,
    sheet_image,
    sheet_preimage,
    tilted_profile,
    upsilon,
)


def preset() -> ModelParams:
    return ModelParams(C0=math.sqrt(5), E0=1.0, C1=math.sqrt(3), E1=1.0, C2=math.sqrt(2), E2=1.0,
                       omega1=0.45, omega2=0.75, gamma=0.01, theta2_in=math.pi, theta2_out=math.pi)


class TestClassifySpiral(unittest.TestCase):
    """Test the sampled-curve spiral predicate"""

    def test_damped_spiral(self):
        theta = np.linspace(0.0, 40 * math.pi, 2000)
        h = np.exp(-theta / 4) * (1.0 + 0.5 * np.sin(theta))
        verdict = classify_spiral(np.column_stack([theta, h]))
        self.assertTrue(verdict.is_spiral)
        self.assertAlmostEqual(verdict.limit_h, 0.0, places=9)
        self.assertGreaterEqual(verdict.theta_range, 6 * math.pi)

    def test_reversed_direction(self):
        theta = np.linspace(0.0, -40 * math.pi, 2000)
        h = np.exp(theta / 4)
        self.assertTrue(classify_spiral(np.column_stack([theta, h])).is_spiral)

    def test_short_span(self):
        theta = np.linspace(0.0, 4 * math.pi, 200)
        verdict = classify_spiral(np.column_stack([theta, np.exp(-theta)]))
        self.assertFalse(verdict.is_spiral)
        self.assertIn("span", verdict.reason)

    def test_undamped_circle(self):
        theta = np.linspace(0.0, 40 * math.pi, 2000)
        verdict = classify_spiral(np.column_stack([theta, 1.0 + 0.5 * np.sin(theta)]))
        self.assertFalse(verdict.is_spiral)

    def test_constant_theta(self):
        verdict = classify_spiral(np.column_stack([np.zeros(150), np.linspace(1, 0, 150)]))
        self.assertFalse(verdict.is_spiral)

    def test_too_few_samples(self):
        with self.assertRaises(PreconditionError):
            classify_spiral(np.column_stack([np.arange(50.0), np.ones(50)]))


class TestProfiles(unittest.TestCase):
    """Test the meridian profiles"""

    def test_builtin_profiles_accepted(self):
        for profile in (constant_profile(0.3), quadratic_profile(), tilted_profile(2.0)):
            self.assertLessEqual(profile.circle_spread(), 1e-12)

    def test_profile_must_be_constant_on_circle(self):
        with self.assertRaises(PreconditionError):
            MeridianProfile(lambda u, v: u, lambda u, v: 1.0, lambda u, v: 0.0)

    def test_delta_hat_range(self):
        with self.assertRaises(PreconditionError):
            MeridianProfile(lambda u, v: 0.0, lambda u, v: 0.0, lambda u, v: 0.0, delta_hat=1.5)


class TestUpsilon(unittest.TestCase):
    """Test Upsilon and the remainder estimates"""

    def setUp(self):
        self.params = preset()
        self.dc = derived_constants(self.params)

    def test_constant_profile_is_pure_log(self):
        value = upsilon(None, 0.4, constant_profile(0.0), self.params, gap=1e-6)
        expected = self.dc.xi * 0.45 / self.dc.delta * math.log(1e6)
        self.assertAlmostEqual(value, expected, places=10)

    def test_r2_and_gap_agree(self):
        a = upsilon(0.75, 1.0, quadratic_profile(), self.params)
        b = upsilon(None, 1.0, quadratic_profile(), self.params, gap=0.25)
        self.assertEqual(a, b)

    def test_r2_on_torus(self):
        with self.assertRaises(DomainUnstableManifold):
            upsilon(1.0, 0.0, quadratic_profile(), self.params)

    def test_remainder_matches_finite_difference(self):
        for profile in (quadratic_profile(), tilted_profile()):
            for gap in (1e-2, 1e-5):
                r = remainder(None, 0.7, profile, self.params, gap=gap)
                self.assertTrue(r.verified, msg=f"{profile.name} at {gap}: {r.fd_residual}")
                self.assertAlmostEqual(r.R, r.R1 + r.R2, places=15)

    def test_quadratic_remainder_closed_form(self):
        # R2 vanishes for a rotation-invariant profile and R1 = -2 s (1 - s)/delta
        r = remainder(None, 2.0, quadratic_profile(), self.params, gap=1e-6)
        s = 1e-6 ** (1.0 / self.dc.delta)
        self.assertAlmostEqual(r.R2, 0.0, places=14)
        self.assertAlmostEqual(r.R1, -2.0 * s * (1.0 - s) / self.dc.delta, places=12)
        self.assertEqual(dupsilon_dphi2(None, 2.0, quadratic_profile(), self.params, gap=1e-6), 0.0)

    def test_claim_limits_decrease(self):
        limits = claim_limits(quadratic_profile(), self.params)
        self.assertTrue(limits.monotone)
        self.assertEqual(max(limits.phi2_derivative), 0.0)
        s = 1e-6 ** (1.0 / self.dc.delta)
        self.assertAlmostEqual(limits.log_derivative_error[-1], 2.0 * s * (1.0 - s) / self.dc.delta, places=9)

    def test_claim_limits_below_threshold_deep_enough(self):
        limits = claim_limits(quadratic_profile(), self.params, gaps=(1e-3, 1e-6, 1e-9, 1e-12, 1e-15))
        self.assertTrue(limits.passed)

    def test_eta_monotone(self):
        self.assertTrue(eta_monotone(quadratic_profile(), self.params))
        self.assertTrue(eta_monotone(tilted_profile(), self.params, n_phi=16))


class TestSheets(unittest.TestCase):
    """Test the spiralling sheets and the scrolls"""

    def setUp(self):
        self.params = preset()

    def test_image_spirals_onto_torus(self):
        sample = sheet_image(quadratic_profile(), SheetGrid.default(n_slices=4), self.params)
        self.assertTrue(sample.passed)
        self.assertEqual(len(sample.verdicts), 4)
        self.assertEqual(set(sample.frame["slice"]), {0, 1, 2, 3})

    def test_preimage_spirals_onto_torus(self):
        grid = SheetGrid.default(n_slices=4, gap_min=1e-300, n_gaps=800)
        sample = sheet_preimage(quadratic_profile(), grid, self.params)
        self.assertTrue(sample.passed)
        self.assertLess(sample.frame["r1in"].min(), 1.0)

    def test_scrolls(self):
        for i in (1, 2):
            verdict = scroll_check(i, self.params)
            self.assertTrue(verdict.interlaced)
            self.assertTrue(verdict.is_scroll)
            self.assertEqual(verdict.rays_checked, 8)


class TestConnections(unittest.TestCase):
    """Test the subsidiary connections C2 -> C1"""

    def setUp(self):
        self.params = preset()

    def test_coincident_at_gamma_zero(self):
        with self.assertRaises(CoincidentManifolds):
            find_connections(0.0, range(10, 12), self.params)

    def test_two_curves_per_shell(self):
        curves = find_connections(0.01, range(10, 16), self.params, n_rays=8, samples_per_shell=32)
        self.assertEqual(len(curves), 12)
        for n in range(10, 16):
            self.assertEqual(sorted(c.target for c in curves if c.n == n), [1, 2])
        dc = derived_constants(self.params)
        ratio, maxima = connection_decay(curves)
        self.assertEqual(len(maxima), 6)
        expected = math.exp(-2 * math.pi / (dc.xi * 0.75))
        self.assertLess(abs(ratio / expected - 1.0), 0.1)

    def test_shells_beyond_surface_skipped(self):
        with self.assertLogs(level="WARNING"):
            curves = find_connections(0.01, [2], self.params, n_rays=4, samples_per_shell=16)
        self.assertEqual(curves, [])

    def test_decay_needs_two_shells(self):
        curves = find_connections(0.01, [10], self.params, n_rays=4, samples_per_shell=16)
        with self.assertRaises(PreconditionError):
            connection_decay(curves)


if __name__ == '__main__':
    unittest.main()
