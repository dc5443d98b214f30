"""Tests for the closed-form local maps"""

import math
import unittest

from ..core.errors import DomainRange, DomainStableManifold, ImageRange, SectionMismatch
from ..core.model import ModelParams
from ..core.sections import SectionId, SectionPoint
from ..models.local_maps import local_node, pi0, pi1, pi2, pi_inverse


def preset() -> ModelParams:
    return ModelParams(C0=math.sqrt(5), E0=1.0, C1=math.sqrt(3), E1=1.0, C2=math.sqrt(2), E2=1.0,
                       omega1=0.45, omega2=0.75, gamma=0.01, theta2_in=math.pi, theta2_out=math.pi)


class TestLocalMaps(unittest.TestCase):
    """Test the transitions near O, C1 and C2"""

    def setUp(self):
        self.params = preset()

    def test_pi0_formula(self):
        p = SectionPoint.from_gap(SectionId.SIGMA0_IN, 1e-3, 0.2, 0.3)
        q, t = pi0(p, self.params)
        self.assertIs(q.section, SectionId.SIGMA0_OUT)
        self.assertAlmostEqual(t, math.log(1e3), places=12)
        self.assertAlmostEqual(q.manifold_distance / 1e-3 ** math.sqrt(5), 1.0, places=12)
        self.assertAlmostEqual(q.phi1, 0.2 + 0.45 * t, places=12)
        self.assertAlmostEqual(q.phi2, 0.3 + 0.75 * t, places=12)

    def test_pi1_near_torus(self):
        p = SectionPoint.from_gap(SectionId.SIGMA1_IN, 1e-12, 0.0, 0.0)
        q, t = pi1(p, self.params)
        self.assertIs(q.section, SectionId.SIGMA1_OUT)
        self.assertAlmostEqual(t, 12 * math.log(10), places=10)
        self.assertAlmostEqual(math.log(q.manifold_distance), -12 * math.log(10) * math.sqrt(3), places=9)

    def test_pi2_lands_on_sigma2_out(self):
        p = SectionPoint.from_gap(SectionId.SIGMA2_IN, 0.01, 1.0, 1.0)
        q, _ = pi2(p, self.params)
        self.assertIs(q.section, SectionId.SIGMA2_OUT)
        self.assertAlmostEqual(q.radial, 1.0 - 0.01 ** math.sqrt(2), places=12)

    def test_eps_boundary_is_identity_in_gap(self):
        p = SectionPoint.from_gap(SectionId.SIGMA0_IN, 1.0, 0.5, 0.5)
        q, t = pi0(p, self.params)
        self.assertEqual(t, 0.0)
        self.assertEqual(q.manifold_distance, 1.0)

    def test_inverse_round_trip(self):
        for node, section in ((0, SectionId.SIGMA0_IN), (1, SectionId.SIGMA1_IN), (2, SectionId.SIGMA2_IN)):
            p = SectionPoint.from_gap(section, 3e-5, 1.5, -2.0)
            q, _ = (pi0, pi1, pi2)[node](p, self.params)
            back = pi_inverse(node, q, self.params)
            self.assertIs(back.section, section)
            self.assertAlmostEqual(back.manifold_distance / 3e-5, 1.0, places=10)
            self.assertAlmostEqual(back.phi1, 1.5, places=10)
            self.assertAlmostEqual(back.phi2, -2.0, places=10)

    def test_stable_manifold_excluded(self):
        with self.assertRaises(DomainStableManifold):
            pi1(SectionPoint(SectionId.SIGMA1_IN, 1.0, 0.0, 0.0), self.params)

    def test_outside_chart(self):
        with self.assertRaises(DomainRange):
            pi0(SectionPoint.from_gap(SectionId.SIGMA0_IN, 1.5, 0.0, 0.0), self.params)

    def test_wrong_section(self):
        with self.assertRaises(SectionMismatch):
            pi0(SectionPoint.from_gap(SectionId.SIGMA1_IN, 0.1, 0.0, 0.0), self.params)
        with self.assertRaises(TypeError):
            pi2(SectionPoint.from_gap(SectionId.SIGMA0_IN, 0.1, 0.0, 0.0), self.params)

    def test_inverse_outside_image(self):
        with self.assertRaises(ImageRange):
            pi_inverse(0, SectionPoint(SectionId.SIGMA0_OUT, 0.0, 0.0, 0.0), self.params)
        with self.assertRaises(ImageRange):
            pi_inverse(0, SectionPoint(SectionId.SIGMA0_OUT, 2.0, 0.0, 0.0), self.params)

    def test_local_node(self):
        node = local_node(2, self.params)
        self.assertEqual(node.contraction, math.sqrt(2))
        self.assertIs(node.section_out, SectionId.SIGMA2_OUT)
        with self.assertRaises(ValueError):
            local_node(3, self.params)


if __name__ == '__main__':
    unittest.main()
