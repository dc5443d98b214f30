"""Tests for slabs, Conley-Moser checks and word realization"""

import itertools
import math
import unittest

from ..core.constants import BOUNDARY_TOL
from ..core.errors import CoincidentManifolds, NTooSmall, PreconditionError
from ..core.model import ModelParams, derived_constants
from ..models import horseshoe
from ..models.horseshoe import (
    boundary_check,
    heteroclinic_relation,
    in_slab_boundaries,
    lambda_cover,
    n_threshold,
    nu_regression,
    out_slab,
    realize_bi_word,
    realize_periodic,
    realize_word,
    verify_conley_moser,
    winding_check,
)
from ..models.return_map import b_n, iterate, return_map


def preset() -> ModelParams:
    return ModelParams(C0=math.sqrt(5), E0=1.0, C1=math.sqrt(3), E1=1.0, C2=math.sqrt(2), E2=1.0,
                       omega1=0.45, omega2=0.75, gamma=0.01, theta2_in=math.pi, theta2_out=math.pi)


class TestSlabs(unittest.TestCase):
    """Test slab construction and the face preimages"""

    def setUp(self):
        self.params = preset()

    def test_threshold(self):
        dc = derived_constants(self.params)
        expected = math.log(10.0) * dc.xi * 0.75 / (2 * math.pi * dc.delta)
        self.assertAlmostEqual(n_threshold(self.params), expected, places=12)

    def test_n_too_small(self):
        with self.assertRaises(NTooSmall):
            out_slab(0, 1, self.params)
        with self.assertRaises(PreconditionError):
            out_slab(6, 3, self.params)

    def test_top_face_radius(self):
        slab = in_slab_boundaries(6, 1, self.params)
        dc = derived_constants(self.params)
        p = slab.face_point("TI", slab.out.a_n, 0.3, 0.05)
        self.assertAlmostEqual(p.radial, 1.0 - math.exp(-2 * math.pi * 6 / (dc.xi * 0.75)), places=12)
        self.assertAlmostEqual(slab.r1_extent, b_n(6, self.params) - b_n(7, self.params), places=15)

    def test_boundary_check(self):
        for i in (1, 2):
            check = boundary_check(in_slab_boundaries(6, i, self.params), samples=16)
            self.assertTrue(check.passed, msg=str(check.errors))
            self.assertEqual(set(check.errors), {"EL", "ER", "TI", "TO"})

    def test_winding(self):
        report = winding_check(6, 1, self.params, samples=16)
        self.assertTrue(report.passed, msg=str(report.spans))
        self.assertAlmostEqual(report.spans["EL"][1], 2 * math.pi, places=9)
        self.assertAlmostEqual(report.spans["TI"][1], 0.2, places=12)

    def test_unknown_face(self):
        slab = in_slab_boundaries(6, 1, self.params)
        with self.assertRaises(ValueError):
            slab.sample_face("XX")


class TestConleyMoser(unittest.TestCase):
    """Test the per-shell Conley-Moser report"""

    def setUp(self):
        self.params = preset()

    def test_passes_at_shell_eleven(self):
        report = verify_conley_moser(11, 0.01, self.params, grid=8)
        self.assertTrue(report.passed, msg="; ".join(report.diagnostics))
        low = verify_conley_moser(6, 0.01, self.params, grid=8)
        for pair in report.pairs:
            self.assertLessEqual(pair.boundary_error, BOUNDARY_TOL + pair.rounding_floor)
            self.assertLess(pair.rounding_floor, 1e-6)
        self.assertGreater(max(p.rounding_floor for p in report.pairs),
                           max(p.rounding_floor for p in low.pairs))
        self.assertIn("rounding_floor", report.to_dict()["pairs"][0])

    def test_passes_from_shell_six(self):
        report = verify_conley_moser(6, 0.01, self.params, grid=8)
        self.assertTrue(report.passed, msg="; ".join(report.diagnostics))
        self.assertEqual(len(report.pairs), 4)
        self.assertLess(report.nu_h, 1.0)
        self.assertTrue(all(p.nu_v < 1.0 for p in report.pairs))
        self.assertTrue(report.to_dict()["pass"])

    def test_fails_below_window_threshold(self):
        report = verify_conley_moser(5, 0.01, self.params, grid=8)
        self.assertFalse(report.passed)
        self.assertTrue(any("outside the window" in d for d in report.diagnostics))

    def test_gamma_zero_reports_coincidence(self):
        report = verify_conley_moser(6, 0.0, self.params, grid=8)
        self.assertFalse(report.passed)
        self.assertTrue(any("coincident manifolds" in d for d in report.diagnostics))

    def test_gamma_beyond_window(self):
        report = verify_conley_moser(6, 0.2, self.params, grid=8)
        self.assertFalse(report.passed)
        self.assertTrue(any("leaves window" in d for d in report.diagnostics))

    def test_shell_threshold_raises(self):
        with self.assertRaises(NTooSmall):
            verify_conley_moser(0, 0.01, self.params)

    def test_nu_regression_slope(self):
        reports = [verify_conley_moser(n, 0.01, self.params, grid=8) for n in range(6, 12)]
        regression = nu_regression(reports, self.params)
        self.assertEqual(regression.n_values, list(range(6, 12)))
        self.assertTrue(regression.within, msg=f"slope {regression.slope} vs {regression.expected}")

    def test_nu_regression_needs_two(self):
        report = verify_conley_moser(6, 0.01, self.params, grid=8)
        with self.assertRaises(PreconditionError):
            nu_regression([report], self.params)


class TestWords(unittest.TestCase):
    """Test realization of finite, two-sided and periodic words"""

    def setUp(self):
        self.params = preset()

    def test_all_short_words(self):
        for word in itertools.product((1, 2), repeat=3):
            realized = realize_word(word, 6, 0.01, self.params)
            self.assertTrue(realized.verified, msg=f"word {word}")
            self.assertEqual(realized.itinerary.symbols, list(word))
            slab = in_slab_boundaries(6, word[0], self.params)
            self.assertTrue(slab.contains(realized.point))

    def test_forward_orbit_follows_word(self):
        realized = realize_word((2, 1, 1, 2), 6, 0.01, self.params)
        p = realized.point
        for symbol in (2, 1, 1, 2):
            outcome = return_map(p, 0.01, self.params)
            self.assertEqual(outcome.symbol, symbol)
            p = outcome.point

    def test_long_word(self):
        word = (1, 2, 2, 1, 1, 2, 1, 2, 2, 2)
        with self.assertLogs(horseshoe.logger, "WARNING"):
            realized = realize_word(word, 6, 0.01, self.params)
        self.assertTrue(realized.chain_verified)
        self.assertEqual(realized.backward_symbols, list(word))
        self.assertLess(realized.box_diameter, 1e-9)
        self.assertGreater(realized.box_diameter, 0.0)
        # a single floating-point orbit cannot follow all ten returns
        self.assertFalse(realized.verified)
        self.assertTrue(realized.itinerary.escaped)
        self.assertGreaterEqual(realized.orbit_depth, 6)
        self.assertLess(realized.orbit_depth, len(word))
        self.assertEqual(realized.itinerary.symbols[:realized.orbit_depth], list(word[:realized.orbit_depth]))

    def test_itinerary_is_the_orbit_of_the_point(self):
        word = (2, 1, 2, 2, 1)
        realized = realize_word(word, 6, 0.01, self.params)
        orbit = iterate(realized.point, 0.01, len(word), self.params)
        self.assertEqual(realized.itinerary.symbols, orbit.symbols)
        self.assertEqual(realized.orbit_depth, len(word))
        self.assertTrue(realized.verified)

    def test_bi_word(self):
        realized = realize_bi_word((2, 1), (1, 2), 6, 0.01, self.params)
        self.assertTrue(realized.verified)
        self.assertEqual(realized.itinerary.symbols, [1, 2])
        self.assertEqual(realized.backward.symbols, [1, 2])
        self.assertEqual(list(realized.to_frame()["index"]), [-2, -1, 0, 1])

    def test_periodic_fixed_point(self):
        orbit = realize_periodic((1,), 6, 0.01, self.params)
        self.assertLessEqual(orbit.map_residual, 1e-9)
        self.assertLessEqual(orbit.closing_residual, 1e-9)
        dc = derived_constants(self.params)
        L = -math.log(orbit.point.manifold_distance)
        turns = L * dc.xi * (0.45 + 0.75) / (2 * math.pi)
        self.assertAlmostEqual(turns, round(turns), places=6)

    def test_periodic_two_cycle(self):
        orbit = realize_periodic((1, 2), 7, 0.01, self.params)
        self.assertEqual(len(orbit.points), 2)
        self.assertLessEqual(orbit.map_residual, 1e-9)

    def test_word_errors(self):
        with self.assertRaises(CoincidentManifolds):
            realize_word((1, 2), 6, 0.0, self.params)
        with self.assertRaises(PreconditionError):
            realize_word((1, 3), 6, 0.01, self.params)
        with self.assertRaises(PreconditionError):
            realize_word((), 6, 0.01, self.params)
        with self.assertRaises(PreconditionError):
            realize_bi_word((1,), (), 6, 0.01, self.params)
        with self.assertRaises(NTooSmall):
            realize_word((1,), 0, 0.01, self.params)


class TestLambdaCover(unittest.TestCase):
    """Test the box covers of Lambda_N"""

    def setUp(self):
        self.params = preset()

    def test_depth_one_cover(self):
        cover = lambda_cover(6, 0.01, 1, self.params, grid=8)
        self.assertFalse(cover.exhausted, msg=cover.message)
        self.assertEqual(len(cover.levels), 2)
        self.assertEqual(cover.levels[0].count, 2)
        self.assertGreaterEqual(cover.levels[1].count, 8)
        self.assertTrue(cover.decreasing)
        realized = realize_word((1, 1), 6, 0.01, self.params)
        self.assertTrue(cover.contains(realized.point, self.params, depth=1))
        self.assertTrue(cover.contains(realized.point, self.params, depth=0))
        frame = cover.to_frame()
        self.assertEqual(set(frame["depth"]), {0, 1})

    def test_cover_preconditions(self):
        with self.assertRaises(CoincidentManifolds):
            lambda_cover(6, 0.0, 1, self.params)
        with self.assertRaises(PreconditionError):
            lambda_cover(6, 0.01, -1, self.params)


class TestHeteroclinicRelation(unittest.TestCase):
    """Test the experimental shell-to-shell search"""

    def test_marked_experimental(self):
        relation = heteroclinic_relation(6, 7, 0.01, preset(), length=2)
        self.assertTrue(relation.experimental)
        if not relation.related:
            self.assertTrue(relation.messages)


if __name__ == '__main__':
    unittest.main()
