import unittest

import numpy as np

from overfitsim.Landscape import GaussianMixtureLandscape, GaussianWell
from overfitsim.utils.AdvancedConfig import SGLD_LANDSCAPE
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError


def squared_width_landscape():
    """The two-well SGLD landscape with amplitudes equal to the squared widths."""
    return GaussianMixtureLandscape([GaussianWell([-5.5, -5.5], 3.0, 9.0), GaussianWell([3.0, 3.0], 1.5, 2.25)])


def finite_difference_gradient(landscape, x, step=1e-6):
    grad = np.zeros(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = step
        grad[i] = (landscape.eval(x + e) - landscape.eval(x - e)) / (2 * step)
    return grad


class LandscapeTestCase(unittest.TestCase):

    def test_peak_value(self):
        landscape = squared_width_landscape()
        self.assertAlmostEqual(9.0, landscape.eval([-5.5, -5.5]), places=10)
        self.assertAlmostEqual(2.25, landscape.eval([3.0, 3.0]), places=10)

    def test_gradient_matches_finite_differences(self):
        for landscape in (squared_width_landscape(), GaussianMixtureLandscape.from_config(SGLD_LANDSCAPE)):
            for point in ([0.0, 0.0], [1.0, 2.0], [-4.0, -5.0], [2.5, 3.5], [-1.0, 4.0]):
                x = np.array(point)
                np.testing.assert_allclose(landscape.grad(x), finite_difference_gradient(landscape, x),
                                           rtol=1e-5, atol=1e-10)

    def test_gradient_direction_at_origin(self):
        # amplitudes sigma^2 pull the origin toward the wide well, sigma^-2 toward the narrow one
        self.assertTrue(np.all(squared_width_landscape().grad([0.0, 0.0]) < 0))
        self.assertTrue(np.all(GaussianMixtureLandscape.from_config(SGLD_LANDSCAPE).grad([0.0, 0.0]) > 0))

    def test_batch_matches_single_points(self):
        landscape = squared_width_landscape()
        points = np.array([[0.0, 0.0], [1.0, -2.0], [3.0, 3.1]])
        np.testing.assert_allclose(landscape.eval_many(points), [landscape.eval(p) for p in points])
        np.testing.assert_allclose(landscape.grad_many(points), np.stack([landscape.grad(p) for p in points]))

    def test_well_membership(self):
        landscape = squared_width_landscape()
        self.assertEqual(0, landscape.well_membership([-5.5, -5.5]))
        self.assertEqual(1, landscape.well_membership([3.0, 4.4]))
        self.assertIsNone(landscape.well_membership([3.0, 4.6]))
        self.assertIsNone(landscape.well_membership([0.0, 0.0]))
        members = landscape.membership_many(np.array([[3.0, 4.6], [0.0, 0.0]]), radius_factor=2.0)
        self.assertEqual([1, -1], members.tolist())

    def test_widest_and_narrowest(self):
        landscape = squared_width_landscape()
        self.assertEqual(0, landscape.widest_well)
        self.assertEqual(1, landscape.narrowest_well)

    def test_separation_check(self):
        far = GaussianMixtureLandscape([GaussianWell([-10.0], 1.0, 1.0), GaussianWell([10.0], 2.0, 4.0)])
        self.assertTrue(far.check_separation())
        close = GaussianMixtureLandscape([GaussianWell([0.0], 1.0, 1.0), GaussianWell([2.0], 1.0, 1.0)])
        self.assertFalse(close.check_separation())

    def test_rejects_bad_wells(self):
        with self.assertRaises(ConfigError):
            GaussianWell([0.0, 0.0], 0.0, 1.0)
        with self.assertRaises(ConfigError):
            GaussianWell([0.0, 0.0], 1.0, -1.0)
        with self.assertRaises(DimensionError):
            GaussianMixtureLandscape([GaussianWell([0.0], 1.0, 1.0), GaussianWell([0.0, 1.0], 1.0, 1.0)])
        with self.assertRaises(ConfigError):
            GaussianMixtureLandscape([])
        with self.assertRaises(DimensionError):
            squared_width_landscape().eval([0.0, 0.0, 0.0])

    def test_config_round_trip(self):
        landscape = GaussianMixtureLandscape.from_config(SGLD_LANDSCAPE)
        self.assertEqual(SGLD_LANDSCAPE, landscape.to_config())
        with self.assertRaises(ConfigError):
            GaussianMixtureLandscape.from_config({"wells": [{"center": [0.0], "width": 1.0}]})


if __name__ == '__main__':
    unittest.main()
