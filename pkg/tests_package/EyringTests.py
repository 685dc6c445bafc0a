import logging
import math
import unittest

import numpy as np

from overfitsim.Eyring import EscapeEstimate, Region, barrier_height_1d, basin_region_1d, empirical_escape_rate, \
    escapes_faster, eyring_rate_factor, free_energy, landscape_energy, predicted_rate_ratio, reflecting_envelope, \
    saddle_slab
from overfitsim.Landscape import GaussianMixtureLandscape, GaussianWell
from overfitsim.utils.AdvancedConfig import ESCAPE_LANDSCAPE
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError


def gaussian_energy(width):
    return lambda points: points[:, 0] ** 2 / (2 * width ** 2)


class EyringTestCase(unittest.TestCase):

    def test_constant_energy(self):
        region = Region((0.0, 0.0), (2.0, 3.0))
        value = free_energy(region, lambda points: np.zeros(len(points)), 2.0, nodes=51)
        self.assertAlmostEqual(-math.log(6.0) / 2.0, value.value, places=10)
        self.assertLess(value.refinement_change, 1e-10)

    def test_gaussian_well_free_energy(self):
        for width in (0.5, 1.0):
            region = Region((-10 * width,), (10 * width,))
            value = free_energy(region, gaussian_energy(width), 1.0)
            self.assertAlmostEqual(-math.log(width * math.sqrt(2 * math.pi)), value.value, delta=1e-4)

    def test_wider_well_has_lower_free_energy(self):
        narrow = free_energy(Region((-5.0,), (5.0,)), gaussian_energy(0.5), 1.0).value
        wide = free_energy(Region((-10.0,), (10.0,)), gaussian_energy(1.0), 1.0).value
        self.assertAlmostEqual(math.log(2.0), narrow - wide, delta=1e-4)

    def test_rate_factor(self):
        self.assertAlmostEqual(1.0, eyring_rate_factor(0.3, 0.3, 5.0))
        self.assertAlmostEqual(0.5, eyring_rate_factor(math.log(2.0), 0.0, 1.0))
        self.assertAlmostEqual(math.exp(-2.0), eyring_rate_factor(1.0, 0.0, 2.0))
        self.assertAlmostEqual(1.0, eyring_rate_factor(0.7, 0.2, 3.0) * eyring_rate_factor(0.2, 0.7, 3.0))

    def test_rate_factor_clamps_overflow(self):
        logger = logging.getLogger("EyringTestLogger")
        with self.assertLogs(logger, level="WARNING"):
            factor = eyring_rate_factor(-1000.0, 0.0, 1.0, logger)
        self.assertEqual(math.exp(700.0), factor)

    def test_rejects_bad_input(self):
        with self.assertRaises(ConfigError):
            free_energy(Region((0.0,), (1.0,)), gaussian_energy(1.0), 0.0)
        with self.assertRaises(ConfigError):
            Region((1.0,), (1.0,))
        with self.assertRaises(DimensionError):
            Region((0.0, 0.0), (1.0,))

    def test_symmetric_wells_escape_at_equal_rates(self):
        landscape = GaussianMixtureLandscape([GaussianWell([-3.0], 1.0, 1.0), GaussianWell([3.0], 1.0, 1.0)])
        energy = landscape_energy(landscape)
        box = Region((-6.0,), (6.0,))
        ratio = predicted_rate_ratio(energy, Region((-4.5,), (-1.5,)), Region((1.5,), (4.5,)),
                                     saddle_slab(box, 0, 0.0, 0.25), 4.0)
        self.assertAlmostEqual(1.0, ratio, places=8)
        position, height = barrier_height_1d(landscape, 0, 1)
        self.assertAlmostEqual(0.0, position, places=6)
        self.assertAlmostEqual(-2.0 * math.exp(-4.5), height, places=10)

    def test_hot_escape_is_uncensored(self):
        landscape = GaussianMixtureLandscape([GaussianWell([-4.0], 0.5, 1.0), GaussianWell([0.0], 0.5, 1.0),
                                              GaussianWell([4.0], 0.5, 1.0)])
        estimate = empirical_escape_rate(landscape, 1, 5.0, runs=50, max_steps=5000, dt=0.01, seed=1)
        self.assertFalse(estimate.censored)
        self.assertEqual(50, estimate.escaped_runs)
        self.assertGreater(estimate.rate, 0.0)
        self.assertIsNotNone(estimate.mfpt_se)

    def test_escape_is_reproducible(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        first = empirical_escape_rate(landscape, 1, 3.0, runs=10, max_steps=500, dt=0.01, seed=4, stream_id=2)
        second = empirical_escape_rate(landscape, 1, 3.0, runs=10, max_steps=500, dt=0.01, seed=4, stream_id=2)
        self.assertEqual(first.mfpt_mean, second.mfpt_mean)
        self.assertEqual({"seed": 4, "stream_id": 2}, first.rng)

    def test_escape_validation(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        with self.assertRaises(ConfigError):
            empirical_escape_rate(landscape, 2, 1.0, runs=10, max_steps=10, dt=0.01, seed=0)
        with self.assertRaises(ConfigError):
            empirical_escape_rate(landscape, 0, 0.0, runs=10, max_steps=10, dt=0.01, seed=0)

    def test_larger_energy_gives_larger_free_energy(self):
        region = Region((-3.0,), (3.0,))
        lower = free_energy(region, gaussian_energy(1.0), 2.0).value
        raised = free_energy(region, lambda points: points[:, 0] ** 2 / 2 + 0.1 + 0.05 * np.sin(points[:, 0]) ** 2,
                             2.0).value
        self.assertGreater(raised, lower)
        grown = free_energy(Region((-4.0,), (4.0,)), gaussian_energy(1.0), 2.0).value
        self.assertLessEqual(grown, lower)

    def test_narrow_well_is_predicted_to_empty_faster(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        energy = landscape_energy(landscape)
        position, _ = barrier_height_1d(landscape, 0, 1)
        ratio = predicted_rate_ratio(energy, basin_region_1d(landscape, 0, 3.0, position),
                                     basin_region_1d(landscape, 1, 3.0, position),
                                     saddle_slab(Region((-3.0,), (4.5,)), 0, position, 0.05), 1.0 / 0.1875)
        self.assertAlmostEqual(2.0, ratio, delta=0.5)

    def test_escape_regions(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        envelope = reflecting_envelope(landscape, 3.0)
        self.assertEqual((-3.0,), envelope.lower)
        self.assertEqual((4.5,), envelope.upper)
        position, height = barrier_height_1d(landscape, 0, 1)
        self.assertTrue(-0.4 < position < -0.3)
        self.assertTrue(-0.26 < height < -0.24)
        self.assertEqual(Region((-3.0,), (position,)), basin_region_1d(landscape, 0, 3.0, position))
        self.assertEqual(Region((position,), (4.5,)), basin_region_1d(landscape, 1, 3.0, position))

    def test_reflecting_domain_validation(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        with self.assertRaises(DimensionError):
            empirical_escape_rate(landscape, 0, 1.0, runs=10, max_steps=10, dt=0.01, seed=0,
                                  domain=Region((-3.0, -3.0), (3.0, 3.0)))
        with self.assertRaises(ConfigError):
            empirical_escape_rate(landscape, 1, 1.0, runs=10, max_steps=10, dt=0.01, seed=0,
                                  domain=Region((-3.0,), (1.0,)))

    def test_reflection_shortens_escape(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        wall = Region((-1.6,), (4.5,))
        free = empirical_escape_rate(landscape, 0, 0.5, runs=200, max_steps=20000, dt=0.01, seed=3)
        walled = empirical_escape_rate(landscape, 0, 0.5, runs=200, max_steps=20000, dt=0.01, seed=3, domain=wall)
        self.assertEqual(200, walled.escaped_runs)
        self.assertLess(walled.mfpt_mean, free.mfpt_mean)

    def test_directional_test(self):
        fast = EscapeEstimate(0, 0.2, 1.0, 0.05, 6, 6, False, {}, np.array([0.8, 1.0, 1.2, 0.9, 1.1, 1.0]))
        slow = EscapeEstimate(1, 0.2, 2.0, 0.05, 6, 6, False, {}, np.array([1.8, 2.0, 2.2, 1.9, 2.1, 2.0]))
        self.assertLess(escapes_faster(fast, slow), 0.001)
        self.assertGreater(escapes_faster(slow, fast), 0.999)
        with self.assertRaises(ConfigError):
            escapes_faster(fast, EscapeEstimate(1, 0.2, None, None, 6, 0, True, {}))

    def test_narrow_well_escapes_twice_as_fast(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        domain = reflecting_envelope(landscape, 3.0)
        narrow = empirical_escape_rate(landscape, 0, 0.1875, runs=500, max_steps=800000, dt=0.01, seed=7,
                                       stream_id=2, domain=domain)
        wide = empirical_escape_rate(landscape, 1, 0.1875, runs=500, max_steps=800000, dt=0.01, seed=7, stream_id=3,
                                     domain=domain)
        self.assertFalse(narrow.censored)
        self.assertFalse(wide.censored)
        self.assertAlmostEqual(2.0, narrow.rate / wide.rate, delta=0.5)
        self.assertLess(escapes_faster(narrow, wide), 0.05)

    def test_arrhenius_temperature_ratio(self):
        landscape = GaussianMixtureLandscape.from_config(ESCAPE_LANDSCAPE)
        domain = reflecting_envelope(landscape, 3.0)
        _, saddle_energy = barrier_height_1d(landscape, 0, 1)
        barrier = saddle_energy + landscape.eval(landscape.centers[0])
        self.assertAlmostEqual(0.75, barrier, delta=0.01)
        cold = empirical_escape_rate(landscape, 0, 0.15, runs=300, max_steps=800000, dt=0.01, seed=5, stream_id=0,
                                     domain=domain)
        warm = empirical_escape_rate(landscape, 0, 0.1875, runs=300, max_steps=800000, dt=0.01, seed=5, stream_id=1,
                                     domain=domain)
        expected = math.exp(-(1.0 / 0.15 - 1.0 / 0.1875) * barrier)
        self.assertAlmostEqual(1.0, (cold.rate / warm.rate) / expected, delta=0.3)


if __name__ == '__main__':
    unittest.main()
