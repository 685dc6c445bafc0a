import unittest

import numpy as np
from scipy import stats

from overfitsim.SdeCore import DensityGrid, DriftField, GridSpec, RngStream, euler_maruyama_step, \
    fokker_planck_evolve, gaussian_bump, gibbs_density
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError, QuadratureError, SimulationFault, \
    StabilityError


def double_well(points):
    return (points[:, 0] ** 2 - 1.0) ** 2


DOUBLE_WELL_GRID = GridSpec((-2.0,), (2.0,), (201,))


def bowl_1d(points):
    return 0.5 * points[:, 0] ** 2


class SdeTestCase(unittest.TestCase):

    def test_streams_are_reproducible(self):
        np.testing.assert_array_equal(RngStream(5, 2).normal(10), RngStream(5, 2).normal(10))
        self.assertFalse(np.array_equal(RngStream(5, 2).normal(10), RngStream(5, 3).normal(10)))
        self.assertFalse(np.array_equal(RngStream(5, 2).normal(10), RngStream(6, 2).normal(10)))
        self.assertEqual({"seed": 5, "stream_id": 3}, RngStream(5, 2).spawn(3).lineage)
        with self.assertRaises(ConfigError):
            RngStream(-1)

    def test_noiseless_step_is_euler(self):
        drift = DriftField(lambda x, t: np.array([1.0, -2.0]), 2)
        x = euler_maruyama_step(np.array([0.5, 0.5]), drift, 0.0, 0.1, RngStream(0))
        np.testing.assert_array_equal(np.array([0.5, 0.5]) + np.array([1.0, -2.0]) * 0.1, x)

    def test_increment_variance(self):
        drift = DriftField(lambda x, t: np.zeros_like(x), 1)
        increments = euler_maruyama_step(np.zeros((100000, 1)), drift, 0.5, 0.01, RngStream(3))
        variance = increments.var()
        standard_error = 0.01 * np.sqrt(2.0 / 100000)
        self.assertLess(abs(variance - 0.01), 3 * standard_error)

    def test_increments_are_gaussian(self):
        drift = DriftField(lambda x, t: np.zeros_like(x), 1)
        draws = 200000
        increments = euler_maruyama_step(np.zeros((draws, 1)), drift, 0.5, 0.01, RngStream(11))
        excess_kurtosis = stats.kurtosis(increments[:, 0], fisher=True)
        self.assertLess(abs(excess_kurtosis), 3 * np.sqrt(24.0 / draws))

    def test_step_rejects_bad_input(self):
        drift = DriftField(lambda x, t: np.full_like(x, np.nan), 1)
        with self.assertRaises(SimulationFault):
            euler_maruyama_step(np.zeros(1), drift, 0.1, 0.01, RngStream(0))
        with self.assertRaises(DimensionError):
            euler_maruyama_step(np.zeros(2), DriftField(lambda x, t: x, 1), 0.1, 0.01, RngStream(0))
        with self.assertRaises(ConfigError):
            euler_maruyama_step(np.zeros(1), DriftField(lambda x, t: x, 1), -0.1, 0.01, RngStream(0))

    def test_gibbs_density_is_normalized_and_symmetric(self):
        gibbs = gibbs_density(double_well, 2.0, DOUBLE_WELL_GRID)
        self.assertAlmostEqual(1.0, gibbs.mass(), places=12)
        self.assertAlmostEqual(0.0, float(gibbs.mean()[0]), places=10)

    def test_gibbs_variance(self):
        grid = GridSpec((-8.0,), (8.0,), (1601,))
        variance = float(gibbs_density(bowl_1d, 1.0, grid).variance()[0])
        self.assertLess(abs(variance - 1.0), 1e-3)
        colder = float(gibbs_density(bowl_1d, 2.0, grid).variance()[0])
        self.assertLess(abs(colder - variance / 2), 1e-3)

    def test_gibbs_underflow_is_rejected(self):
        with self.assertRaises(QuadratureError):
            gibbs_density(bowl_1d, np.inf, DOUBLE_WELL_GRID)

    def test_gibbs_state_is_stationary(self):
        gibbs = gibbs_density(double_well, 2.0, DOUBLE_WELL_GRID)
        evolved = fokker_planck_evolve(gibbs, double_well, 0.5, 1e-4, 10000)
        self.assertLess(evolved.l1_distance(gibbs), 1e-3)

    def test_mass_conservation(self):
        bump = gaussian_bump(DOUBLE_WELL_GRID, [-1.0], 0.1)
        masses = []
        fokker_planck_evolve(bump, double_well, 0.5, 1e-4, 1000, lambda step, density: masses.append(density.mass()))
        self.assertEqual(1000, len(masses))
        self.assertLess(max(abs(m - 1.0) for m in masses), 1e-8)

    def test_relaxation_toward_gibbs(self):
        gibbs = gibbs_density(double_well, 2.0, DOUBLE_WELL_GRID)
        bump = gaussian_bump(DOUBLE_WELL_GRID, [-1.0], 0.1)
        relaxed = fokker_planck_evolve(bump, double_well, 0.5, 1e-4, 2000)
        self.assertLess(relaxed.l1_distance(gibbs), bump.l1_distance(gibbs))

    def test_distance_to_gibbs_never_grows(self):
        gibbs = gibbs_density(double_well, 2.0, DOUBLE_WELL_GRID)
        bump = gaussian_bump(DOUBLE_WELL_GRID, [-1.0], 0.1)
        distances = [bump.l1_distance(gibbs)]
        fokker_planck_evolve(bump, double_well, 0.5, 1e-4, 2000,
                             lambda step, density: distances.append(density.l1_distance(gibbs)))
        self.assertTrue(all(later <= earlier + 1e-12 for earlier, later in zip(distances, distances[1:])))
        self.assertLess(distances[-1], distances[0])

    def test_flat_potential_spreads_like_heat(self):
        grid = GridSpec((-10.0,), (10.0,), (401,))
        temperature, dt, steps = 0.5, 1e-3, 1000

        def flat(points):
            return np.zeros(len(points))

        bump = gaussian_bump(grid, [0.0], 0.5)
        spread = fokker_planck_evolve(bump, flat, temperature, dt, steps)
        self.assertAlmostEqual(1.0, spread.mass(), places=8)
        slope = float(spread.variance()[0] - bump.variance()[0]) / (dt * steps)
        self.assertLess(abs(slope - 2 * temperature), 0.05 * 2 * temperature)

    def test_two_dimensional_grid(self):
        grid = GridSpec((-3.0, -3.0), (3.0, 3.0), (41, 41))

        def bowl(points):
            return 0.5 * np.sum(points ** 2, axis=1)

        gibbs = gibbs_density(bowl, 1.0, grid)
        self.assertAlmostEqual(1.0, gibbs.mass(), places=12)
        evolved = fokker_planck_evolve(gibbs, bowl, 1.0, 1e-3, 200)
        self.assertLess(evolved.l1_distance(gibbs), 1e-10)
        self.assertEqual(["x", "y", "density"], gibbs.header())

    def test_stability_bound(self):
        gibbs = gibbs_density(double_well, 2.0, DOUBLE_WELL_GRID)
        with self.assertRaises(StabilityError):
            fokker_planck_evolve(gibbs, double_well, 0.5, 1e-3, 1)
        with self.assertRaises(ConfigError):
            fokker_planck_evolve(gibbs, double_well, 0.0, 1e-4, 1)

    def test_grid_validation(self):
        with self.assertRaises(DimensionError):
            GridSpec((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (5, 5, 5))
        with self.assertRaises(ConfigError):
            GridSpec((1.0,), (0.0,), (5,))
        with self.assertRaises(ConfigError):
            GridSpec((0.0,), (1.0,), (2,))

    def test_density_rows(self):
        density = DensityGrid(GridSpec((0.0,), (1.0,), (3,)), np.array([0.5, 1.0, 1.5]))
        self.assertEqual([(0.0, 0.5), (0.5, 1.0), (1.0, 1.5)], [tuple(row) for row in density.to_rows()])
        self.assertAlmostEqual(1.0, density.mass())


if __name__ == '__main__':
    unittest.main()
