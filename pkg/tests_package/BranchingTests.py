import logging
import unittest

import numpy as np

from overfitsim.Branching import Functionals, GanFamilyModel, KernelModel, ParticleKind, PopulationState, \
    RateParams, SuppressionConfig, branching_step, census, event_rates, narrow_peak_suppression_experiment, \
    population_functionals, suppression_run
from overfitsim.Landscape import GaussianMixtureLandscape
from overfitsim.SdeCore import RngStream
from overfitsim.utils.AdvancedConfig import PEAKS_LANDSCAPE
from overfitsim.utils.SimulationErrors import ConfigError, StabilityError

logger = logging.getLogger("BranchingTestLogger")


class BranchingTestCase(unittest.TestCase):

    def setUp(self) -> None:
        self.peaks = GaussianMixtureLandscape.from_config(PEAKS_LANDSCAPE)
        self.model = KernelModel(self.peaks, strength=0.2, kernel_range=0.3)

    def test_rate_validation(self):
        with self.assertRaises(ConfigError):
            RateParams(-0.5, 1.0, 1.0, 0.25)
        with self.assertRaises(ConfigError):
            RateParams(0.5, 1.0, 1.0, 0.25, population_cap=0)

    def test_event_rates(self):
        functionals = Functionals(V1=np.array([0.0]), V2=np.array([-2.0]), W=np.array([-3.0, 1.0]),
                                  disc_drift=np.zeros((1, 1)), gen_drift=np.zeros((2, 1)))
        disc, gen = event_rates(functionals, RateParams(0.5, 1.5, 2.0, 0.25))
        np.testing.assert_allclose([[1.5, 4.0]], disc)
        np.testing.assert_allclose([[0.75, 0.5], [0.0, 0.5]], gen)

    def test_zero_rates_keep_the_population(self):
        state = PopulationState([[-3.0], [-3.0], [3.0]], [[3.0]], record_events=True)
        rng = RngStream(0)
        for _ in range(50):
            branching_step(state, self.model, RateParams(0.0, 0.0, 0.0, 0.0), 0.1, 0.01, rng)
        self.assertEqual(3, state.n_disc)
        self.assertEqual(1, state.n_gen)
        self.assertEqual([], state.events)
        self.assertAlmostEqual(0.5, state.time)

    def test_large_step_is_rejected(self):
        state = PopulationState([[-3.0]], [[3.0]])
        with self.assertRaises(StabilityError):
            branching_step(state, self.model, RateParams(0.5, 200.0, 1.0, 0.25), 0.1, 0.01, RngStream(0))

    def test_population_cap(self):
        state = PopulationState([[-3.0]] * 5, np.zeros((0, 1)), record_events=True)
        rng = RngStream(1)
        rates = RateParams(0.0, 50.0, 0.0, 0.0, population_cap=5)
        for _ in range(20):
            branching_step(state, self.model, rates, 0.0, 0.01, rng, logger)
            self.assertLessEqual(state.size, 5)
        self.assertTrue(state.cap_reached)
        self.assertTrue(any(event.event == "refused" for event in state.events))

    def test_children_get_fresh_ids(self):
        state = PopulationState([[-3.0]] * 4, [[3.0]] * 2, record_events=True)
        rng = RngStream(2)
        rates = RateParams(0.0, 30.0, 0.0, 0.0)
        for _ in range(10):
            branching_step(state, self.model, rates, 0.0, 0.01, rng, logger)
        ids = [particle.id for particle in state.particles()]
        self.assertEqual(len(ids), len(set(ids)))
        births = [event for event in state.events if event.event == "replicate"]
        self.assertEqual(state.n_disc - 4, len(births))
        self.assertTrue(all(event.child_id >= 6 for event in births))

    def test_census(self):
        state = PopulationState([[-3.0], [-2.9], [3.0], [0.0]], [[3.0]])
        self.assertEqual((0.0, 4, 1, 2, 1), census(state, self.peaks))
        self.assertEqual((0.0, 0, 0, 0, 0), census(PopulationState.empty(1, 1), self.peaks))

    def test_empty_state_is_unchanged(self):
        state = PopulationState.empty(1, 1)
        branching_step(state, self.model, RateParams(0.5, 1.0, 1.0, 0.25), 0.1, 0.01, RngStream(0))
        self.assertEqual(0, state.size)

    def test_functionals(self):
        state = PopulationState([[-3.0], [3.0]], [[3.0]])
        functionals = population_functionals(state, self.model)
        self.assertAlmostEqual(np.log(1.0 + 1e-3), functionals.V1[0], places=6)
        self.assertAlmostEqual(-0.2, functionals.V2[1], places=12)
        self.assertAlmostEqual(0.0, functionals.V2[0], places=12)
        self.assertAlmostEqual(-0.2, functionals.W[0], places=12)

    def test_gan_family_pair_terms(self):
        model = GanFamilyModel(np.array([-0.5, 0.0, 0.5]))
        state = PopulationState([[0.0, 0.0, 0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]])
        functionals = population_functionals(state, model)
        self.assertAlmostEqual(-np.log(2.0), functionals.V1[0], places=12)
        self.assertAlmostEqual(-2 * np.log(2.0), functionals.V2[0], places=10)

    def test_runs_are_reproducible(self):
        config = SuppressionConfig(self.peaks, RateParams(0.5, 1.0, 1.0, 0.25), steps=50)
        first = suppression_run(config, True, seed=3, stream_id=1)
        second = suppression_run(config, True, seed=3, stream_id=1)
        self.assertEqual(first.census_rows, second.census_rows)
        self.assertEqual(51, len(first.census_rows))

    def test_suppression_config_validation(self):
        with self.assertRaises(ConfigError):
            SuppressionConfig(self.peaks, RateParams(0.5, 1.0, 1.0, 0.25), measure_from=1.0)
        with self.assertRaises(ConfigError):
            narrow_peak_suppression_experiment(SuppressionConfig(self.peaks, RateParams(0.5, 1.0, 1.0, 0.25)), 1, 0)

    def test_pure_birth_mean(self):
        rates = RateParams(0.0, 1.0, 0.0, 0.0)
        start = self.peaks.centers[0]
        p = 0.01 * (self.peaks.eval(start) + 1e-3)
        steps = 50
        counts = []
        for repeat in range(500):
            state = PopulationState([start], np.zeros((0, 1)), record_events=False)
            rng = RngStream(11, repeat)
            for _ in range(steps):
                branching_step(state, self.model, rates, 0.0, 0.01, rng)
            counts.append(state.n_disc)
        counts = np.array(counts, dtype=float)
        se = counts.std(ddof=1) / np.sqrt(len(counts))
        self.assertLess(abs(counts.mean() - (1 + p) ** steps), 3 * se)

    def test_pure_death_extinction(self):
        rates = RateParams(1.0, 0.0, 0.0, 0.0)
        steps, initial = 100, 3
        survival = (1 - 0.01) ** steps
        extinct, survivors = [], []
        for repeat in range(500):
            state = PopulationState(np.zeros((0, 1)), [[3.0]] * initial, record_events=False)
            rng = RngStream(12, repeat)
            for _ in range(steps):
                branching_step(state, self.model, rates, 0.1, 0.01, rng)
            extinct.append(state.n_gen == 0)
            survivors.append(state.n_gen)
        probability = (1 - survival) ** initial
        se = np.sqrt(probability * (1 - probability) / 500)
        self.assertLess(abs(np.mean(extinct) - probability), 3 * se)
        survivors = np.array(survivors, dtype=float)
        self.assertLess(abs(survivors.mean() - initial * survival), 3 * survivors.std(ddof=1) / np.sqrt(500))

    def test_children_copy_the_parent_position(self):
        state = PopulationState([[-3.0], [-2.8], [2.5]], np.zeros((0, 1)), record_events=True)
        rng = RngStream(13)
        copies = 0
        for _ in range(30):
            seen = len(state.events)
            branching_step(state, self.model, RateParams(0.0, 8.0, 0.0, 0.0), 0.1, 0.01, rng)
            index = {int(i): k for k, i in enumerate(state.disc_ids)}
            for event in state.events[seen:]:
                if event.event == "replicate":
                    parent = state.disc_positions[index[event.particle_id]]
                    child = state.disc_positions[index[event.child_id]]
                    self.assertTrue(np.array_equal(parent, child))
                    copies += 1
        self.assertGreater(copies, 0)

    def test_event_log_accounts_for_every_count_change(self):
        state = PopulationState([[-3.0]] * 6 + [[3.0]] * 6, [[-3.0]] * 3 + [[3.0]] * 3, record_events=True)
        rng = RngStream(14)
        for _ in range(200):
            branching_step(state, self.model, RateParams(0.5, 1.0, 1.0, 0.25), 0.1, 0.01, rng)
        for kind, initial, final in ((ParticleKind.DISCRIMINATOR, 12, state.n_disc),
                                     (ParticleKind.GENERATOR, 6, state.n_gen)):
            births = sum(1 for event in state.events if event.kind is kind and event.event == "replicate")
            deaths = sum(1 for event in state.events if event.kind is kind and event.event == "death")
            self.assertEqual(final - initial, births - deaths)
        self.assertGreater(len(state.events), 0)

    def test_generators_suppress_the_narrow_peak(self):
        config = SuppressionConfig(self.peaks, RateParams(0.5, 0.3, 1.0, 0.25))
        summary = narrow_peak_suppression_experiment(config, 20, 3, control=True, logger=logger)
        self.assertEqual(20, summary.paired_runs)
        self.assertLess(summary.treated_mean, summary.baseline_mean)
        self.assertTrue(summary.suppressed)
        self.assertLess(abs(summary.control_mean - 0.5), 4 * summary.control_se)


if __name__ == '__main__':
    unittest.main()
