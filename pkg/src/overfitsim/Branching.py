###############################################################################
# Branching diffusions of discriminator and generator particles: population
# value functionals, thinned replication/death events and the narrow-peak
# suppression experiment.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import enum
import math
from dataclasses import dataclass, field
from logging import Logger, getLogger
from typing import Optional, Protocol

import numpy as np
from scipy import stats

from overfitsim.GanDynamics import DiscriminatorParams, GeneratorParams, QUADRATURE_NODES, expected_log_rejection, \
    log_likelihood
from overfitsim.Landscape import GaussianMixtureLandscape, GaussianWell
from overfitsim.SdeCore import RngStream
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError, StabilityError

THINNING_WARNING = 0.1


class ParticleKind(enum.Enum):
    DISCRIMINATOR = 1
    GENERATOR = 2


@dataclass
class Particle:
    kind: ParticleKind
    position: np.ndarray
    id: int
    birth_time: float


@dataclass
class Event:
    time: float
    event: str
    kind: ParticleKind
    particle_id: int
    child_id: Optional[int] = None


@dataclass(frozen=True)
class RateParams:
    generator_death: float
    kappa_rep_disc: float
    kappa_death_disc: float
    kappa_rep_gen: float
    population_cap: int = 10000

    def __post_init__(self):
        for name in ("generator_death", "kappa_rep_disc", "kappa_death_disc", "kappa_rep_gen"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"Rate {name} must be finite and non-negative, got {value}",
                                  field=f"parameters.{name}")
        if self.population_cap < 1:
            raise ConfigError("Population cap must be at least 1", field="parameters.population_cap")


class PopulationState:
    """
    Array-backed populations. Discriminators and generators each keep positions, ids and birth times in parallel
    arrays; `particles()` gives the per-particle view.
    """

    def __init__(self, disc_positions, gen_positions, time: float = 0.0, record_events: bool = True):
        self.disc_positions = np.array(disc_positions, dtype=float, ndmin=2)
        self.gen_positions = np.array(gen_positions, dtype=float, ndmin=2)
        n_d, n_g = len(self.disc_positions), len(self.gen_positions)
        self.disc_ids = np.arange(n_d)
        self.gen_ids = np.arange(n_d, n_d + n_g)
        self.disc_births = np.full(n_d, float(time))
        self.gen_births = np.full(n_g, float(time))
        self.time = float(time)
        self.next_id = n_d + n_g
        self.record_events = record_events
        self.events: list[Event] = []
        self.cap_reached = False

    @classmethod
    def empty(cls, disc_dimension: int, gen_dimension: int, record_events: bool = True):
        return cls(np.zeros((0, disc_dimension)), np.zeros((0, gen_dimension)), record_events=record_events)

    @property
    def n_disc(self):
        return len(self.disc_positions)

    @property
    def n_gen(self):
        return len(self.gen_positions)

    @property
    def size(self):
        return self.n_disc + self.n_gen

    def particles(self) -> list[Particle]:
        discs = [Particle(ParticleKind.DISCRIMINATOR, p.copy(), int(i), float(b))
                 for p, i, b in zip(self.disc_positions, self.disc_ids, self.disc_births)]
        gens = [Particle(ParticleKind.GENERATOR, p.copy(), int(i), float(b))
                for p, i, b in zip(self.gen_positions, self.gen_ids, self.gen_births)]
        return discs + gens

    def log(self, event: Event):
        if self.record_events:
            self.events.append(event)


class InteractionModel(Protocol):
    disc_dimension: int
    gen_dimension: int

    def log_likelihood(self, xs: np.ndarray): ...

    def pair_terms(self, xs: np.ndarray, ys: np.ndarray): ...


class GanFamilyModel:
    """Discriminators and generators from the toy GAN family; pair terms are expected log-rejections."""
    disc_dimension = DiscriminatorParams.size
    gen_dimension = GeneratorParams.size

    def __init__(self, sample: np.ndarray, nodes: int = QUADRATURE_NODES):
        self.sample = np.asarray(sample, dtype=float)
        self.nodes = nodes

    def log_likelihood(self, xs):
        values = np.empty(len(xs))
        grads = np.empty((len(xs), self.disc_dimension))
        for a, x in enumerate(xs):
            values[a], grads[a] = log_likelihood(self.sample, DiscriminatorParams(x))
        return values, grads

    def pair_terms(self, xs, ys):
        terms = np.zeros((len(xs), len(ys)))
        d_dx = np.zeros((len(xs), len(ys), self.disc_dimension))
        d_dy = np.zeros((len(xs), len(ys), self.gen_dimension))
        for a, x in enumerate(xs):
            disc = DiscriminatorParams(x)
            for b, y in enumerate(ys):
                terms[a, b], d_dx[a, b], d_dy[a, b] = expected_log_rejection(disc, GeneratorParams(y), self.nodes)
        return terms, d_dx, d_dy


class KernelModel:
    """
    Discriminators and generators share one parameter space. The log-likelihood is log(L(x) + floor) for a mixture
    landscape L, the pair term is -strength exp(-|x - y|^2 / (2 r^2)).
    """

    def __init__(self, landscape: GaussianMixtureLandscape, strength: float, kernel_range: float,
                 floor: float = 1e-3):
        if not (strength >= 0 and kernel_range > 0 and floor > 0):
            raise ConfigError("Kernel model needs strength >= 0, kernel_range > 0 and floor > 0")
        self.landscape = landscape
        self.strength = float(strength)
        self.kernel_range = float(kernel_range)
        self.floor = float(floor)
        self.disc_dimension = self.gen_dimension = landscape.dimension

    def log_likelihood(self, xs):
        values = self.landscape.eval_many(xs) + self.floor
        return np.log(values), self.landscape.grad_many(xs) / values[:, None]

    def pair_terms(self, xs, ys):
        offsets = xs[:, None, :] - ys[None, :, :]
        kernel = np.exp(-np.sum(offsets ** 2, axis=-1) / (2 * self.kernel_range ** 2))
        terms = -self.strength * kernel
        d_dx = (self.strength * kernel / self.kernel_range ** 2)[..., None] * offsets
        return terms, d_dx, -d_dx


@dataclass
class Functionals:
    V1: np.ndarray
    V2: np.ndarray
    W: np.ndarray
    disc_drift: np.ndarray
    gen_drift: np.ndarray


def population_functionals(state: PopulationState, model: InteractionModel) -> Functionals:
    """
    Per-discriminator V1(x_a) and V2(x_a, ybar) = sum_b pair(x_a, y_b), per-generator W(xbar, y_b) = sum_a pair(x_a,
    y_b), with drifts +dV/dx for discriminators and -dW/dy for generators.
    """
    xs, ys = state.disc_positions, state.gen_positions
    if state.n_disc and xs.shape[1] != model.disc_dimension or state.n_gen and ys.shape[1] != model.gen_dimension:
        raise DimensionError("Particle positions do not match the interaction model")
    if state.n_disc:
        v1, grad_v1 = model.log_likelihood(xs)
    else:
        v1, grad_v1 = np.zeros(0), np.zeros((0, model.disc_dimension))
    if state.n_disc and state.n_gen:
        terms, d_dx, d_dy = model.pair_terms(xs, ys)
    else:
        terms = np.zeros((state.n_disc, state.n_gen))
        d_dx = np.zeros((state.n_disc, state.n_gen, model.disc_dimension))
        d_dy = np.zeros((state.n_disc, state.n_gen, model.gen_dimension))
    return Functionals(V1=v1, V2=terms.sum(axis=1), W=terms.sum(axis=0),
                       disc_drift=grad_v1 + d_dx.sum(axis=1), gen_drift=-d_dy.sum(axis=0))


def event_rates(functionals: Functionals, rates: RateParams):
    """Per-particle (replication, death) rates for discriminators and for generators."""
    disc = np.stack([rates.kappa_rep_disc * np.exp(functionals.V1),
                     rates.kappa_death_disc * np.maximum(-functionals.V2, 0.0)], axis=1)
    gen = np.stack([rates.kappa_rep_gen * np.maximum(-functionals.W, 0.0),
                    np.full(len(functionals.W), rates.generator_death)], axis=1)
    return disc.reshape(-1, 2), gen.reshape(-1, 2)


def branching_step(state: PopulationState, model: InteractionModel, rates: RateParams, temperature: float,
                   dt: float, rng: RngStream, logger: Logger = getLogger()) -> PopulationState:
    """
    Advances the populations by dt in place: every particle takes one Euler-Maruyama step along its drift, then each
    particle replicates with probability rate*dt and dies with probability rate*dt using rates from the start of the
    step. Death wins when both fire. Children copy their parent's position. Draw order: discriminator noise,
    generator noise, discriminator uniforms, generator uniforms.
    """
    if not dt > 0 or temperature < 0:
        raise ConfigError("branching_step needs dt > 0 and a non-negative temperature")
    if state.size == 0:
        return state
    functionals = population_functionals(state, model)
    disc_rates, gen_rates = event_rates(functionals, rates)
    max_probability = dt * max(disc_rates.max(initial=0.0), gen_rates.max(initial=0.0))
    if max_probability >= 1.0:
        raise StabilityError(f"Event probability rate*dt = {max_probability:.3g} reaches 1; reduce dt", field="dt")
    if max_probability >= THINNING_WARNING:
        logger.warning(f"Event probability rate*dt = {max_probability:.3g} at t={state.time:.4g}; thinning is coarse")

    scale = math.sqrt(2.0 * temperature * dt)
    disc_noise = rng.normal(state.disc_positions.shape)
    gen_noise = rng.normal(state.gen_positions.shape)
    disc_uniform = rng.uniform((state.n_disc, 2))
    gen_uniform = rng.uniform((state.n_gen, 2))
    state.disc_positions = state.disc_positions + functionals.disc_drift * dt + scale * disc_noise
    state.gen_positions = state.gen_positions + functionals.gen_drift * dt + scale * gen_noise
    state.time += dt

    disc_fire = disc_uniform < disc_rates * dt
    gen_fire = gen_uniform < gen_rates * dt
    disc_dies, gen_dies = disc_fire[:, 1], gen_fire[:, 1]
    disc_replicates = disc_fire[:, 0] & ~disc_dies
    gen_replicates = gen_fire[:, 0] & ~gen_dies

    for ids, kind in ((state.disc_ids[disc_dies], ParticleKind.DISCRIMINATOR),
                      (state.gen_ids[gen_dies], ParticleKind.GENERATOR)):
        for particle_id in ids.tolist():
            state.log(Event(state.time, "death", kind, particle_id))
    survivors = state.size - int(disc_dies.sum()) - int(gen_dies.sum())
    room = max(rates.population_cap - survivors, 0)

    new_disc, new_gen = [], []
    refused = 0
    for parents, ids, kind, children in ((np.flatnonzero(disc_replicates), state.disc_ids,
                                          ParticleKind.DISCRIMINATOR, new_disc),
                                         (np.flatnonzero(gen_replicates), state.gen_ids,
                                          ParticleKind.GENERATOR, new_gen)):
        for parent in parents.tolist():
            if room == 0:
                refused += 1
                state.log(Event(state.time, "refused", kind, int(ids[parent])))
                continue
            room -= 1
            children.append((parent, state.next_id))
            state.log(Event(state.time, "replicate", kind, int(ids[parent]), state.next_id))
            state.next_id += 1
    if refused:
        if not state.cap_reached:
            logger.warning(f"Population cap {rates.population_cap} reached at t={state.time:.4g}; "
                           f"replications are refused")
            state.cap_reached = True
        logger.debug(f"{refused} replications refused at t={state.time:.4g}")

    def apply(positions, ids, births, dies, children):
        parents = [parent for parent, _ in children]
        child_ids = np.array([child for _, child in children], dtype=int)
        positions = np.concatenate([positions[~dies], positions[parents].reshape(len(parents), positions.shape[1])])
        ids = np.concatenate([ids[~dies], child_ids])
        births = np.concatenate([births[~dies], np.full(len(parents), state.time)])
        return positions, ids, births

    state.disc_positions, state.disc_ids, state.disc_births = apply(state.disc_positions, state.disc_ids,
                                                                    state.disc_births, disc_dies, new_disc)
    state.gen_positions, state.gen_ids, state.gen_births = apply(state.gen_positions, state.gen_ids,
                                                                 state.gen_births, gen_dies, new_gen)
    return state


def census(state: PopulationState, peaks: GaussianMixtureLandscape, radius_factor: float = 2.0):
    """(t, n_disc, n_gen, mass at each peak), mass counting discriminators within radius_factor sigma of a peak."""
    if state.n_disc:
        members = peaks.membership_many(state.disc_positions, radius_factor)
        masses = [int(np.count_nonzero(members == j)) for j in range(len(peaks))]
    else:
        masses = [0] * len(peaks)
    return (state.time, state.n_disc, state.n_gen, *masses)


@dataclass
class SuppressionConfig:
    """Two-peak kernel-model experiment in the shared parameter space of the peaks landscape."""
    peaks: GaussianMixtureLandscape
    rates: RateParams
    strength: float = 0.2
    kernel_range: float = 0.3
    floor: float = 1e-3
    temperature: float = 0.1
    dt: float = 0.01
    steps: int = 1000
    initial_disc_per_peak: int = 10
    initial_gen_per_peak: int = 3
    measure_from: float = 0.5
    radius_factor: float = 2.0

    def __post_init__(self):
        if len(self.peaks) != 2:
            raise ConfigError("The suppression experiment needs exactly two peaks", field="landscape")
        if not 0 <= self.measure_from < 1:
            raise ConfigError("measure_from must lie in [0, 1)", field="parameters.measure_from")
        if self.steps < 1:
            raise ConfigError("steps must be at least 1", field="parameters.steps")

    def model(self) -> KernelModel:
        return KernelModel(self.peaks, self.strength, self.kernel_range, self.floor)

    def initial_state(self, with_generators: bool, record_events: bool = False) -> PopulationState:
        discs = np.repeat(self.peaks.centers, self.initial_disc_per_peak, axis=0)
        gen_count = self.initial_gen_per_peak if with_generators else 0
        gens = np.repeat(self.peaks.centers, gen_count, axis=0).reshape(-1, self.peaks.dimension)
        return PopulationState(discs, gens, record_events=record_events)


@dataclass
class SuppressionRun:
    narrow_fraction: Optional[float]
    census_rows: list = field(repr=False)
    events: list = field(default_factory=list, repr=False)


def suppression_run(config: SuppressionConfig, with_generators: bool, seed: int, stream_id: int,
                    record_events: bool = False, logger: Logger = getLogger()) -> SuppressionRun:
    """Time-averaged share of peak mass held by the narrow peak over the measurement window; None if extinct."""
    rng = RngStream(seed, stream_id)
    model = config.model()
    state = config.initial_state(with_generators, record_events)
    narrow = config.peaks.narrowest_well
    rows = [census(state, config.peaks, config.radius_factor)]
    start = int(config.steps * config.measure_from)
    window_mass = np.zeros(len(config.peaks))
    for step in range(1, config.steps + 1):
        branching_step(state, model, config.rates, config.temperature, config.dt, rng, logger)
        row = census(state, config.peaks, config.radius_factor)
        rows.append(row)
        if step > start:
            window_mass += np.array(row[3:], dtype=float)
    total = window_mass.sum()
    fraction = float(window_mass[narrow] / total) if total > 0 else None
    return SuppressionRun(fraction, rows, state.events)


@dataclass
class SuppressionSummary:
    runs: int
    paired_runs: int
    excluded_runs: int
    baseline_mean: Optional[float]
    baseline_se: Optional[float]
    treated_mean: Optional[float]
    treated_se: Optional[float]
    p_value: Optional[float]
    suppressed: bool
    control_mean: Optional[float] = None
    control_se: Optional[float] = None
    control_p_value: Optional[float] = None
    control_balanced: Optional[bool] = None


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return None, None
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else None
    return float(values.mean()), se


def symmetric_peaks(peaks: GaussianMixtureLandscape) -> GaussianMixtureLandscape:
    width = float(peaks.widths.max())
    return GaussianMixtureLandscape([GaussianWell(well.center, width, well.amplitude) for well in peaks.wells])


def narrow_peak_suppression_experiment(config: SuppressionConfig, runs: int, seed: int, control: bool = True,
                                       logger: Logger = getLogger()) -> SuppressionSummary:
    """
    Paired runs with and without generators sharing stream ids. A run pair is excluded when either member loses all
    peak mass. Suppression is a one-sided paired t-test at the 5% level; the optional control repeats the generator
    runs on equal-width peaks and tests the narrow share against 1/2.
    """
    if runs < 2:
        raise ConfigError("The suppression experiment needs at least two runs", field="parameters.runs")
    baseline, treated = [], []
    excluded = 0
    for run in range(runs):
        without = suppression_run(config, False, seed, run, logger=logger).narrow_fraction
        with_gen = suppression_run(config, True, seed, run, logger=logger).narrow_fraction
        if without is None or with_gen is None:
            excluded += 1
            continue
        baseline.append(without)
        treated.append(with_gen)
    if excluded:
        logger.warning(f"{excluded} of {runs} run pairs excluded after population extinction")
    baseline_mean, baseline_se = _mean_se(baseline)
    treated_mean, treated_se = _mean_se(treated)
    p_value = None
    if len(treated) > 1:
        p_value = float(stats.ttest_rel(treated, baseline, alternative="less").pvalue)
    summary = SuppressionSummary(runs, len(treated), excluded, baseline_mean, baseline_se, treated_mean, treated_se,
                                 p_value, bool(p_value is not None and p_value < 0.05))
    if control:
        control_config = SuppressionConfig(**{**vars(config), "peaks": symmetric_peaks(config.peaks)})
        shares = [r.narrow_fraction for r in (suppression_run(control_config, True, seed, runs + run, logger=logger)
                                              for run in range(runs))
                  if r.narrow_fraction is not None]
        summary.control_mean, summary.control_se = _mean_se(shares)
        if len(shares) > 1:
            summary.control_p_value = float(stats.ttest_1samp(shares, 0.5).pvalue)
            summary.control_balanced = summary.control_p_value >= 0.05
    return summary
