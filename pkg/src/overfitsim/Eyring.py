###############################################################################
# Free energies of regions, Eyring rate factors and Monte-Carlo mean first
# passage times for well-to-well escapes.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import math
from dataclasses import dataclass, field
from logging import Logger, getLogger
from typing import Callable, Optional

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from overfitsim.Landscape import GaussianMixtureLandscape
from overfitsim.SdeCore import GridSpec, RngStream, grid_points
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError, QuadratureError

MAX_EXPONENT = 700.0
CENSORING_LIMIT = 0.9


@dataclass(frozen=True)
class Region:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper):
            raise DimensionError("Region bounds have different dimensions")
        if any(not hi > lo for lo, hi in zip(lower, upper)):
            raise ConfigError(f"Region has non-positive measure: {lower} to {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self):
        return len(self.lower)


@dataclass
class FreeEnergyValue:
    value: float
    beta: float
    nodes: int
    refinement_change: float


def _log_partition(region: Region, energy: Callable[[np.ndarray], np.ndarray], beta: float, nodes: int) -> float:
    grid = GridSpec(region.lower, region.upper, (nodes,) * region.dimension)
    e = np.asarray(energy(grid_points(grid)), dtype=float).reshape(grid.nodes)
    if not np.all(np.isfinite(e)):
        raise QuadratureError("Energy is not finite inside the region")
    e_min = e.min()
    integrand = np.exp(-beta * (e - e_min))
    for axis in reversed(grid.axes):
        integrand = trapezoid(integrand, axis, axis=-1)
    integral = float(integrand)
    if not (np.isfinite(integral) and integral > 0):
        raise QuadratureError(f"Boltzmann integral underflowed at beta={beta}; rescale beta or the energy")
    return math.log(integral) - beta * e_min


def free_energy(region: Region, energy: Callable[[np.ndarray], np.ndarray], beta: float, nodes: int = 401) \
        -> FreeEnergyValue:
    """
    F(U) = -1/beta log of the integral of exp(-beta E) over U, by tensor trapezoid quadrature. The result carries the
    change seen when the node spacing is halved as a convergence diagnostic.
    """
    if not beta > 0:
        raise ConfigError(f"Inverse temperature must be positive, got {beta}", field="beta")
    coarse = -_log_partition(region, energy, beta, nodes) / beta
    fine = -_log_partition(region, energy, beta, 2 * nodes - 1) / beta
    return FreeEnergyValue(fine, beta, 2 * nodes - 1, abs(fine - coarse))


def eyring_rate_factor(saddle_free_energy: float, well_free_energy: float, beta: float,
                       logger: Logger = getLogger()) -> float:
    exponent = -beta * (saddle_free_energy - well_free_energy)
    if exponent > MAX_EXPONENT:
        logger.warning(f"Rate factor exponent {exponent:.4g} overflows; clamped to exp({MAX_EXPONENT:g})")
        exponent = MAX_EXPONENT
    return math.exp(exponent)


def saddle_slab(region: Region, axis: int, position: float, half_width: float) -> Region:
    """The part of `region` within half_width of the plane x[axis] = position."""
    if not half_width > 0:
        raise ConfigError("Slab half width must be positive")
    lower = list(region.lower)
    upper = list(region.upper)
    lower[axis] = position - half_width
    upper[axis] = position + half_width
    return Region(tuple(lower), tuple(upper))


def landscape_energy(landscape: GaussianMixtureLandscape):
    return lambda points: -landscape.eval_many(points)


def predicted_rate_ratio(energy, first_well: Region, second_well: Region, saddle: Region, beta: float,
                         nodes: int = 401) -> float:
    """Eyring prediction of rate(first -> other) / rate(second -> other) across a shared saddle."""
    f_saddle = free_energy(saddle, energy, beta, nodes).value
    rate_first = eyring_rate_factor(f_saddle, free_energy(first_well, energy, beta, nodes).value, beta)
    rate_second = eyring_rate_factor(f_saddle, free_energy(second_well, energy, beta, nodes).value, beta)
    return rate_first / rate_second


@dataclass
class EscapeEstimate:
    well: int
    temperature: float
    mfpt_mean: Optional[float]
    mfpt_se: Optional[float]
    runs: int
    escaped_runs: int
    censored: bool
    rng: dict
    passage_times: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    @property
    def rate(self) -> Optional[float]:
        return 1.0 / self.mfpt_mean if self.mfpt_mean else None


def empirical_escape_rate(landscape: GaussianMixtureLandscape, well: int, temperature: float, runs: int,
                          max_steps: int, dt: float, seed: int, stream_id: int = 0, domain: Optional[Region] = None,
                          logger: Logger = getLogger()) -> EscapeEstimate:
    """
    Mean first-passage time of dx = grad L dt + sqrt(2 theta) dW from the center of `well` to the sigma-vicinity of
    any other well. All runs share one stream and draw (runs, d) blocks per step. The estimate is flagged as censored
    when fewer than 90% of runs arrive within max_steps; the mean then covers arrived runs only.

    With a `domain`, walkers are reflected at its faces.
    """
    if not 0 <= well < len(landscape):
        raise ConfigError(f"Well index {well} is out of range", field="parameters.well")
    if len(landscape) < 2:
        raise ConfigError("Escape needs at least two wells", field="landscape")
    if not temperature > 0:
        raise ConfigError(f"Escape temperature must be positive, got {temperature}", field="parameters.temperature")
    if runs < 2 or max_steps < 1 or not dt > 0:
        raise ConfigError("Escape estimation needs runs >= 2, max_steps >= 1 and dt > 0")
    rng = RngStream(seed, stream_id)
    d = landscape.dimension
    if domain is not None:
        if domain.dimension != d:
            raise DimensionError(f"Reflecting domain of dimension {domain.dimension} does not match the landscape")
        lower, upper = np.array(domain.lower), np.array(domain.upper)
        if np.any(landscape.centers[well] < lower) or np.any(landscape.centers[well] > upper):
            raise ConfigError(f"Well {well} lies outside the reflecting domain", field="parameters.well")
    x = np.tile(landscape.centers[well], (runs, 1))
    passage_step = np.full(runs, -1)
    active = np.ones(runs, dtype=bool)
    others = np.array([j for j in range(len(landscape)) if j != well])
    noise_scale = math.sqrt(2.0 * temperature * dt)
    for step in range(1, max_steps + 1):
        noise = rng.normal((runs, d))
        index = np.flatnonzero(active)
        if index.size == 0:
            break
        moved = x[index] + landscape.grad_many(x[index]) * dt + noise_scale * noise[index]
        if domain is not None:
            moved = np.where(moved < lower, 2 * lower - moved, moved)
            moved = np.where(moved > upper, 2 * upper - moved, moved)
        x[index] = moved
        distances = landscape.distances_to_centers(x[index])[:, others]
        arrived = np.any(distances <= landscape.widths[others], axis=1)
        passage_step[index[arrived]] = step
        active[index[arrived]] = False

    times = passage_step[passage_step > 0] * dt
    escaped = times.size
    censored = escaped < CENSORING_LIMIT * runs
    if censored:
        logger.warning(f"Escape estimate from well {well} at theta={temperature} is censored: only {escaped}/{runs} "
                       f"runs arrived within {max_steps} steps")
    mean = float(times.mean()) if escaped else None
    se = float(times.std(ddof=1) / math.sqrt(escaped)) if escaped > 1 else None
    return EscapeEstimate(well, float(temperature), mean, se, runs, int(escaped), bool(censored), rng.lineage, times)


def escapes_faster(first: EscapeEstimate, second: EscapeEstimate) -> float:
    """One-sided Welch p-value for `first` having the shorter mean first-passage time."""
    if first.escaped_runs < 2 or second.escaped_runs < 2:
        raise ConfigError("A directional escape test needs at least two arrived runs per well")
    return float(stats.ttest_ind(first.passage_times, second.passage_times, equal_var=False,
                                 alternative="less").pvalue)


def reflecting_envelope(landscape: GaussianMixtureLandscape, radius: float) -> Region:
    """Smallest box holding every well's radius * sigma vicinity."""
    reach = radius * landscape.widths[:, None]
    return Region(tuple((landscape.centers - reach).min(axis=0)), tuple((landscape.centers + reach).max(axis=0)))


def basin_region_1d(landscape: GaussianMixtureLandscape, well: int, radius: float, saddle_position: float) -> Region:
    """The radius * sigma interval around a 1D well, cut at the saddle it shares with its neighbour."""
    center, width = float(landscape.centers[well, 0]), float(landscape.widths[well])
    lower, upper = center - radius * width, center + radius * width
    if saddle_position > center:
        upper = min(upper, saddle_position)
    else:
        lower = max(lower, saddle_position)
    return Region((lower,), (upper,))


def barrier_height_1d(landscape: GaussianMixtureLandscape, first: int, second: int, nodes: int = 4001):
    """Position and energy of the highest point of E = -L on the segment between two 1D well centers."""
    if landscape.dimension != 1:
        raise DimensionError("Barrier search is implemented for 1D landscapes")
    lo, hi = sorted((landscape.centers[first, 0], landscape.centers[second, 0]))
    xs = np.linspace(lo, hi, nodes)
    energies = -landscape.eval_many(xs[:, None])
    top = int(np.argmax(energies))
    return float(xs[top]), float(energies[top])
