###############################################################################
# Shared stochastic machinery: seeded random streams, Euler-Maruyama steps,
# explicit Fokker-Planck evolution and Gibbs densities on node grids.
# OVERFITSIM project
# License: GPL v3
###############################################################################
from dataclasses import dataclass
from logging import Logger, getLogger
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from overfitsim.utils.SimulationErrors import ConfigError, DimensionError, QuadratureError, SimulationFault, \
    StabilityError

# potential callables receive points of shape (n, d) and return values of shape (n,)
Potential = Callable[[np.ndarray], np.ndarray]


class RngStream:
    """
    Reproducible normal/uniform draws. A stream is identified by (seed, stream_id); streams with different ids are
    statistically independent, identical ids replay identical draws.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if int(seed) != seed or seed < 0:
            raise ConfigError(f"Seed must be a non-negative integer, got {seed}", field="seed")
        if int(stream_id) != stream_id or stream_id < 0:
            raise ConfigError(f"Stream id must be a non-negative integer, got {stream_id}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._generator = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,)))

    def normal(self, size=None) -> np.ndarray:
        return self._generator.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self._generator.random(size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)

    @property
    def lineage(self):
        return {"seed": self.seed, "stream_id": self.stream_id}

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass
class DriftField:
    """Vector field b(x, t). The function maps a point (or a batch of points) and a time to the drift."""
    function: Callable[[np.ndarray, float], np.ndarray]
    dimension: int

    def __call__(self, x: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.function(x, t)


def euler_maruyama_step(x, drift: DriftField, temperature: float, dt: float, rng: RngStream, t: float = 0.0):
    """One step of dx = b(x,t) dt + sqrt(2 theta) dW. Accepts a single point or a batch of shape (n, d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != drift.dimension:
        raise DimensionError(f"State of shape {x.shape} does not match drift dimension {drift.dimension}")
    if temperature < 0:
        raise ConfigError(f"Temperature must be non-negative, got {temperature}", field="temperature")
    if dt <= 0:
        raise ConfigError(f"Time step must be positive, got {dt}", field="dt")
    b = np.asarray(drift(x, t), dtype=float)
    if not np.all(np.isfinite(b)):
        raise SimulationFault("Non-finite drift encountered in Euler-Maruyama step", detail=f"t={t}")
    noise = rng.normal(x.shape)
    return x + b * dt + np.sqrt(2.0 * temperature * dt) * noise


@dataclass(frozen=True)
class GridSpec:
    """Box [lower, upper] sampled with `nodes` equally spaced nodes per axis, boundaries included."""
    lower: tuple
    upper: tuple
    nodes: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        nodes = tuple(int(v) for v in np.atleast_1d(self.nodes))
        if not (len(lower) == len(upper) == len(nodes)):
            raise DimensionError("Grid bounds and node counts must have the same dimension")
        if len(lower) > 2:
            raise DimensionError(f"Grids are limited to 1 or 2 dimensions, got {len(lower)}")
        if any(lo >= hi for lo, hi in zip(lower, upper)):
            raise ConfigError("Grid lower bounds must be below upper bounds")
        if any(n < 3 for n in nodes):
            raise ConfigError("Grids need at least 3 nodes per axis")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dimension(self):
        return len(self.nodes)

    @property
    def axes(self):
        return tuple(np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, self.nodes))

    @property
    def spacing(self):
        return tuple((hi - lo) / (n - 1) for lo, hi, n in zip(self.lower, self.upper, self.nodes))


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2
    return weights


@dataclass
class DensityGrid:
    """Density values on the nodes of a GridSpec, indexed [i] in 1D and [i, j] (x, y) in 2D."""
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes:
            raise DimensionError(f"Density of shape {self.values.shape} does not match grid {self.grid.nodes}")

    @property
    def cell_volumes(self) -> np.ndarray:
        weights = [_trapezoid_weights(n, h) for n, h in zip(self.grid.nodes, self.grid.spacing)]
        if len(weights) == 1:
            return weights[0]
        return np.multiply.outer(weights[0], weights[1])

    def mass(self) -> float:
        return float(np.sum(self.values * self.cell_volumes))

    def integrate(self, field: np.ndarray) -> float:
        result = self.values * field
        for axis in reversed(self.grid.axes):
            result = trapezoid(result, axis, axis=-1)
        return float(result)

    def mean(self) -> np.ndarray:
        points = grid_points(self.grid).reshape(self.grid.nodes + (self.grid.dimension,))
        mass = self.mass()
        return np.array([self.integrate(points[..., k]) for k in range(self.grid.dimension)]) / mass

    def variance(self) -> np.ndarray:
        points = grid_points(self.grid).reshape(self.grid.nodes + (self.grid.dimension,))
        mean = self.mean()
        mass = self.mass()
        return np.array([self.integrate((points[..., k] - mean[k]) ** 2)
                         for k in range(self.grid.dimension)]) / mass

    def l1_distance(self, other: "DensityGrid") -> float:
        if other.grid != self.grid:
            raise DimensionError("Densities live on different grids")
        return float(np.sum(np.abs(self.values - other.values) * self.cell_volumes))

    def header(self):
        return ["x", "density"] if self.grid.dimension == 1 else ["x", "y", "density"]

    def to_rows(self):
        """Row-major (x outer, y inner) rows matching header()."""
        points = grid_points(self.grid)
        return [tuple(point) + (value,) for point, value in zip(points.tolist(), self.values.ravel().tolist())]


def grid_points(grid: GridSpec) -> np.ndarray:
    mesh = np.meshgrid(*grid.axes, indexing="ij")
    return np.stack([axis.ravel() for axis in mesh], axis=-1)


def _potential_on_grid(potential: Potential, grid: GridSpec) -> np.ndarray:
    values = np.asarray(potential(grid_points(grid)), dtype=float).reshape(grid.nodes)
    if not np.all(np.isfinite(values)):
        raise ConfigError("Potential is not finite on the grid")
    return values


def gibbs_density(potential: Potential, beta: float, grid: GridSpec) -> DensityGrid:
    """Normalized exp(-beta f) with the trapezoid rule for the partition function."""
    if not beta > 0:
        raise ConfigError(f"Inverse temperature must be positive, got {beta}", field="beta")
    f = _potential_on_grid(potential, grid)
    shifted = np.exp(-beta * (f - f.min()))
    unnormalized = DensityGrid(grid, shifted)
    z = unnormalized.mass()
    if not (np.isfinite(z) and z > 0):
        raise QuadratureError(f"Partition function underflowed at beta={beta}; rescale beta or the potential")
    return DensityGrid(grid, shifted / z)


class FokkerPlanckOperator:
    """
    Explicit conservative discretization of du/dt = theta Lap(u) + grad(u).grad(f) + u Lap(f) = div(theta grad u + u
    grad f) with zero-flux boundaries.

    Node values live on trapezoid control volumes and each face flux is exponentially fitted,
    J = theta/h (u_{i+1} exp(df/2theta) - u_i exp(-df/2theta)), so the discrete Gibbs state carries zero flux and total
    mass sum(V u) changes only by rounding.
    """

    def __init__(self, potential: Potential, temperature: float, grid: GridSpec):
        if not temperature > 0:
            raise ConfigError(f"Fokker-Planck temperature must be positive, got {temperature}", field="temperature")
        self.grid = grid
        self.temperature = float(temperature)
        f = _potential_on_grid(potential, grid)
        self._forward = []
        self._backward = []
        with np.errstate(over="ignore"):
            for axis in range(grid.dimension):
                df = np.diff(f, axis=axis) / (2.0 * self.temperature)
                self._forward.append(np.exp(df))
                self._backward.append(np.exp(-df))
        if not all(np.all(np.isfinite(a)) for a in self._forward + self._backward):
            raise StabilityError("Potential varies too fast between nodes for this temperature; refine the grid")
        self._volumes = [_trapezoid_weights(n, h) for n, h in zip(grid.nodes, grid.spacing)]

    def max_outflow_rate(self) -> float:
        rate = np.zeros(self.grid.nodes)
        for axis, (h, volumes) in enumerate(zip(self.grid.spacing, self._volumes)):
            shape = [1] * self.grid.dimension
            shape[axis] = -1
            coeff = self.temperature / h
            out = np.zeros(self.grid.nodes)
            lower = [slice(None)] * self.grid.dimension
            upper = [slice(None)] * self.grid.dimension
            lower[axis] = slice(None, -1)
            upper[axis] = slice(1, None)
            out[tuple(lower)] += coeff * self._backward[axis]
            out[tuple(upper)] += coeff * self._forward[axis]
            rate += out / volumes.reshape(shape)
        return float(rate.max())

    def rate_of_change(self, u: np.ndarray) -> np.ndarray:
        du = np.zeros_like(u)
        for axis, (h, volumes) in enumerate(zip(self.grid.spacing, self._volumes)):
            shape = [1] * self.grid.dimension
            shape[axis] = -1
            lower = [slice(None)] * self.grid.dimension
            upper = [slice(None)] * self.grid.dimension
            lower[axis] = slice(None, -1)
            upper[axis] = slice(1, None)
            flux = (self.temperature / h) * (self._forward[axis] * u[tuple(upper)] -
                                             self._backward[axis] * u[tuple(lower)])
            divergence = np.zeros_like(u)
            divergence[tuple(lower)] += flux
            divergence[tuple(upper)] -= flux
            du += divergence / volumes.reshape(shape)
        return du


def fokker_planck_evolve(density: DensityGrid, potential: Potential, temperature: float, dt: float, steps: int,
                         callback: Callable[[int, DensityGrid], None] = None, logger: Logger = getLogger()) \
        -> DensityGrid:
    """
    Advances the density `steps` explicit steps. The callback, if given, receives (step, density) after every step.
    """
    grid = density.grid
    if dt <= 0:
        raise ConfigError(f"Time step must be positive, got {dt}", field="dt")
    if steps < 0:
        raise ConfigError(f"Step count must be non-negative, got {steps}", field="steps")
    h_min = min(grid.spacing)
    bound = h_min ** 2 / (4.0 * temperature) if temperature > 0 else np.inf
    if dt > bound:
        raise StabilityError(f"Time step {dt} exceeds the explicit stability bound h^2/(4 theta) = {bound:.6g}",
                             field="dt")
    operator = FokkerPlanckOperator(potential, temperature, grid)
    outflow = operator.max_outflow_rate()
    if dt * outflow > 1.0:
        raise StabilityError(f"Time step {dt} exceeds the drift-adjusted stability bound {1.0 / outflow:.6g}; "
                             f"reduce dt or refine the grid", field="dt")
    logger.debug(f"Fokker-Planck evolution: {steps} steps, dt={dt}, dt*max outflow={dt * outflow:.3g}")
    u = density.values.copy()
    for step in range(1, steps + 1):
        u = u + dt * operator.rate_of_change(u)
        if callback is not None:
            callback(step, DensityGrid(grid, u))
    return DensityGrid(grid, u)


def gaussian_bump(grid: GridSpec, center: Sequence[float], width: float) -> DensityGrid:
    """Normalized narrow Gaussian initial condition, used as a delta-like start."""
    points = grid_points(grid)
    center = np.asarray(center, dtype=float)
    values = np.exp(-np.sum((points - center) ** 2, axis=1) / (2 * width ** 2)).reshape(grid.nodes)
    bump = DensityGrid(grid, values)
    return DensityGrid(grid, values / bump.mass())
