###############################################################################
# Predator-prey pursuit on a landscape: the prey climbs the landscape and is
# repelled by a chasing predator. Includes regime classification and the
# limiting-oscillation solver for a radially symmetric well.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import enum
import math
from dataclasses import dataclass, field
from logging import Logger, getLogger
from typing import Optional

import numpy as np
from scipy import optimize, special

from overfitsim.Landscape import GaussianMixtureLandscape, GaussianWell
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError

D_MIN = 1e-9
TERMINAL_WINDOW = 0.2
RESIDENCE_FACTOR = 3.0
FLAT_AMPLITUDE = 1e-6
MIN_WINDOW_SAMPLES = 10


@dataclass(frozen=True)
class InteractionParams:
    """Prey repulsion V(d) = (A sigmoid(-c (d - l)) + C exp(-sigma d) / d) delta / d and pursuit speed alpha_y."""
    A: float = 0.3
    l: float = 1.0
    c: float = 1e3
    C: float = 10.0
    sigma: float = 10.0
    alpha_y: float = 0.15

    def __post_init__(self):
        for name in ("A", "l", "c", "C", "sigma", "alpha_y"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"Interaction parameter {name} must be finite and non-negative, got {value}",
                                  field=f"parameters.{name}")

    @property
    def sigma_min(self):
        """Distance below which the short-range term dominates."""
        return 1.0 / self.sigma if self.sigma > 0 else 0.0

    @property
    def sigma_max(self):
        """Range of the mid-distance repulsion."""
        return self.l

    def check_speeds(self, logger: Logger = getLogger()):
        if self.alpha_y > 0 and self.A <= self.alpha_y:
            logger.warning(f"Predator speed {self.alpha_y} is not below the mid-range repulsion {self.A}; the prey "
                           f"cannot outrun the predator")
            return False
        return True


def _separation(delta, logger: Logger):
    delta = np.asarray(delta, dtype=float)
    d = float(np.linalg.norm(delta))
    if d < D_MIN:
        logger.warning(f"Prey and predator coincide (d={d:.3g}); using d_min={D_MIN:g} along the first axis")
        direction = np.zeros_like(delta)
        direction[0] = 1.0
        return D_MIN, direction
    return d, delta / d


def repulsion_magnitude(d, params: InteractionParams):
    d = np.asarray(d, dtype=float)
    return params.A * special.expit(-params.c * (d - params.l)) + params.C * np.exp(-params.sigma * d) / d


def interaction_force(delta, params: InteractionParams, logger: Logger = getLogger()) -> np.ndarray:
    """Force on the prey for delta = x - y, pointing away from the predator."""
    d, direction = _separation(delta, logger)
    return float(repulsion_magnitude(d, params)) * direction


def pursuit_force(delta, alpha_y: float, logger: Logger = getLogger()) -> np.ndarray:
    """Predator velocity for delta = x - y: speed alpha_y toward the prey."""
    _, direction = _separation(delta, logger)
    return alpha_y * direction


@dataclass
class PursuitTrajectory:
    times: np.ndarray
    prey: np.ndarray
    predator: np.ndarray
    landscape_values: np.ndarray
    truncated: bool = False

    @property
    def distances(self):
        return np.linalg.norm(self.prey - self.predator, axis=1)

    @staticmethod
    def header(dimension: int = 2):
        return ["t"] + [f"x{i + 1}" for i in range(dimension)] + [f"y{i + 1}" for i in range(dimension)] + \
               ["d", "L(x)"]

    def rows(self):
        distances = self.distances
        for i in range(len(self.times)):
            yield (self.times[i], *self.prey[i], *self.predator[i], distances[i], self.landscape_values[i])


def simulate(landscape: GaussianMixtureLandscape, x0, y0, params: InteractionParams, dt: float = 0.05,
             steps: int = 8000, record_every: int = 2, logger: Logger = getLogger()) -> PursuitTrajectory:
    """
    Explicit Euler for dx/dt = grad L(x) + V(x - y), dy/dt = alpha_y (x - y) / |x - y|. Deterministic.

    The step dt plays the role of a learning rate: it is coarse on purpose, and a much finer step follows the
    continuous flow, where the head-on approach carries the prey straight through a narrow well. A non-finite state
    ends the run early; the trajectory keeps the last finite sample and is flagged as truncated.
    """
    x = np.asarray(x0, dtype=float).copy()
    y = np.asarray(y0, dtype=float).copy()
    if x.shape != (landscape.dimension,) or y.shape != x.shape:
        raise DimensionError("Prey and predator start points must match the landscape dimension")
    if not dt > 0 or steps < 1 or record_every < 1:
        raise ConfigError("simulate needs dt > 0, steps >= 1 and record_every >= 1")
    params.check_speeds(logger)
    sigma_min_well = float(landscape.widths.min())
    times, prey, predator, values = [], [], [], []
    bound_warned = False
    truncated = False

    def record(t):
        times.append(t)
        prey.append(x.copy())
        predator.append(y.copy())
        values.append(landscape.eval(x))

    record(0.0)
    for step in range(1, steps + 1):
        delta = x - y
        velocity = landscape.grad(x) + interaction_force(delta, params, logger)
        move = velocity * dt
        chase = pursuit_force(delta, params.alpha_y, logger) * dt
        if not (np.all(np.isfinite(move)) and np.all(np.isfinite(chase))):
            logger.warning(f"Non-finite state at step {step} (x={x.tolist()}, y={y.tolist()}); truncating the "
                           f"trajectory at t={(step - 1) * dt:.6g}")
            if (step - 1) % record_every != 0:
                record((step - 1) * dt)
            truncated = True
            break
        if not bound_warned and np.linalg.norm(move) >= sigma_min_well / 2:
            logger.warning(f"Prey displacement {np.linalg.norm(move):.3g} at step {step} exceeds half the narrowest "
                           f"well width; reduce dt")
            bound_warned = True
        y = y + chase
        x = x + move
        if step % record_every == 0:
            record(step * dt)
    return PursuitTrajectory(np.array(times), np.array(prey), np.array(predator), np.array(values), truncated)


class Regime(enum.Enum):
    OSCILLATION = 1
    PUSHOUT = 2
    ESCAPE = 3
    UNRESOLVED = 4


@dataclass
class RegimeLabel:
    regime: Regime
    well: Optional[int] = None
    source_well: Optional[int] = None
    visited_wells: list = field(default_factory=list)

    def __str__(self):
        if self.regime is Regime.PUSHOUT:
            return f"PUSHOUT({self.source_well}->{self.well})"
        if self.regime is Regime.OSCILLATION:
            return f"OSCILLATION({self.well})"
        return self.regime.name


def _sign_changes(series: np.ndarray) -> int:
    signs = np.sign(series)
    signs = signs[signs != 0]
    return int(np.count_nonzero(np.diff(signs)))


def classify_regime(trajectory: PursuitTrajectory, landscape: GaussianMixtureLandscape,
                    window: float = TERMINAL_WINDOW) -> RegimeLabel:
    """
    Labels the prey's behaviour over the final `window` fraction of samples. OSCILLATION(k): the window stays within
    3 sigma_k of c_k and the detrended distance to c_k changes sign at least twice, unless it is flat. PUSHOUT(j, k):
    OSCILLATION(k) after the prey sat in the sigma-vicinity of another well j. ESCAPE: the window lies outside every
    3 sigma vicinity.
    A truncated trajectory is UNRESOLVED.
    """
    membership = landscape.membership_many(trajectory.prey)
    visited = []
    for m in membership.tolist():
        if m >= 0 and (not visited or visited[-1] != m):
            visited.append(m)
    if trajectory.truncated:
        return RegimeLabel(Regime.UNRESOLVED, visited_wells=visited)
    n = len(trajectory.times)
    start = int(math.floor(n * (1.0 - window)))
    if n - start < MIN_WINDOW_SAMPLES:
        raise ConfigError(f"Trajectory of {n} samples is too short to classify; need {MIN_WINDOW_SAMPLES} samples in "
                          f"the terminal window")

    tail = trajectory.prey[start:]
    residence = landscape.membership_many(tail, radius_factor=RESIDENCE_FACTOR)
    if np.all(residence < 0):
        return RegimeLabel(Regime.ESCAPE, visited_wells=visited)
    if not np.all(residence == residence[0]):
        return RegimeLabel(Regime.UNRESOLVED, visited_wells=visited)
    k = int(residence[0])
    radius = np.linalg.norm(tail - landscape.centers[k], axis=1)
    t = trajectory.times[start:]
    detrended = radius - np.polyval(np.polyfit(t, radius, 1), t)
    flat = np.ptp(detrended) < FLAT_AMPLITUDE
    if not flat and _sign_changes(detrended) < 2:
        return RegimeLabel(Regime.UNRESOLVED, well=k, visited_wells=visited)
    earlier = [j for j in visited if j != k]
    if earlier:
        return RegimeLabel(Regime.PUSHOUT, well=k, source_well=earlier[-1], visited_wells=visited)
    return RegimeLabel(Regime.OSCILLATION, well=k, visited_wells=visited)


@dataclass
class OscillationSolution:
    theta: float
    feasible: bool
    R_x: Optional[float] = None
    R_y: Optional[float] = None
    d: Optional[float] = None
    residuals: Optional[list] = None


def _radial_landscape(well_amplitude: float, well_width: float):
    return GaussianMixtureLandscape([GaussianWell(np.zeros(2), well_width, well_amplitude)])


def _residuals(unknowns, landscape: GaussianMixtureLandscape, params: InteractionParams, theta: float):
    r_x, r_y, d = unknowns
    x = np.array([r_x, 0.0])
    line = np.array([math.cos(theta), math.sin(theta)])
    grad = landscape.grad(x)
    force = float(repulsion_magnitude(d, params)) * line
    speed_ratio = np.linalg.norm(grad + force) / params.alpha_y
    return np.array([r_x / r_y - speed_ratio,
                     np.linalg.norm(grad) - float(repulsion_magnitude(d, params)),
                     r_y ** 2 - (r_x ** 2 + d ** 2 - 2 * r_x * d * math.cos(theta))])


def limiting_oscillation_solve(well_amplitude: float, well_width: float, params: InteractionParams, theta: float,
                               scan_points: int = 400, tolerance: float = 1e-8, max_newton: int = 50,
                               logger: Logger = getLogger()) -> OscillationSolution:
    """
    Stationary circling of the pursuit around a radial well: prey radius R_x, predator radius R_y, separation d, with
    the predator-prey line at angle theta to the radial line. Solves
        R_x / R_y = |grad L(R_x) + V(d)| / alpha_y,  |grad L|(R_x) = |V|(d),  R_y^2 = R_x^2 + d^2 - 2 R_x d cos theta
    by scanning d over (1e-3, l], eliminating R_x on the rising side of the well profile, bracketing sign changes of
    the last relation and polishing with damped Newton. Infeasible when no root lies in the scan box.
    """
    if params.alpha_y <= 0:
        raise ConfigError("The limiting oscillation needs a moving predator (alpha_y > 0)", field="parameters.alpha_y")
    if not 0 < theta < math.pi:
        raise ConfigError(f"Angle must lie in (0, pi), got {theta}", field="parameters.angles")
    landscape = _radial_landscape(well_amplitude, well_width)
    profile_peak = well_width

    def gradient_norm(r):
        return float(np.linalg.norm(landscape.grad(np.array([r, 0.0]))))

    peak_force = gradient_norm(profile_peak)

    def eliminated(d):
        v = float(repulsion_magnitude(d, params))
        if v > peak_force:
            return None
        r_x = optimize.brentq(lambda r: gradient_norm(r) - v, 0.0, profile_peak, xtol=1e-15)
        if r_x <= 0:
            return None
        x = np.array([r_x, 0.0])
        line = np.array([math.cos(theta), math.sin(theta)])
        speed = np.linalg.norm(landscape.grad(x) + v * line)
        if speed == 0:
            return None
        r_y = r_x * params.alpha_y / speed
        return r_x, r_y, r_y ** 2 - (r_x ** 2 + d ** 2 - 2 * r_x * d * math.cos(theta))

    d_values = np.linspace(1e-3, params.l, scan_points)
    samples = [(d, eliminated(d)) for d in d_values]
    bracket = None
    for (d_lo, lo), (d_hi, hi) in zip(samples[:-1], samples[1:]):
        if lo is not None and hi is not None and np.sign(lo[2]) != np.sign(hi[2]):
            bracket = (d_lo, d_hi)
            break
    if bracket is None:
        logger.info(f"No limiting oscillation in the scan box at theta={theta:.4g}")
        return OscillationSolution(theta, False)

    d_root = optimize.brentq(lambda d: eliminated(d)[2], *bracket, xtol=1e-15)
    r_x, r_y, _ = eliminated(d_root)
    unknowns = np.array([r_x, r_y, d_root])
    residual = _residuals(unknowns, landscape, params, theta)
    for _ in range(max_newton):
        if np.max(np.abs(residual)) < tolerance:
            break
        jacobian = np.empty((3, 3))
        for j in range(3):
            step = 1e-7 * max(1.0, abs(unknowns[j]))
            shifted = unknowns.copy()
            shifted[j] += step
            jacobian[:, j] = (_residuals(shifted, landscape, params, theta) - residual) / step
        try:
            update = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError:
            break
        damping = 1.0
        while damping > 1e-4:
            candidate = unknowns + damping * update
            if np.all(candidate > 0):
                candidate_residual = _residuals(candidate, landscape, params, theta)
                if np.linalg.norm(candidate_residual) < np.linalg.norm(residual):
                    unknowns, residual = candidate, candidate_residual
                    break
            damping /= 2
        else:
            break
    feasible = bool(np.max(np.abs(residual)) < tolerance)
    if not feasible:
        logger.warning(f"Limiting oscillation at theta={theta:.4g} did not converge: residuals {residual.tolist()}")
    return OscillationSolution(theta, feasible, float(unknowns[0]), float(unknowns[1]), float(unknowns[2]),
                               residual.tolist())
