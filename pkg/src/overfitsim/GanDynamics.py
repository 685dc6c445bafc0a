###############################################################################
# Toy GAN minimax: a Gaussian-bump logistic discriminator against a Gaussian
# generator, the value function, its gradients, noisy ascent/descent and the
# bilinear rotation example.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import math
from dataclasses import dataclass
from logging import Logger, getLogger
from typing import Protocol

import numpy as np
from scipy import special

from overfitsim.SdeCore import RngStream
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError, QuadratureError, SimulationFault

QUADRATURE_NODES = 64
QUADRATURE_SPAN = 8.0
FD_STEP = 1e-5
SATURATION = 36.0


class Density(Protocol):
    def logpdf(self, z: np.ndarray) -> np.ndarray: ...

    def support(self) -> tuple: ...


@dataclass(frozen=True)
class GaussianDensity:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise ConfigError(f"Standard deviation must be positive, got {self.std}")

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        return -0.5 * ((z - self.mean) / self.std) ** 2 - math.log(self.std) - 0.5 * math.log(2 * math.pi)

    def support(self):
        return self.mean - QUADRATURE_SPAN * self.std, self.mean + QUADRATURE_SPAN * self.std


@dataclass(frozen=True)
class UniformDensity:
    lower: float
    upper: float

    def logpdf(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.lower) & (z <= self.upper)
        return np.where(inside, -math.log(self.upper - self.lower), -np.inf)

    def support(self):
        return self.lower, self.upper


class DiscriminatorParams:
    """D(z; x) = expit(a exp(-(z - m)^2 / (2 s^2)) + b) with x = (m, log s, a, b)."""
    size = 4

    def __init__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise DimensionError(f"Discriminator parameters must have shape (4,), got {x.shape}")
        self.x = x

    @property
    def center(self):
        return self.x[0]

    @property
    def scale(self):
        return math.exp(self.x[1])

    def logits_and_partials(self, z: np.ndarray):
        """u(z) and du/dx stacked as (4, len(z)), plus du/dz."""
        m, log_s, a, _ = self.x
        s2 = math.exp(2 * log_s)
        offset = z - m
        bump = np.exp(-offset ** 2 / (2 * s2))
        u = a * bump + self.x[3]
        partials = np.stack([a * bump * offset / s2, a * bump * offset ** 2 / s2, bump, np.ones_like(z)])
        du_dz = -a * bump * offset / s2
        return u, partials, du_dz

    def kernel_density(self) -> GaussianDensity:
        return GaussianDensity(self.center, self.scale)


class GeneratorParams:
    """p_gen = N(mu, exp(2 tau)) with y = (mu, tau)."""
    size = 2

    def __init__(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.size,):
            raise DimensionError(f"Generator parameters must have shape (2,), got {y.shape}")
        self.y = y

    @property
    def mean(self):
        return self.y[0]

    @property
    def std(self):
        return math.exp(self.y[1])

    def density(self) -> GaussianDensity:
        return GaussianDensity(self.mean, self.std)


def _standard_nodes(nodes: int):
    t, w = np.polynomial.legendre.leggauss(nodes)
    zeta = QUADRATURE_SPAN * t
    weights = QUADRATURE_SPAN * w * np.exp(-0.5 * zeta ** 2) / math.sqrt(2 * math.pi)
    return zeta, weights


def _log_expit_pair(u, logger: Logger):
    if np.any(np.abs(u) > SATURATION):
        logger.debug("Discriminator output saturated; log terms evaluated in log-sigmoid form")
    return special.log_expit(u), special.log_expit(-u)


@dataclass
class ValueTerms:
    V: float
    V1: float
    V2: float


def log_likelihood(sample: np.ndarray, disc: DiscriminatorParams, logger: Logger = getLogger()):
    """V1 = mean log D(z_l) over the data sample, with its gradient in x."""
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0:
        raise ConfigError("The data sample is empty", field="parameters.sample_size")
    u, partials, _ = disc.logits_and_partials(sample)
    log_d, _ = _log_expit_pair(u, logger)
    one_minus_d = special.expit(-u)
    return float(log_d.mean()), partials @ one_minus_d / sample.size


def expected_log_rejection(disc: DiscriminatorParams, gen: GeneratorParams, nodes: int = QUADRATURE_NODES,
                           logger: Logger = getLogger()):
    """
    V2 = integral of p_gen(z) log(1 - D(z)) dz over mu +- 8 std by Gauss-Legendre, with gradients in x and y.
    The nodes are fixed in standardized coordinates so the gradients are exact for the quadrature.
    """
    zeta, weights = _standard_nodes(nodes)
    z = gen.mean + gen.std * zeta
    u, partials, du_dz = disc.logits_and_partials(z)
    _, log_one_minus_d = _log_expit_pair(u, logger)
    d = special.expit(u)
    value = float(weights @ log_one_minus_d)
    grad_x = -(partials * d) @ weights
    dh_dz = -d * du_dz
    grad_y = np.array([weights @ dh_dz, weights @ (dh_dz * gen.std * zeta)])
    return value, grad_x, grad_y


def value_function(sample: np.ndarray, disc: DiscriminatorParams, gen: GeneratorParams,
                   nodes: int = QUADRATURE_NODES, logger: Logger = getLogger()) -> ValueTerms:
    v1, _ = log_likelihood(sample, disc, logger)
    v2, _, _ = expected_log_rejection(disc, gen, nodes, logger)
    return ValueTerms(v1 + v2, v1, v2)


def value_gradients(sample: np.ndarray, disc: DiscriminatorParams, gen: GeneratorParams,
                    nodes: int = QUADRATURE_NODES, logger: Logger = getLogger()):
    """(dV/dx, dV/dy), analytic."""
    _, g1 = log_likelihood(sample, disc, logger)
    _, g2x, g2y = expected_log_rejection(disc, gen, nodes, logger)
    return g1 + g2x, g2y


def numerical_gradients(sample: np.ndarray, disc: DiscriminatorParams, gen: GeneratorParams,
                        nodes: int = QUADRATURE_NODES, step: float = FD_STEP):
    """Central finite differences of V in x and y."""
    def v_of(x, y):
        return value_function(sample, DiscriminatorParams(x), GeneratorParams(y), nodes).V

    grad_x = np.zeros(DiscriminatorParams.size)
    grad_y = np.zeros(GeneratorParams.size)
    for i in range(DiscriminatorParams.size):
        e = np.zeros(DiscriminatorParams.size)
        e[i] = step
        grad_x[i] = (v_of(disc.x + e, gen.y) - v_of(disc.x - e, gen.y)) / (2 * step)
    for i in range(GeneratorParams.size):
        e = np.zeros(GeneratorParams.size)
        e[i] = step
        grad_y[i] = (v_of(disc.x, gen.y + e) - v_of(disc.x, gen.y - e)) / (2 * step)
    return grad_x, grad_y


def kl_divergence(p: Density, q: Density, nodes: int = 128) -> float:
    """
    KL(p | q) = integral of p log(p / q) over the support of p, by Gauss-Legendre. Raises when p puts mass where q
    has none.
    """
    lower, upper = p.support()
    t, w = np.polynomial.legendre.leggauss(nodes)
    half = (upper - lower) / 2
    z = lower + half * (t + 1)
    log_p = p.logpdf(z)
    log_q = q.logpdf(z)
    p_values = np.exp(log_p)
    uncovered = np.isneginf(log_q) & (p_values > 0)
    if np.any(uncovered):
        lost = float(half * (w[uncovered] @ p_values[uncovered]))
        raise QuadratureError(f"Support of p is not contained in support of q: mass {lost:.4g} of p lies outside")
    mask = p_values > 0
    return float(half * (w[mask] @ (p_values[mask] * (log_p[mask] - log_q[mask]))))


def gan_sgld_step(x, y, sample: np.ndarray, temperature: float, dt: float, rng: RngStream,
                  gradient: str = "analytic", nodes: int = QUADRATURE_NODES):
    """
    x' = x + dV/dx dt + sqrt(2 theta dt) g_x and y' = y - dV/dy dt + sqrt(2 theta dt) g_y. Noise draws are taken as
    one block of 6 normals per step, x first.
    """
    disc = DiscriminatorParams(x)
    gen = GeneratorParams(y)
    if gradient == "analytic":
        grad_x, grad_y = value_gradients(sample, disc, gen, nodes)
    elif gradient == "finite_difference":
        grad_x, grad_y = numerical_gradients(sample, disc, gen, nodes)
    else:
        raise ConfigError(f"Unknown gradient mode '{gradient}'", field="parameters.gradient")
    if not (np.all(np.isfinite(grad_x)) and np.all(np.isfinite(grad_y))):
        raise SimulationFault("Non-finite value-function gradient", detail=f"x={disc.x.tolist()}, y={gen.y.tolist()}")
    noise = rng.normal(DiscriminatorParams.size + GeneratorParams.size)
    scale = math.sqrt(2.0 * temperature * dt)
    new_x = disc.x + grad_x * dt + scale * noise[:DiscriminatorParams.size]
    new_y = gen.y - grad_y * dt + scale * noise[DiscriminatorParams.size:]
    return new_x, new_y


def sample_data(mean: float, std: float, size: int, rng: RngStream) -> np.ndarray:
    return mean + std * rng.normal(size)


@dataclass
class GanTrajectory:
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    values: list
    kl: np.ndarray

    def rows(self):
        for i in range(len(self.times)):
            terms = self.values[i]
            yield (self.times[i], *self.x[i], *self.y[i], terms.V, terms.V1, terms.V2, self.kl[i])

    @staticmethod
    def header():
        return ["t", "x1", "x2", "x3", "x4", "y1", "y2", "V", "V1", "V2", "kl"]


def simulate_gan(x0, y0, sample: np.ndarray, temperature: float, dt: float, steps: int, rng: RngStream,
                 record_every: int = 1, gradient: str = "analytic", logger: Logger = getLogger()) -> GanTrajectory:
    if steps < 1 or record_every < 1:
        raise ConfigError("steps and record_every must be at least 1")
    x = np.asarray(x0, dtype=float)
    y = np.asarray(y0, dtype=float)
    times, xs, ys, values, kls = [], [], [], [], []

    def record(t):
        disc, gen = DiscriminatorParams(x), GeneratorParams(y)
        times.append(t)
        xs.append(x.copy())
        ys.append(y.copy())
        values.append(value_function(sample, disc, gen, logger=logger))
        kls.append(discriminator_gap(disc, gen))

    record(0.0)
    for step in range(1, steps + 1):
        x, y = gan_sgld_step(x, y, sample, temperature, dt, rng, gradient)
        if step % record_every == 0:
            record(step * dt)
    return GanTrajectory(np.array(times), np.array(xs), np.array(ys), values, np.array(kls))


def bilinear_example_run(omega: float, x0: float, y0: float, dt: float, steps: int) -> np.ndarray:
    """Explicit Euler for dx/dt = omega y, dy/dt = -omega x. Rows are (t, x, y)."""
    if not dt > 0 or steps < 1:
        raise ConfigError("Bilinear example needs dt > 0 and steps >= 1")
    trajectory = np.empty((steps + 1, 3))
    x, y = float(x0), float(y0)
    trajectory[0] = (0.0, x, y)
    for n in range(1, steps + 1):
        x, y = x + dt * omega * y, y - dt * omega * x
        trajectory[n] = (n * dt, x, y)
    return trajectory


def bilinear_exact(omega: float, x0: float, y0: float, times: np.ndarray):
    amplitude = math.hypot(x0, y0)
    phase = math.atan2(x0, y0)
    return amplitude * np.sin(omega * times + phase), amplitude * np.cos(omega * times + phase)


def radius_drift(trajectory: np.ndarray) -> float:
    r2 = trajectory[:, 1] ** 2 + trajectory[:, 2] ** 2
    return float(np.max(np.abs(r2 - r2[0])))


def max_bilinear_error(trajectory: np.ndarray, omega: float) -> float:
    x_exact, y_exact = bilinear_exact(omega, trajectory[0, 1], trajectory[0, 2], trajectory[:, 0])
    return float(max(np.max(np.abs(trajectory[:, 1] - x_exact)), np.max(np.abs(trajectory[:, 2] - y_exact))))


def discriminator_gap(disc: DiscriminatorParams, gen: GeneratorParams) -> float:
    """KL between the discriminator kernel and the generator, the distance the dynamics is meant to close."""
    return kl_divergence(disc.kernel_density(), gen.density())
