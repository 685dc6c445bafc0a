###############################################################################
# Stochastic gradient Langevin runs on Gaussian-mixture landscapes and the
# capture statistics built from them.
# OVERFITSIM project
# License: GPL v3
###############################################################################
from dataclasses import dataclass, field
from logging import Logger, getLogger
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from overfitsim.Landscape import GaussianMixtureLandscape
from overfitsim.SdeCore import RngStream
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError


@dataclass(frozen=True)
class SgldConfig:
    step_size: float = 0.05
    temperature: float = 0.0
    iterations: int = 2000
    patience: int = 50
    x0: tuple = (0.0, 0.0)
    record_every: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise ConfigError(f"Step size must be positive, got {self.step_size}", field="parameters.step_size")
        if not self.temperature >= 0:
            raise ConfigError(f"Temperature must be non-negative, got {self.temperature}",
                              field="parameters.temperature")
        if self.iterations < 1:
            raise ConfigError(f"Iteration budget must be at least 1, got {self.iterations}",
                              field="parameters.iterations")
        if self.patience < 1:
            raise ConfigError(f"Patience must be at least 1, got {self.patience}", field="parameters.patience")
        if self.record_every < 0:
            raise ConfigError("record_every must be non-negative", field="parameters.record_every")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))

    def with_temperature(self, temperature: float) -> "SgldConfig":
        return SgldConfig(self.step_size, temperature, self.iterations, self.patience, self.x0, self.record_every)


@dataclass
class SgldRunResult:
    captured_well: Optional[int]
    capture_iteration: Optional[int]
    diverged: bool
    final_state: np.ndarray
    rng: dict
    trajectory: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def captured(self):
        return self.captured_well is not None


def sgld_batch(landscape: GaussianMixtureLandscape, config: SgldConfig, rngs: Sequence[RngStream]) \
        -> list[SgldRunResult]:
    """
    Runs one SGLD chain per stream, x_{k+1} = x_k + alpha grad L(x_k) + xi_k with xi_k ~ N(0, T (1+k)^-1/2 I).

    Each chain draws its whole noise sequence from its own stream, so a chain's result does not depend on the other
    chains in the batch. A chain stops when it has stayed in one well's sigma-vicinity for `patience` consecutive
    iterates (capture) or when an iterate is not finite (divergence).
    """
    d = landscape.dimension
    x0 = np.asarray(config.x0, dtype=float)
    if x0.shape != (d,):
        raise DimensionError(f"Initial point {config.x0} does not match landscape dimension {d}")
    runs = len(rngs)
    k_max = config.iterations
    noise = np.stack([rng.normal((k_max, d)) for rng in rngs]) if runs else np.zeros((0, k_max, d))
    x = np.tile(x0, (runs, 1))
    active = np.ones(runs, dtype=bool)
    diverged = np.zeros(runs, dtype=bool)
    captured_well = np.full(runs, -1)
    capture_iteration = np.full(runs, -1)
    streak_well = np.full(runs, -1)
    streak_length = np.zeros(runs, dtype=int)
    record = config.record_every > 0
    paths = [[x0.copy()] for _ in range(runs)] if record else None

    def update_membership(index: np.ndarray, k: int):
        members = landscape.membership_many(x[index])
        same = (members == streak_well[index]) & (members >= 0)
        streak_length[index] = np.where(same, streak_length[index] + 1, np.where(members >= 0, 1, 0))
        streak_well[index] = members
        done = index[streak_length[index] >= config.patience]
        captured_well[done] = streak_well[done]
        capture_iteration[done] = k
        active[done] = False

    update_membership(np.arange(runs), 0)
    for k in range(k_max):
        index = np.flatnonzero(active)
        if index.size == 0:
            break
        scale = np.sqrt(config.temperature * (1.0 + k) ** -0.5)
        with np.errstate(over="ignore", invalid="ignore"):
            x[index] = x[index] + config.step_size * landscape.grad_many(x[index]) + scale * noise[index, k]
        bad = ~np.all(np.isfinite(x[index]), axis=1)
        if bad.any():
            diverged[index[bad]] = True
            active[index[bad]] = False
            index = index[~bad]
        update_membership(index, k + 1)
        if record and (k + 1) % config.record_every == 0:
            for i in index:
                paths[i].append(x[i].copy())

    return [SgldRunResult(captured_well=int(captured_well[i]) if captured_well[i] >= 0 else None,
                          capture_iteration=int(capture_iteration[i]) if capture_iteration[i] >= 0 else None,
                          diverged=bool(diverged[i]),
                          final_state=x[i].copy(),
                          rng=rngs[i].lineage,
                          trajectory=np.array(paths[i]) if record else None)
            for i in range(runs)]


def sgld_run(landscape: GaussianMixtureLandscape, config: SgldConfig, rng: RngStream) -> SgldRunResult:
    return sgld_batch(landscape, config, [rng])[0]


@dataclass
class FractionPoint:
    temperature: float
    fraction: Optional[float]
    captured_runs: int
    total_runs: int
    diverged_runs: int = 0


def wide_well_fraction(landscape: GaussianMixtureLandscape, temperatures: Sequence[float], runs: int, seed: int,
                       config: SgldConfig = SgldConfig(), logger: Logger = getLogger()) -> list[FractionPoint]:
    """
    Fraction of captured runs that end in the widest well, per temperature. Runs that are never captured are excluded
    from the denominator; the fraction is None when no run is captured.
    """
    if runs < 1:
        raise ConfigError("At least one run per temperature is required", field="parameters.runs")
    if any(t < 0 for t in temperatures):
        raise ConfigError("Temperatures must be non-negative", field="parameters.temperatures")
    wide = landscape.widest_well
    points = []
    for t_index, temperature in enumerate(temperatures):
        rngs = [RngStream(seed, t_index * runs + run) for run in range(runs)]
        results = sgld_batch(landscape, config.with_temperature(temperature), rngs)
        captured = [r for r in results if r.captured]
        n_wide = sum(1 for r in captured if r.captured_well == wide)
        fraction = n_wide / len(captured) if captured else None
        diverged = sum(1 for r in results if r.diverged)
        if diverged:
            logger.warning(f"{diverged} of {runs} runs diverged at temperature {temperature}")
        logger.info(f"T={temperature:.4g}: {len(captured)}/{runs} captured, {n_wide} in the wide well")
        points.append(FractionPoint(float(temperature), fraction, len(captured), runs, diverged))
    return points


def fraction_trend(points: Sequence[FractionPoint]):
    """Spearman rank correlation of the defined fractions against temperature."""
    defined = [p for p in points if p.fraction is not None]
    if len(defined) < 3:
        return None
    result = stats.spearmanr([p.temperature for p in defined], [p.fraction for p in defined])
    return {"spearman_rho": float(result.correlation), "p_value": float(result.pvalue),
            "temperatures_used": len(defined)}


def beta_to_temperature(beta: float, mapping: str = "noise_scale") -> float:
    if mapping == "noise_scale":
        if beta < 0:
            raise ConfigError(f"Noise scale must be non-negative, got {beta}", field="parameters.betas")
        return float(beta)
    if mapping == "inverse":
        if not beta > 0:
            raise ConfigError(f"beta must be positive when mapped to T = 1/beta, got {beta}",
                              field="parameters.betas")
        return 1.0 / beta
    raise ConfigError(f"Unknown beta mapping '{mapping}'", field="parameters.beta_mapping")


@dataclass
class CaptureCurve:
    beta: float
    temperature: float
    iterations: np.ndarray
    fractions: np.ndarray


def capture_fraction_vs_iteration(landscape: GaussianMixtureLandscape, betas: Sequence[float], runs: int, seed: int,
                                  config: SgldConfig = SgldConfig(), mapping: str = "noise_scale") \
        -> list[CaptureCurve]:
    """Cumulative fraction of all runs captured by each iteration, one curve per beta."""
    if runs < 1:
        raise ConfigError("At least one run per beta is required", field="parameters.runs")
    curves = []
    iterations = np.arange(config.iterations + 1)
    for b_index, beta in enumerate(betas):
        temperature = beta_to_temperature(beta, mapping)
        rngs = [RngStream(seed, b_index * runs + run) for run in range(runs)]
        results = sgld_batch(landscape, config.with_temperature(temperature), rngs)
        capture_times = np.array([r.capture_iteration for r in results if r.captured], dtype=int)
        counts = np.searchsorted(np.sort(capture_times), iterations, side="right")
        curves.append(CaptureCurve(float(beta), temperature, iterations, counts / runs))
    return curves
