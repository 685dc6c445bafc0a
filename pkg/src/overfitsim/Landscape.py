###############################################################################
# Gaussian-mixture optimization landscapes with wells of controlled width.
# OVERFITSIM project
# License: GPL v3
###############################################################################
from dataclasses import dataclass
from logging import Logger, getLogger
from typing import Optional, Sequence

import numpy as np

from overfitsim.utils.SimulationErrors import ConfigError, DimensionError

SEPARATION_FACTOR = 5.0


@dataclass(frozen=True)
class GaussianWell:
    """One well of the mixture. The peak value at the center equals the amplitude, the width sets the basin size."""
    center: np.ndarray
    width: float
    amplitude: float

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if center.ndim != 1:
            raise DimensionError(f"Well center must be a vector, got shape {center.shape}")
        if not np.all(np.isfinite(center)):
            raise ConfigError(f"Well center {center.tolist()} is not finite")
        if not (np.isfinite(self.width) and self.width > 0):
            raise ConfigError(f"Well width must be positive, got {self.width}")
        if not (np.isfinite(self.amplitude) and self.amplitude > 0):
            raise ConfigError(f"Well amplitude must be positive, got {self.amplitude}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @property
    def dimension(self):
        return self.center.shape[0]


class GaussianMixtureLandscape:
    """
    L(x) = sum_j q_j exp(-|x - c_j|^2 / (2 sigma_j^2)), maximized by the dynamics in this package.

    Single points are 1D arrays of the landscape dimension, batches are arrays of shape (n, d).
    """

    def __init__(self, wells: Sequence[GaussianWell], logger: Logger = getLogger()):
        if len(wells) == 0:
            raise ConfigError("A landscape needs at least one well")
        dims = {well.dimension for well in wells}
        if len(dims) != 1:
            raise DimensionError(f"All well centers must share one dimension, got {sorted(dims)}")
        self.wells = tuple(wells)
        self.dimension = dims.pop()
        self.centers = np.stack([well.center for well in self.wells])
        self.widths = np.array([well.width for well in self.wells])
        self.amplitudes = np.array([well.amplitude for well in self.wells])
        self.check_separation(logger)

    @classmethod
    def from_config(cls, config: dict, logger: Logger = getLogger()):
        try:
            wells = [GaussianWell(np.asarray(item["center"], dtype=float), float(item["width"]),
                                  float(item["amplitude"]))
                     for item in config["wells"]]
        except (KeyError, TypeError, ValueError) as error:
            raise ConfigError(f"Malformed landscape specification: {error}", field="landscape") from error
        return cls(wells, logger)

    def to_config(self):
        return {"wells": [{"center": well.center.tolist(), "width": well.width, "amplitude": well.amplitude}
                          for well in self.wells]}

    def __len__(self):
        return len(self.wells)

    def check_separation(self, logger: Logger = getLogger()):
        """Returns True when wells are separated by at least five times the widest width, warns otherwise."""
        if len(self.wells) < 2:
            return True
        gaps = np.linalg.norm(self.centers[:, None, :] - self.centers[None, :, :], axis=-1)
        min_gap = gaps[np.triu_indices(len(self.wells), k=1)].min()
        if min_gap < SEPARATION_FACTOR * self.widths.max():
            msg = f"Wells overlap: minimum center separation {min_gap:.4g} is below {SEPARATION_FACTOR:g} x the " \
                  f"widest width ({self.widths.max():.4g}). Basin membership may be ambiguous."
            logger.warning(msg)
            return False
        return True

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise DimensionError(f"Point of shape {x.shape} does not match landscape dimension {self.dimension}")
        return x

    def _check_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise DimensionError(f"Points of shape {points.shape} do not match landscape dimension {self.dimension}")
        return points

    def _kernels(self, points: np.ndarray):
        offsets = points[:, None, :] - self.centers[None, :, :]
        sq_dist = np.sum(offsets ** 2, axis=-1)
        kernels = np.exp(-sq_dist / (2 * self.widths ** 2))
        return offsets, kernels

    def eval(self, x) -> float:
        return float(self.eval_many(self._check_point(x)[None, :])[0])

    def eval_many(self, points) -> np.ndarray:
        _, kernels = self._kernels(self._check_batch(points))
        return kernels @ self.amplitudes

    def grad(self, x) -> np.ndarray:
        return self.grad_many(self._check_point(x)[None, :])[0]

    def grad_many(self, points) -> np.ndarray:
        offsets, kernels = self._kernels(self._check_batch(points))
        weights = kernels * (self.amplitudes / self.widths ** 2)
        return -np.einsum("nj,njd->nd", weights, offsets)

    def well_membership(self, x) -> Optional[int]:
        index = self.membership_many(self._check_point(x)[None, :])[0]
        return None if index < 0 else int(index)

    def membership_many(self, points, radius_factor: float = 1.0) -> np.ndarray:
        """
        Index of the well whose radius_factor * sigma vicinity contains each point, -1 when none does. Overlaps go to
        the smallest normalized distance, then the smallest index.
        """
        points = self._check_batch(points)
        distances = np.linalg.norm(points[:, None, :] - self.centers[None, :, :], axis=-1)
        normalized = distances / (radius_factor * self.widths)
        inside = normalized <= 1.0
        masked = np.where(inside, normalized, np.inf)
        index = np.argmin(masked, axis=1)
        return np.where(inside.any(axis=1), index, -1)

    def distances_to_centers(self, points) -> np.ndarray:
        points = self._check_batch(points)
        return np.linalg.norm(points[:, None, :] - self.centers[None, :, :], axis=-1)

    @property
    def widest_well(self) -> int:
        return int(np.argmax(self.widths))

    @property
    def narrowest_well(self) -> int:
        return int(np.argmin(self.widths))
