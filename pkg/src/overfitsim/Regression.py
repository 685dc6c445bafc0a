###############################################################################
# Polynomial regression on the vendored wine dataset, fitted by full-batch
# gradient descent or by the predator-prey pursuit in coefficient space.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import csv
import inspect
import itertools
import math
import os
import pathlib
from dataclasses import dataclass, field
from logging import Logger, getLogger
from typing import Optional

import numpy as np

from overfitsim.PredatorPrey import InteractionParams, interaction_force, pursuit_force
from overfitsim.SdeCore import RngStream
from overfitsim.utils.SimulationErrors import ConfigError, DatasetError, FitDivergence

CLASSES = (0, 1, 2)
FEATURE_COUNT = 13
PREDATOR_OFFSET = 0.5
SELECTION_WINDOW = 0.2
SELECTION_RULES = ("window_mean", "lowest_train", "final")
# bounded repulsion in coefficient space; the predator outruns the prey
COEFFICIENT_INTERACTION = InteractionParams(A=0.1, C=0.0, alpha_y=1.0)


def bundled_dataset_path():
    return pathlib.PurePath(inspect.getsourcefile(lambda: 0)).parent / "data" / "wine.csv"


def schema_header(n_features: int = FEATURE_COUNT):
    return [f"f{i}" for i in range(1, n_features + 1)] + ["class"]


@dataclass
class TabularDataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: list = field(default_factory=lambda: schema_header()[:-1])

    def __len__(self):
        return len(self.targets)

    def subset(self, index):
        return TabularDataset(self.features[index], self.targets[index], list(self.feature_names))


def load_dataset(path: str | os.PathLike = None) -> TabularDataset:
    """
    Reads `f1,...,f13,class` rows. A header row is optional but must match the schema when present. Raises
    DatasetError naming the 1-based file row of the first malformed line.
    """
    path = path or bundled_dataset_path()
    expected = schema_header()
    features, targets = [], []
    with open(path, 'r', encoding="utf-8", newline="") as csv_file:
        for row_number, row in enumerate(csv.reader(csv_file), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            cells = [cell.strip() for cell in row]
            if row_number == 1 and not _is_numeric(cells[0]):
                if cells != expected:
                    raise DatasetError(f"Header {cells} does not match the expected schema {expected}", row=1)
                continue
            if len(cells) != len(expected):
                raise DatasetError(f"Row {row_number} has {len(cells)} fields, expected {len(expected)}",
                                   row=row_number)
            try:
                values = [float(cell) for cell in cells[:-1]]
                target = float(cells[-1])
            except ValueError as error:
                raise DatasetError(f"Row {row_number} is not numeric: {error}", row=row_number) from error
            if not all(math.isfinite(v) for v in values) or target not in CLASSES:
                raise DatasetError(f"Row {row_number} has a non-finite feature or a target outside {CLASSES}",
                                   row=row_number)
            features.append(values)
            targets.append(int(target))
    if not targets:
        raise DatasetError(f"Dataset {path} has no data rows")
    if len(targets) < 2:
        raise DatasetError(f"Dataset {path} needs at least 2 rows")
    return TabularDataset(np.array(features), np.array(targets, dtype=int))


def _is_numeric(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def split(dataset: TabularDataset, train_fraction: float = 0.8, seed: int = 0, stream_id: int = 0):
    """Seeded shuffle, floor(fraction * N) rows to train and the rest to test."""
    if not 0 < train_fraction < 1:
        raise ConfigError(f"Train fraction must lie in (0, 1), got {train_fraction}",
                          field="parameters.train_fraction")
    n_train = int(math.floor(train_fraction * len(dataset)))
    if n_train == 0 or n_train == len(dataset):
        raise ConfigError(f"A split of {len(dataset)} rows at fraction {train_fraction} leaves one side empty",
                          field="parameters.train_fraction")
    order = RngStream(seed, stream_id).permutation(len(dataset))
    return dataset.subset(np.sort(order[:n_train])), dataset.subset(np.sort(order[n_train:]))


class Standardizer:
    def __init__(self, data: np.ndarray):
        self.mean = data.mean(axis=0)
        scale = data.std(axis=0)
        self.scale = np.where(scale > 0, scale, 1.0)

    def transform(self, data: np.ndarray) -> np.ndarray:
        return (data - self.mean) / self.scale


class PolynomialExpansion:
    """
    Intercept, standardized features and, for degree 2, every product z_i z_j with i <= j. Non-constant columns are
    standardized again with training statistics. Degree 2 on 13 features gives 1 + 13 + 91 = 105 columns.
    """

    def __init__(self, degree: int, train_features: np.ndarray):
        if degree not in (1, 2):
            raise ConfigError(f"Degree must be 1 or 2, got {degree}", field="parameters.degree")
        self.degree = degree
        self.features = Standardizer(train_features)
        self.terms = Standardizer(self._raw_terms(train_features))

    def _raw_terms(self, features: np.ndarray) -> np.ndarray:
        z = self.features.transform(features)
        columns = [z]
        if self.degree == 2:
            pairs = list(itertools.combinations_with_replacement(range(z.shape[1]), 2))
            columns.append(np.stack([z[:, i] * z[:, j] for i, j in pairs], axis=1))
        return np.concatenate(columns, axis=1)

    def transform(self, features: np.ndarray) -> np.ndarray:
        terms = self.terms.transform(self._raw_terms(features))
        return np.concatenate([np.ones((len(features), 1)), terms], axis=1)

    @property
    def size(self):
        n = len(self.features.mean)
        return 1 + n + (n * (n + 1) // 2 if self.degree == 2 else 0)


@dataclass
class RegressionModel:
    expansion: PolynomialExpansion
    coefficients: np.ndarray
    method: str

    def predict(self, features: np.ndarray) -> np.ndarray:
        return self.expansion.transform(features) @ self.coefficients


@dataclass
class LossCurve:
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)

    def rows(self):
        for i, train in enumerate(self.train):
            yield i, train, self.test[i] if i < len(self.test) else None


def _mse(design: np.ndarray, targets: np.ndarray, w: np.ndarray) -> float:
    residual = design @ w - targets
    return float(residual @ residual / len(targets))


def _mse_gradient(design: np.ndarray, targets: np.ndarray, w: np.ndarray) -> np.ndarray:
    return 2.0 * design.T @ (design @ w - targets) / len(targets)


def _check_finite(w: np.ndarray, loss: float, iteration: int, method: str):
    if not (math.isfinite(loss) and np.all(np.isfinite(w))):
        raise FitDivergence(f"{method} fit diverged at iteration {iteration}; reduce the step size", iteration)


def fit_gd(degree: int, train: TabularDataset, learning_rate: float, iterations: int,
           test: Optional[TabularDataset] = None, logger: Logger = getLogger()):
    """Full-batch gradient descent on mean squared error from zero coefficients; returns the final model."""
    if not learning_rate > 0 or iterations < 0:
        raise ConfigError("fit_gd needs a positive learning rate and a non-negative iteration count")
    expansion = PolynomialExpansion(degree, train.features)
    design = expansion.transform(train.features)
    targets = train.targets.astype(float)
    test_design = expansion.transform(test.features) if test is not None else None
    w = np.zeros(design.shape[1])
    curve = LossCurve()
    for iteration in range(iterations + 1):
        loss = _mse(design, targets, w)
        _check_finite(w, loss, iteration, "Gradient descent")
        curve.train.append(loss)
        if test_design is not None:
            curve.test.append(_mse(test_design, test.targets.astype(float), w))
        if iteration == iterations:
            break
        w = w - learning_rate * _mse_gradient(design, targets, w)
    logger.info(f"GD degree {degree}: final train MSE {curve.train[-1]:.6g}")
    return RegressionModel(expansion, w, f"gd_degree{degree}"), curve


def fit_pp(degree: int, train: TabularDataset, params: InteractionParams, dt: float, iterations: int,
           test: Optional[TabularDataset] = None, selection: str = "window_mean", logger: Logger = getLogger()):
    """
    Pursuit fit: the prey coefficient vector climbs -MSE and is repelled by a predator that starts PREDATOR_OFFSET
    away along the intercept and moves toward the prey at alpha_y. With A = C = alpha_y = 0 the prey path equals
    gradient descent at rate dt.

    The returned coefficients come from the final fifth of the run: the mean prey position there ("window_mean"), the
    prey state with the lowest training MSE ("lowest_train") or the last state ("final"). A predator faster than the
    repulsion overtakes the prey and keeps it oscillating, and the window mean is the centre of that oscillation.
    """
    if not dt > 0 or iterations < 0:
        raise ConfigError("fit_pp needs a positive step and a non-negative iteration count")
    if selection not in SELECTION_RULES:
        raise ConfigError(f"Selection rule must be one of {list(SELECTION_RULES)}, got {selection!r}",
                          field="parameters.pp_selection")
    expansion = PolynomialExpansion(degree, train.features)
    design = expansion.transform(train.features)
    targets = train.targets.astype(float)
    test_design = expansion.transform(test.features) if test is not None else None
    w = np.zeros(design.shape[1])
    predator = w.copy()
    predator[0] += PREDATOR_OFFSET
    curve = LossCurve()
    window_start = int(math.floor(iterations * (1.0 - SELECTION_WINDOW)))
    best_w, best_loss = w.copy(), math.inf
    window_sum = np.zeros_like(w)
    for iteration in range(iterations + 1):
        loss = _mse(design, targets, w)
        _check_finite(w, loss, iteration, "Predator-prey")
        curve.train.append(loss)
        if test_design is not None:
            curve.test.append(_mse(test_design, test.targets.astype(float), w))
        if iteration >= window_start:
            window_sum += w
            if loss < best_loss:
                best_w, best_loss = w.copy(), loss
        if iteration == iterations:
            break
        delta = w - predator
        force = interaction_force(delta, params, logger)
        predator = predator + dt * pursuit_force(delta, params.alpha_y, logger)
        w = w + dt * (-_mse_gradient(design, targets, w) + force)
    selected = {"window_mean": lambda: window_sum / (iterations + 1 - window_start),
                "lowest_train": lambda: best_w,
                "final": lambda: w}[selection]()
    logger.info(f"PP degree {degree}: {selection} selection, train MSE {_mse(design, targets, selected):.6g}")
    return RegressionModel(expansion, selected, f"pp_degree{degree}"), curve


def least_squares(degree: int, train: TabularDataset) -> RegressionModel:
    expansion = PolynomialExpansion(degree, train.features)
    design = expansion.transform(train.features)
    w, *_ = np.linalg.lstsq(design, train.targets.astype(float), rcond=None)
    return RegressionModel(expansion, w, f"lstsq_degree{degree}")


def predicted_classes(predictions: np.ndarray) -> np.ndarray:
    """Round half up, then clamp to the class range."""
    return np.clip(np.floor(predictions + 0.5), CLASSES[0], CLASSES[-1]).astype(int)


@dataclass
class Evaluation:
    mse: float
    accuracy: float


def evaluate(model: RegressionModel, data: TabularDataset) -> Evaluation:
    predictions = model.predict(data.features)
    residual = predictions - data.targets
    accuracy = float(np.mean(predicted_classes(predictions) == data.targets))
    return Evaluation(float(residual @ residual / len(data)), accuracy)


@dataclass
class FitReport:
    method: str
    degree: int
    train_mse: float
    test_mse: float
    test_accuracy: float
    iterations: int

    @staticmethod
    def header():
        return ["method", "degree", "train_mse", "test_mse", "test_accuracy", "iterations"]

    def row(self):
        return self.method, self.degree, self.train_mse, self.test_mse, self.test_accuracy, self.iterations


def compare_methods(dataset: TabularDataset, seed: int, train_fraction: float, learning_rate: float,
                    iterations: int, params: InteractionParams, pp_dt: float, pp_iterations: int,
                    split_stream: int = 0, selection: str = "window_mean", logger: Logger = getLogger()):
    """Linear GD, quadratic GD and quadratic PP on one seeded split. Returns reports and loss curves by method."""
    train, test = split(dataset, train_fraction, seed, split_stream)
    reports, curves = [], {}
    fits = [("gd", 1, lambda: fit_gd(1, train, learning_rate, iterations, test, logger), iterations),
            ("gd", 2, lambda: fit_gd(2, train, learning_rate, iterations, test, logger), iterations),
            ("pp", 2, lambda: fit_pp(2, train, params, pp_dt, pp_iterations, test, selection, logger),
             pp_iterations)]
    for method, degree, fit, budget in fits:
        model, curve = fit()
        train_eval, test_eval = evaluate(model, train), evaluate(model, test)
        reports.append(FitReport(method, degree, train_eval.mse, test_eval.mse, test_eval.accuracy, budget))
        curves[model.method] = curve
    return reports, curves


def split_stability_band(dataset: TabularDataset, seed: int, splits: int, train_fraction: float,
                         params: InteractionParams, pp_dt: float, pp_iterations: int, selection: str = "window_mean",
                         logger: Logger = getLogger()):
    """Quadratic PP test MSE over `splits` seeded splits: (min, max, values)."""
    values = []
    for stream in range(splits):
        train, test = split(dataset, train_fraction, seed, stream)
        model, _ = fit_pp(2, train, params, pp_dt, pp_iterations, None, selection, logger)
        values.append(evaluate(model, test).mse)
    return min(values), max(values), values
