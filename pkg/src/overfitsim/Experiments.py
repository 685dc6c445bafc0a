###############################################################################
# Experiment runners. Each experiment kind maps a resolved config to in-memory
# tables and a summary; artifacts are written only after the run succeeds.
# OVERFITSIM project
# License: GPL v3
###############################################################################
import math
import os
import platform
import time
from dataclasses import dataclass, field
from logging import Logger, getLogger
from typing import Callable, Optional

import numpy as np
import scipy

from overfitsim.Branching import RateParams, SuppressionConfig, narrow_peak_suppression_experiment, suppression_run
from overfitsim.Eyring import Region, barrier_height_1d, basin_region_1d, empirical_escape_rate, escapes_faster, \
    landscape_energy, predicted_rate_ratio, reflecting_envelope, saddle_slab
from overfitsim.GanDynamics import bilinear_example_run, max_bilinear_error, radius_drift, sample_data, simulate_gan
from overfitsim.Landscape import GaussianMixtureLandscape
from overfitsim.PredatorPrey import InteractionParams, classify_regime, limiting_oscillation_solve, simulate
from overfitsim.Regression import FitReport, compare_methods, load_dataset, split_stability_band
from overfitsim.SdeCore import GridSpec, RngStream, fokker_planck_evolve, gaussian_bump, gibbs_density
from overfitsim.Sgld import SgldConfig, capture_fraction_vs_iteration, fraction_trend, wide_well_fraction
from overfitsim.utils.AdvancedConfig import get_output_folder, get_version, validate_config
from overfitsim.utils.Formatting import config_hash, format_time, write_csv, write_json, write_jsonl
from overfitsim.utils.SimulationErrors import ConfigError, DimensionError

INTERACTION_KEYS = ("A", "l", "c", "C", "sigma", "alpha_y")


@dataclass
class Table:
    filename: str
    header: list
    rows: list


@dataclass
class ExperimentOutput:
    tables: list = field(default_factory=list)
    event_logs: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


@dataclass
class RunRecord:
    name: str
    experiment: str
    config_hash: str
    seed: int
    run_directory: str
    versions: dict
    wall_clock_seconds: float
    artifacts: list
    config: dict
    defaults_applied: int
    status: str = "ok"


def _landscape(config: dict, logger: Logger) -> GaussianMixtureLandscape:
    return GaussianMixtureLandscape.from_config(config["landscape"], logger)


def _interaction(parameters: dict) -> InteractionParams:
    return InteractionParams(**{key: float(parameters[key]) for key in INTERACTION_KEYS})


def _sgld_config(parameters: dict) -> SgldConfig:
    return SgldConfig(step_size=parameters["step_size"], iterations=parameters["iterations"],
                      patience=parameters["patience"], x0=tuple(parameters["x0"]))


def run_sgld_fraction(config: dict, logger: Logger) -> ExperimentOutput:
    landscape = _landscape(config, logger)
    p = config["parameters"]
    points = wide_well_fraction(landscape, p["temperatures"], p["runs"], config["seed"], _sgld_config(p), logger)
    rows = [(pt.temperature, pt.fraction, pt.captured_runs, pt.total_runs, pt.diverged_runs) for pt in points]
    summary = {"wide_well": landscape.widest_well, "narrow_well": landscape.narrowest_well,
               "trend": fraction_trend(points)}
    return ExperimentOutput([Table("wide_well_fraction.csv",
                                   ["temperature", "fraction", "captured_runs", "total_runs", "diverged_runs"], rows)],
                            summary=summary)


def run_sgld_capture_curve(config: dict, logger: Logger) -> ExperimentOutput:
    landscape = _landscape(config, logger)
    p = config["parameters"]
    curves = capture_fraction_vs_iteration(landscape, p["betas"], p["runs"], config["seed"], _sgld_config(p),
                                           p["beta_mapping"])
    rows = [(curve.beta, int(k), fraction) for curve in curves
            for k, fraction in zip(curve.iterations, curve.fractions)]
    summary = {"final_fraction": [{"beta": curve.beta, "temperature": curve.temperature,
                                   "fraction": float(curve.fractions[-1])} for curve in curves]}
    return ExperimentOutput([Table("capture_curve.csv", ["beta", "iteration", "fraction"], rows)], summary=summary)


def run_fp_verify(config: dict, logger: Logger) -> ExperimentOutput:
    p = config["parameters"]
    temperature = p["temperature"]
    if config["landscape"] is None:
        barrier = p["barrier"]
        dimension = 1

        def potential(points):
            return barrier * (points[:, 0] ** 2 - 1.0) ** 2
    else:
        landscape = _landscape(config, logger)
        dimension = landscape.dimension
        if dimension > 2:
            raise DimensionError("Fokker-Planck verification runs on 1D or 2D landscapes", field="landscape")
        potential = landscape_energy(landscape)
    grid = GridSpec((p["lower"],) * dimension, (p["upper"],) * dimension, (p["nodes"],) * dimension)
    gibbs = gibbs_density(potential, 1.0 / temperature, grid)

    def tracked(start):
        rows = [(0, 0.0, start.l1_distance(gibbs), start.mass())]

        def callback(step, density):
            if step % p["record_every"] == 0 or step == p["steps"]:
                rows.append((step, step * p["dt"], density.l1_distance(gibbs), density.mass()))

        final = fokker_planck_evolve(start, potential, temperature, p["dt"], p["steps"], callback, logger)
        return final, rows

    _, stationary_rows = tracked(gibbs)
    bump_center = [p["lower"] + 0.25 * (p["upper"] - p["lower"])] * dimension
    relaxed, relaxation_rows = tracked(gaussian_bump(grid, bump_center, p["relaxation_width"]))
    summary = {"max_l1_drift": max(row[2] for row in stationary_rows),
               "max_mass_change": max(abs(row[3] - stationary_rows[0][3]) for row in stationary_rows),
               "relaxation_final_l1": relaxation_rows[-1][2],
               "gibbs_mean": gibbs.mean().tolist(), "relaxed_mean": relaxed.mean().tolist()}
    columns = ["step", "t", "l1_to_gibbs", "mass"]
    return ExperimentOutput([Table("stationarity.csv", columns, stationary_rows),
                             Table("relaxation.csv", columns, relaxation_rows),
                             Table("gibbs_density.csv", gibbs.header(), list(gibbs.to_rows()))], summary=summary)


def run_eyring_mfpt(config: dict, logger: Logger) -> ExperimentOutput:
    landscape = _landscape(config, logger)
    p = config["parameters"]
    wells = p["wells"]
    if any(w >= len(landscape) for w in wells):
        raise ConfigError(f"Well indices {wells} exceed the {len(landscape)} wells of the landscape",
                          field="parameters.wells")
    domain = reflecting_envelope(landscape, p["well_radius"]) if p["reflect"] else None
    estimates = {}
    rows = []
    for t_index, temperature in enumerate(p["temperatures"]):
        for w_index, well in enumerate(wells):
            estimate = empirical_escape_rate(landscape, well, temperature, p["runs"], p["max_steps"], p["dt"],
                                             config["seed"], t_index * len(wells) + w_index, domain, logger)
            estimates[(temperature, well)] = estimate
            rows.append((well, temperature, estimate.mfpt_mean, estimate.mfpt_se, estimate.runs,
                         estimate.escaped_runs, estimate.censored))

    comparisons = []
    if landscape.dimension == 1 and len(wells) >= 2:
        first, second = wells[0], wells[1]
        saddle_position, saddle_energy = barrier_height_1d(landscape, first, second)
        energy = landscape_energy(landscape)
        well_energy = float(-landscape.eval_many(landscape.centers[[first]])[0])
        first_region = basin_region_1d(landscape, first, p["well_radius"], saddle_position)
        second_region = basin_region_1d(landscape, second, p["well_radius"], saddle_position)
        span = Region((float(landscape.centers[:, 0].min()),), (float(landscape.centers[:, 0].max()),))
        saddle = saddle_slab(span, 0, saddle_position, p["saddle_half_width"])
        for temperature in p["temperatures"]:
            beta = 1.0 / temperature
            first_estimate, second_estimate = estimates[(temperature, first)], estimates[(temperature, second)]
            rate_first, rate_second = first_estimate.rate, second_estimate.rate
            comparisons.append({
                "theta": temperature,
                "beta_barrier": beta * (saddle_energy - well_energy),
                "predicted_ratio": predicted_rate_ratio(energy, first_region, second_region, saddle, beta,
                                                        p["quadrature_nodes"]),
                "empirical_ratio": rate_first / rate_second if rate_first and rate_second else None,
                "faster_p_value": escapes_faster(first_estimate, second_estimate)
                if min(first_estimate.escaped_runs, second_estimate.escaped_runs) > 1 else None,
                "censored": first_estimate.censored or second_estimate.censored})
    arrhenius = []
    temperatures = p["temperatures"]
    if landscape.dimension == 1 and len(temperatures) >= 2 and len(wells) >= 2:
        _, saddle_energy = barrier_height_1d(landscape, wells[0], wells[1])
        well = wells[0]
        barrier = saddle_energy - float(-landscape.eval_many(landscape.centers[[well]])[0])
        for low, high in zip(temperatures[:-1], temperatures[1:]):
            rate_low, rate_high = estimates[(low, well)].rate, estimates[(high, well)].rate
            arrhenius.append({"well": well, "theta_pair": [low, high],
                              "empirical_ratio": rate_low / rate_high if rate_low and rate_high else None,
                              "arrhenius_ratio": math.exp(-(1.0 / low - 1.0 / high) * barrier)})
    return ExperimentOutput([Table("escape_rates.csv", ["well", "theta", "mfpt_mean", "mfpt_se", "runs",
                                                        "escaped_runs", "censored"], rows)],
                            summary={"rate_ratios": comparisons, "arrhenius": arrhenius})


def run_gan_trajectory(config: dict, logger: Logger) -> ExperimentOutput:
    p = config["parameters"]
    sample = sample_data(p["data_mean"], p["data_std"], p["sample_size"], RngStream(config["seed"], 0))
    trajectory = simulate_gan(p["x0"], p["y0"], sample, p["temperature"], p["dt"], p["steps"],
                              RngStream(config["seed"], 1), p["record_every"], p["gradient"], logger)
    final = trajectory.values[-1]
    summary = {"initial_kl": float(trajectory.kl[0]), "final_kl": float(trajectory.kl[-1]),
               "final_value": {"V": final.V, "V1": final.V1, "V2": final.V2},
               "final_x": trajectory.x[-1].tolist(), "final_y": trajectory.y[-1].tolist()}
    return ExperimentOutput([Table("gan_trajectory.csv", trajectory.header(), list(trajectory.rows()))],
                            summary=summary)


def run_bilinear_check(config: dict, logger: Logger) -> ExperimentOutput:
    p = config["parameters"]
    steps = int(round(p["periods"] * 2 * math.pi / (p["omega"] * p["dt"])))
    trajectory = bilinear_example_run(p["omega"], p["x0"], p["y0"], p["dt"], steps)
    refined = bilinear_example_run(p["omega"], p["x0"], p["y0"], p["dt"] / 2, 2 * steps)
    drift, refined_drift = radius_drift(trajectory), radius_drift(refined)
    summary = {"steps": steps, "max_error": max_bilinear_error(trajectory, p["omega"]),
               "radius_drift": drift, "radius_drift_half_step": refined_drift,
               "drift_constant": drift / p["dt"],
               "convergence_ratio": drift / refined_drift if refined_drift > 0 else None}
    logger.info(f"Bilinear example: max error {summary['max_error']:.3g} over {steps} steps")
    rows = [tuple(row) for row in trajectory[::p["record_every"]]]
    return ExperimentOutput([Table("bilinear_trajectory.csv", ["t", "x", "y"], rows)], summary=summary)


def run_predator_prey(config: dict, logger: Logger) -> ExperimentOutput:
    landscape = _landscape(config, logger)
    p = config["parameters"]
    trajectory = simulate(landscape, p["x0"], p["y0"], _interaction(p), p["dt"], p["steps"], p["record_every"],
                          logger)
    label = classify_regime(trajectory, landscape, p["window"])
    print(f"Regime: {label}")
    summary = {"regime": str(label), "kind": label.regime.name, "well": label.well, "source_well": label.source_well,
               "visited_wells": label.visited_wells, "truncated": trajectory.truncated,
               "final_time": float(trajectory.times[-1])}
    return ExperimentOutput([Table("pursuit_trajectory.csv", trajectory.header(landscape.dimension),
                                   list(trajectory.rows()))], summary=summary)


def run_oscillation_solve(config: dict, logger: Logger) -> ExperimentOutput:
    p = config["parameters"]
    params = _interaction(p)
    rows = []
    for theta in p["angles"]:
        solution = limiting_oscillation_solve(p["well_amplitude"], p["well_width"], params, theta, p["scan_points"],
                                              p["tolerance"], logger=logger)
        residual = max(abs(r) for r in solution.residuals) if solution.residuals else None
        rows.append((solution.theta, solution.feasible, solution.R_x, solution.R_y, solution.d, residual))
    summary = {"feasible_angles": [row[0] for row in rows if row[1]]}
    return ExperimentOutput([Table("oscillation.csv", ["theta", "feasible", "R_x", "R_y", "d", "max_residual"],
                                   rows)], summary=summary)


def run_branching(config: dict, logger: Logger) -> ExperimentOutput:
    peaks = _landscape(config, logger)
    p = config["parameters"]
    rates = RateParams(p["generator_death"], p["kappa_rep_disc"], p["kappa_death_disc"], p["kappa_rep_gen"],
                       p["population_cap"])
    suppression = SuppressionConfig(peaks, rates, strength=p["strength"], kernel_range=p["kernel_range"],
                                    floor=p["floor"], temperature=p["temperature"], dt=p["dt"], steps=p["steps"],
                                    initial_disc_per_peak=p["initial_disc_per_peak"],
                                    initial_gen_per_peak=p["initial_gen_per_peak"],
                                    measure_from=p["measure_from"], radius_factor=p["radius_factor"])
    summary = narrow_peak_suppression_experiment(suppression, p["runs"], config["seed"], p["control"], logger)
    example = suppression_run(suppression, True, config["seed"], 0, record_events=True, logger=logger)
    header = ["t", "n_disc", "n_gen"] + [f"mass_{j}" for j in range(len(peaks))]
    return ExperimentOutput([Table("census.csv", header, example.census_rows)],
                            event_logs={"events.jsonl": example.events},
                            summary={"suppression": summary, "narrow_peak": peaks.narrowest_well})


def run_regression(config: dict, logger: Logger) -> ExperimentOutput:
    p = config["parameters"]
    if p["dataset"] is not None and not os.path.isfile(p["dataset"]):
        raise ConfigError(f"Dataset file {p['dataset']} does not exist", field="parameters.dataset")
    dataset = load_dataset(p["dataset"])
    params = _interaction(p)
    reports, curves = compare_methods(dataset, config["seed"], p["train_fraction"], p["learning_rate"],
                                      p["iterations"], params, p["pp_dt"], p["pp_iterations"],
                                      selection=p["pp_selection"], logger=logger)
    curve_rows = [(method, *row) for method, curve in curves.items() for row in curve.rows()]
    tables = [Table("table1.csv", FitReport.header(), [report.row() for report in reports]),
              Table("loss_curves.csv", ["method", "iteration", "train_mse", "test_mse"], curve_rows)]
    by_method = {(r.method, r.degree): r for r in reports}
    gd, pp = by_method[("gd", 2)], by_method[("pp", 2)]
    summary = {"reports": reports, "pp_mse_not_worse": pp.test_mse <= gd.test_mse,
               "pp_accuracy_not_worse": pp.test_accuracy >= gd.test_accuracy}
    if p["stability_splits"]:
        low, high, values = split_stability_band(dataset, config["seed"], p["stability_splits"], p["train_fraction"],
                                                 params, p["pp_dt"], p["pp_iterations"], p["pp_selection"], logger)
        tables.append(Table("stability_band.csv", ["split", "test_mse"], list(enumerate(values))))
        summary["stability_band"] = {"min_test_mse": low, "max_test_mse": high}
    return ExperimentOutput(tables, summary=summary)


RUNNERS: dict[str, Callable[[dict, Logger], ExperimentOutput]] = {
    "sgld_fraction": run_sgld_fraction,
    "sgld_capture_curve": run_sgld_capture_curve,
    "fp_verify": run_fp_verify,
    "eyring_mfpt": run_eyring_mfpt,
    "gan_trajectory": run_gan_trajectory,
    "bilinear_check": run_bilinear_check,
    "predator_prey": run_predator_prey,
    "oscillation_solve": run_oscillation_solve,
    "branching": run_branching,
    "regression": run_regression,
}


def versions():
    return {"overfitsim": get_version(), "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def run_directory(config: dict, digest: str, output_root: Optional[str] = None):
    root = output_root or config["output_directory"] or get_output_folder()
    return os.path.join(root, f"{config['name']}_{digest[:12]}")


def write_artifacts(directory: str, config: dict, digest: str, output: ExperimentOutput):
    comments = {"experiment": config["experiment"], "config_hash": digest, "seed": config["seed"]}
    os.makedirs(directory, exist_ok=True)
    artifacts = []
    for table in output.tables:
        write_csv(os.path.join(directory, table.filename), table.header, table.rows, comments)
        artifacts.append(table.filename)
    for filename, records in output.event_logs.items():
        write_jsonl(os.path.join(directory, filename), records)
        artifacts.append(filename)
    write_json(os.path.join(directory, "summary.json"),
               {"config_hash": digest, "config": config, "summary": output.summary})
    artifacts.append("summary.json")
    return artifacts


def run_experiment(raw_config: dict, output_root: Optional[str] = None, logger: Logger = getLogger()) -> RunRecord:
    """
    Validates, runs and writes one experiment. Nothing is written unless validation and the run both succeed; the
    manifest is written last.
    """
    config, report = validate_config(raw_config, logger)
    digest = config_hash(config)
    kind = config["experiment"]
    print("==============================================================================")
    print(f"Begin {kind} experiment '{config['name']}' (config hash {digest[:12]}, seed {config['seed']})")
    start_t = time.time()
    output = RUNNERS[kind](config, logger)
    run_t = time.time()
    directory = run_directory(config, digest, output_root)
    artifacts = write_artifacts(directory, config, digest, output)
    record = RunRecord(config["name"], kind, digest, config["seed"], directory, versions(), run_t - start_t,
                       artifacts, config, len(report.defaults))
    write_json(os.path.join(directory, "manifest.json"), record)
    print(f"Completed {kind} experiment, artifacts in {directory}")
    print("==============================================================================\n")
    print("*********************************************")
    print(f"* {kind} took:")
    print(format_time(run_t - start_t))
    print("*********************************************")
    logger.info(f"Run record: {directory} with {len(artifacts)} artifacts")
    return record
