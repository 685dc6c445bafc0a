###############################################################################
# Package settings, user folders, the experiment defaults ledger and config
# schema validation.
# OVERFITSIM project
# License: GPL v3
###############################################################################
# Built in libraries
import argparse
import copy
import enum
import importlib.metadata
import inspect
import json
import math
import os
import pathlib
from dataclasses import dataclass
from importlib.metadata import version
from json import JSONDecodeError
from logging import Logger, getLogger
import textwrap as _textwrap

from dotenv import load_dotenv

# Internal imports
from overfitsim.utils.SimulationErrors import ConfigError

OUTPUT_ROOT_VARIABLE = "OVERFITSIM_OUTPUT_ROOT"


def get_version(package: str = "overfitsim"):
    try:
        return version(package)
    except importlib.metadata.PackageNotFoundError:
        return "dev-build"


def get_default_package_settings(logger: Logger = getLogger()):
    default_package_settings = {"user_data_folder": os.path.expanduser('~')}
    logger.info(f"Default package settings: {default_package_settings}")
    return default_package_settings


def load_from_file(path: str | os.PathLike):
    with open(path, 'r', encoding="utf-8") as sfile:
        settings = json.loads(sfile.read())
    return settings


def get_data_folder():
    return pathlib.PurePath(inspect.getsourcefile(lambda: 0)).parents[1] / "data"


def get_package_settings(logger: Logger = getLogger()):
    config_path = get_data_folder() / "config.json"
    if not os.path.isfile(config_path):
        logger.info(f"No file found at {config_path}, loading default package settings.")
        return get_default_package_settings(logger)
    try:
        logger.debug(f"Attempting to load package settings from {config_path}")
        settings = load_from_file(config_path)
        if not isinstance(settings, dict):
            raise JSONDecodeError("package settings must be a JSON object", "", 0)
        return settings
    except JSONDecodeError:
        logger.exception(f"JSON decode error encountered trying to load package settings from {config_path}, using "
                         f"defaults instead.")
        return get_default_package_settings(logger)


package_settings = get_package_settings()
user_dir = package_settings.get("user_data_folder") or os.path.expanduser('~')
folder_overfitsim_user = os.path.join(user_dir, "overfitsim")
default_folder_config = os.path.join(folder_overfitsim_user, "config")
folder_logs = os.path.join(folder_overfitsim_user, "logs")
folder_default_output = os.path.join(folder_overfitsim_user, "output")


def get_log_folder():
    return folder_logs


def get_config_folder():
    return default_folder_config


def get_output_folder(logger: Logger = getLogger()):
    """The run-directory root: OVERFITSIM_OUTPUT_ROOT from the environment or the config .env file, else the default."""
    load_dotenv(os.path.join(default_folder_config, ".env"), override=False)
    root = os.environ.get(OUTPUT_ROOT_VARIABLE)
    if root:
        logger.debug(f"Output root overridden by {OUTPUT_ROOT_VARIABLE}: {root}")
        return os.path.abspath(os.path.expanduser(root))
    return folder_default_output


def get_experiments_folder():
    return get_data_folder() / "experiments"


class MultilineFormatter(argparse.HelpFormatter):
    def _fill_text(self, text, width, indent):
        text = self._whitespace_matcher.sub(' ', text).strip()
        paragraphs = text.split('|n ')
        multiline_text = ''
        for paragraph in paragraphs:
            formatted_paragraph = _textwrap.fill(paragraph, width, initial_indent=indent, subsequent_indent=indent) + \
                                  '\n'
            multiline_text = multiline_text + formatted_paragraph
        return multiline_text


class Provenance(enum.Enum):
    PUBLISHED = "published value"
    ARTIFACT = "artifact default"


@dataclass(frozen=True)
class Setting:
    """One ledger entry. `kind` names the value check applied during validation."""
    default: object
    provenance: Provenance
    kind: str
    description: str = ""
    choices: tuple = ()


def _setting(default, provenance, kind, description="", choices=()):
    return Setting(default, provenance, kind, description, tuple(choices))


PUBLISHED = Provenance.PUBLISHED
ARTIFACT = Provenance.ARTIFACT

SGLD_LANDSCAPE = {"wells": [{"center": [-5.5, -5.5], "width": 3.0, "amplitude": 1.0 / 9.0},
                            {"center": [3.0, 3.0], "width": 1.5, "amplitude": 1.0 / 2.25}]}
PURSUIT_LANDSCAPE = {"wells": [{"center": [0.0, 0.0], "width": 0.5, "amplitude": 0.25},
                            {"center": [-7.0, -7.0], "width": 2.0, "amplitude": 8.0}]}
ESCAPE_LANDSCAPE = {"wells": [{"center": [-1.5], "width": 0.5, "amplitude": 0.989},
                              {"center": [1.5], "width": 1.0, "amplitude": 1.0}]}
PEAKS_LANDSCAPE = {"wells": [{"center": [-3.0], "width": 0.3, "amplitude": 1.0},
                             {"center": [3.0], "width": 1.0, "amplitude": 1.0}]}

_SGLD_DYNAMICS = {
    "step_size": _setting(0.05, ARTIFACT, "positive", "SGLD learning rate alpha"),
    "iterations": _setting(2000, PUBLISHED, "positive_int", "maximal number of iterations K"),
    "patience": _setting(50, ARTIFACT, "positive_int", "consecutive in-vicinity iterations that declare capture"),
    "x0": _setting([0.0, 0.0], PUBLISHED, "vector", "initial point"),
}

_INTERACTION = {
    "A": _setting(0.3, PUBLISHED, "non_negative", "mid-range repulsion magnitude"),
    "l": _setting(1.0, PUBLISHED, "non_negative", "characteristic intermediate distance"),
    "c": _setting(1e3, PUBLISHED, "non_negative", "sigmoid sharpness"),
    "C": _setting(10.0, PUBLISHED, "non_negative", "Yukawa strength"),
    "sigma": _setting(10.0, PUBLISHED, "non_negative", "Yukawa decay rate"),
    "alpha_y": _setting(0.15, ARTIFACT, "non_negative", "predator pursuit speed"),
}

EXPERIMENT_SETTINGS = {
    "sgld_fraction": {
        "temperatures": _setting([0.8 * i / 14 for i in range(15)], PUBLISHED, "non_negative_list",
                                 "15 temperatures uniformly on [0, 0.8]"),
        "runs": _setting(200, PUBLISHED, "positive_int", "runs per temperature"),
        **_SGLD_DYNAMICS,
    },
    "sgld_capture_curve": {
        "betas": _setting([0.0, 0.75, 1.5, 2.25, 3.0], PUBLISHED, "non_negative_list", "noise levels beta"),
        "beta_mapping": _setting("noise_scale", ARTIFACT, "choice", "how beta maps to temperature",
                                 ("noise_scale", "inverse")),
        "runs": _setting(200, ARTIFACT, "positive_int", "runs per beta"),
        **_SGLD_DYNAMICS,
    },
    "fp_verify": {
        "temperature": _setting(0.5, ARTIFACT, "positive", "diffusion temperature theta"),
        "barrier": _setting(1.0, ARTIFACT, "positive", "double-well height a in f(x) = a (x^2 - 1)^2"),
        "lower": _setting(-2.0, ARTIFACT, "number", "grid lower bound"),
        "upper": _setting(2.0, ARTIFACT, "number", "grid upper bound"),
        "nodes": _setting(201, ARTIFACT, "positive_int", "grid nodes per axis"),
        "dt": _setting(1e-4, ARTIFACT, "positive", "explicit time step"),
        "steps": _setting(10000, PUBLISHED, "positive_int", "evolution steps"),
        "record_every": _setting(1000, ARTIFACT, "positive_int", "steps between L1 checkpoints"),
        "relaxation_width": _setting(0.1, ARTIFACT, "positive", "width of the bump started in the relaxation run"),
    },
    "eyring_mfpt": {
        "temperatures": _setting([0.15, 0.1875], ARTIFACT, "positive_list",
                                 "temperatures with beta * barrier near 5 and 4"),
        "wells": _setting([0, 1], ARTIFACT, "index_list", "wells escaped from"),
        "runs": _setting(500, PUBLISHED, "positive_int", "first-passage runs per well and temperature"),
        "max_steps": _setting(800000, ARTIFACT, "positive_int", "censoring horizon in steps"),
        "dt": _setting(0.01, ARTIFACT, "positive", "Euler-Maruyama step"),
        "quadrature_nodes": _setting(401, ARTIFACT, "positive_int", "free-energy quadrature nodes per axis"),
        "well_radius": _setting(3.0, ARTIFACT, "positive", "well region half width in units of sigma"),
        "saddle_half_width": _setting(0.05, ARTIFACT, "positive", "half width of the saddle slab"),
        "reflect": _setting(True, ARTIFACT, "bool", "reflect walkers at the edge of the well_radius vicinities"),
    },
    "gan_trajectory": {
        "data_mean": _setting(0.0, ARTIFACT, "number", "mean of the Gaussian data sample"),
        "data_std": _setting(1.0, ARTIFACT, "positive", "std of the Gaussian data sample"),
        "sample_size": _setting(200, ARTIFACT, "positive_int", "sample size L"),
        "x0": _setting([1.0, 0.0, 2.0, 0.0], ARTIFACT, "vector", "discriminator start (m, log s, a, b)"),
        "y0": _setting([-2.0, 0.0], ARTIFACT, "vector", "generator start (mu, tau)"),
        "temperature": _setting(0.001, ARTIFACT, "non_negative", "noise temperature theta"),
        "dt": _setting(0.01, ARTIFACT, "positive", "time step"),
        "steps": _setting(2000, ARTIFACT, "positive_int", "steps"),
        "record_every": _setting(20, ARTIFACT, "positive_int", "steps between trajectory rows"),
        "gradient": _setting("analytic", ARTIFACT, "choice", "gradient evaluation",
                             ("analytic", "finite_difference")),
    },
    "bilinear_check": {
        "omega": _setting(1.0, PUBLISHED, "positive", "coupling omega of V = omega x y"),
        "x0": _setting(0.0, PUBLISHED, "number", "discriminator start"),
        "y0": _setting(1.0, PUBLISHED, "number", "generator start"),
        "dt": _setting(1e-4, PUBLISHED, "positive", "Euler step"),
        "periods": _setting(1.0, PUBLISHED, "positive", "integration length in periods"),
        "record_every": _setting(100, ARTIFACT, "positive_int", "steps between trajectory rows"),
    },
    "predator_prey": {
        "x0": _setting([0.5, 0.0], PUBLISHED, "vector", "prey start"),
        "y0": _setting([0.0, 2.0], PUBLISHED, "vector", "predator start"),
        **_INTERACTION,
        "dt": _setting(0.05, ARTIFACT, "positive", "Euler step, used as the learning rate"),
        "steps": _setting(8000, ARTIFACT, "positive_int", "steps"),
        "record_every": _setting(2, ARTIFACT, "positive_int", "steps between trajectory rows"),
        "window": _setting(0.2, ARTIFACT, "fraction", "terminal window share used for classification"),
    },
    "oscillation_solve": {
        "well_amplitude": _setting(8.0, PUBLISHED, "positive", "amplitude q of the wide well"),
        "well_width": _setting(2.0, PUBLISHED, "positive", "width sigma of the wide well"),
        "angles": _setting([math.pi / 18, math.pi / 36, math.pi / 90, math.pi / 180], ARTIFACT, "positive_list",
                           "angles between the predator-prey line and the radial line"),
        **_INTERACTION,
        "scan_points": _setting(400, ARTIFACT, "positive_int", "separation scan resolution"),
        "tolerance": _setting(1e-8, PUBLISHED, "positive", "residual tolerance"),
    },
    "branching": {
        "runs": _setting(200, PUBLISHED, "positive_int", "paired runs"),
        "generator_death": _setting(0.5, ARTIFACT, "non_negative", "generator death rate delta_g"),
        "kappa_rep_disc": _setting(0.3, ARTIFACT, "non_negative", "discriminator replication constant"),
        "kappa_death_disc": _setting(1.0, ARTIFACT, "non_negative", "discriminator death constant"),
        "kappa_rep_gen": _setting(0.25, ARTIFACT, "non_negative", "generator replication constant"),
        "population_cap": _setting(10000, ARTIFACT, "positive_int", "total population cap"),
        "strength": _setting(0.2, ARTIFACT, "non_negative", "pair kernel strength"),
        "kernel_range": _setting(0.3, ARTIFACT, "positive", "pair kernel range"),
        "floor": _setting(1e-3, ARTIFACT, "positive", "likelihood floor inside the log"),
        "temperature": _setting(0.1, ARTIFACT, "non_negative", "diffusion temperature"),
        "dt": _setting(0.01, ARTIFACT, "positive", "time step"),
        "steps": _setting(1000, ARTIFACT, "positive_int", "steps per run"),
        "initial_disc_per_peak": _setting(10, ARTIFACT, "positive_int", "discriminators started at each peak"),
        "initial_gen_per_peak": _setting(3, ARTIFACT, "positive_int", "generators started at each peak"),
        "measure_from": _setting(0.5, ARTIFACT, "fraction", "share of the run skipped before measuring"),
        "radius_factor": _setting(2.0, ARTIFACT, "positive", "census radius in units of sigma"),
        "control": _setting(True, ARTIFACT, "bool", "also run the symmetric-peak control"),
    },
    "regression": {
        "dataset": _setting(None, ARTIFACT, "path", "CSV dataset; the vendored wine snapshot when null"),
        "train_fraction": _setting(0.8, PUBLISHED, "fraction", "train share of the split"),
        "learning_rate": _setting(0.01, ARTIFACT, "positive", "gradient descent rate"),
        "iterations": _setting(5000, ARTIFACT, "positive_int", "gradient descent iterations"),
        "pp_dt": _setting(0.01, ARTIFACT, "positive", "predator-prey step"),
        "pp_iterations": _setting(5000, ARTIFACT, "positive_int", "predator-prey iterations"),
        **_INTERACTION,
        "A": _setting(0.1, ARTIFACT, "non_negative", "mid-range repulsion magnitude in coefficient space"),
        "C": _setting(0.0, ARTIFACT, "non_negative", "Yukawa strength; off in coefficient space"),
        "alpha_y": _setting(1.0, ARTIFACT, "non_negative", "predator pursuit speed, above A so the prey oscillates"),
        "pp_selection": _setting("window_mean", ARTIFACT, "choice", "which prey state of the final fifth is reported",
                                 ("window_mean", "lowest_train", "final")),
        "stability_splits": _setting(20, ARTIFACT, "non_negative_int", "seeded splits in the stability band"),
    },
}

LANDSCAPE_DEFAULTS = {
    "sgld_fraction": (SGLD_LANDSCAPE, ARTIFACT),
    "sgld_capture_curve": (SGLD_LANDSCAPE, ARTIFACT),
    "fp_verify": (None, ARTIFACT),
    "eyring_mfpt": (ESCAPE_LANDSCAPE, ARTIFACT),
    "predator_prey": (PURSUIT_LANDSCAPE, PUBLISHED),
    "branching": (PEAKS_LANDSCAPE, ARTIFACT),
}

TOP_LEVEL_SETTINGS = {
    "seed": _setting(0, ARTIFACT, "non_negative_int", "master seed"),
    "output_directory": _setting(None, ARTIFACT, "path", "run directory root; the output root when null"),
}

TOP_LEVEL_KEYS = {"experiment", "name", "seed", "output_directory", "landscape", "parameters"}
WELL_KEYS = {"center", "width", "amplitude"}


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def check_value(path: str, value, setting: Setting):
    """Raises ConfigError naming `path` when value does not satisfy the ledger entry's kind."""
    kind = setting.kind
    if kind == "number" and not _is_number(value):
        raise ConfigError(f"{path} must be a finite number, got {value!r}", field=path)
    if kind == "positive" and not (_is_number(value) and value > 0):
        raise ConfigError(f"{path} must be a positive number, got {value!r}", field=path)
    if kind == "non_negative" and not (_is_number(value) and value >= 0):
        raise ConfigError(f"{path} must be a non-negative number, got {value!r}", field=path)
    if kind == "fraction" and not (_is_number(value) and 0 <= value < 1):
        raise ConfigError(f"{path} must lie in [0, 1), got {value!r}", field=path)
    if kind == "positive_int" and not (_is_int(value) and value >= 1):
        raise ConfigError(f"{path} must be a positive integer, got {value!r}", field=path)
    if kind == "non_negative_int" and not (_is_int(value) and value >= 0):
        raise ConfigError(f"{path} must be a non-negative integer, got {value!r}", field=path)
    if kind == "bool" and not isinstance(value, bool):
        raise ConfigError(f"{path} must be true or false, got {value!r}", field=path)
    if kind == "choice" and value not in setting.choices:
        raise ConfigError(f"{path} must be one of {list(setting.choices)}, got {value!r}", field=path)
    if kind == "path" and value is not None and not isinstance(value, str):
        raise ConfigError(f"{path} must be a path string or null, got {value!r}", field=path)
    if kind in ("vector", "non_negative_list", "positive_list", "index_list"):
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path} must be a non-empty list, got {value!r}", field=path)
        for i, item in enumerate(value):
            item_path = f"{path}[{i}]"
            if kind == "index_list":
                if not (_is_int(item) and item >= 0):
                    raise ConfigError(f"{item_path} must be a non-negative integer, got {item!r}", field=item_path)
            elif not _is_number(item):
                raise ConfigError(f"{item_path} must be a finite number, got {item!r}", field=item_path)
            elif kind == "non_negative_list" and item < 0:
                raise ConfigError(f"{item_path} must be non-negative, got {item!r}", field=item_path)
            elif kind == "positive_list" and not item > 0:
                raise ConfigError(f"{item_path} must be positive, got {item!r}", field=item_path)


def validate_landscape(landscape):
    if not isinstance(landscape, dict) or set(landscape) != {"wells"}:
        raise ConfigError("landscape must be an object with a single 'wells' list", field="landscape")
    wells = landscape["wells"]
    if not isinstance(wells, list) or not wells:
        raise ConfigError("landscape.wells must be a non-empty list", field="landscape.wells")
    dimension = None
    for i, well in enumerate(wells):
        path = f"landscape.wells[{i}]"
        if not isinstance(well, dict):
            raise ConfigError(f"{path} must be an object", field=path)
        unknown = sorted(set(well) - WELL_KEYS)
        if unknown:
            raise ConfigError(f"Unknown key '{unknown[0]}' in {path}", field=f"{path}.{unknown[0]}")
        missing = sorted(WELL_KEYS - set(well))
        if missing:
            raise ConfigError(f"{path} is missing '{missing[0]}'", field=f"{path}.{missing[0]}")
        check_value(f"{path}.center", well["center"], _setting(None, ARTIFACT, "vector"))
        check_value(f"{path}.width", well["width"], _setting(None, ARTIFACT, "positive"))
        check_value(f"{path}.amplitude", well["amplitude"], _setting(None, ARTIFACT, "positive"))
        if dimension is not None and len(well["center"]) != dimension:
            raise ConfigError(f"{path}.center has dimension {len(well['center'])}, expected {dimension}",
                              field=f"{path}.center")
        dimension = len(well["center"])


@dataclass
class DefaultApplied:
    field: str
    value: object
    provenance: str


@dataclass
class ValidationReport:
    experiment: str
    defaults: list

    def lines(self):
        yield f"valid; {len(self.defaults)} defaults applied"
        for entry in self.defaults:
            yield f"  {entry.field} = {json.dumps(entry.value)} ({entry.provenance})"


def validate_config(raw, logger: Logger = getLogger()):
    """
    Checks an experiment config against the schema. Returns the resolved config (every default filled in) and a
    ValidationReport listing each defaulted parameter with its provenance. Raises ConfigError with a field path.
    """
    if not isinstance(raw, dict):
        raise ConfigError("An experiment config must be a JSON object")
    unknown = sorted(set(raw) - TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"Unknown key '{unknown[0]}'", field=unknown[0])
    kind = raw.get("experiment")
    if kind not in EXPERIMENT_SETTINGS:
        raise ConfigError(f"'experiment' must be one of {sorted(EXPERIMENT_SETTINGS)}, got {kind!r}",
                          field="experiment")
    defaults = []
    resolved = {"experiment": kind}

    name = raw.get("name", kind)
    if not isinstance(name, str) or not name or any(sep in name for sep in ("/", "\\")):
        raise ConfigError(f"name must be a non-empty string without path separators, got {name!r}", field="name")
    resolved["name"] = name

    for key, setting in TOP_LEVEL_SETTINGS.items():
        if key in raw:
            check_value(key, raw[key], setting)
            resolved[key] = raw[key]
        else:
            resolved[key] = copy.deepcopy(setting.default)
            defaults.append(DefaultApplied(key, setting.default, setting.provenance.value))

    if kind in LANDSCAPE_DEFAULTS:
        default_landscape, provenance = LANDSCAPE_DEFAULTS[kind]
        if "landscape" in raw:
            validate_landscape(raw["landscape"])
            resolved["landscape"] = copy.deepcopy(raw["landscape"])
        else:
            resolved["landscape"] = copy.deepcopy(default_landscape)
            if default_landscape is not None:
                defaults.append(DefaultApplied("landscape", default_landscape, provenance.value))
    elif "landscape" in raw:
        raise ConfigError(f"Experiment {kind} does not take a landscape", field="landscape")

    parameters = raw.get("parameters", {})
    if not isinstance(parameters, dict):
        raise ConfigError("parameters must be an object", field="parameters")
    ledger = EXPERIMENT_SETTINGS[kind]
    unknown = sorted(set(parameters) - set(ledger))
    if unknown:
        raise ConfigError(f"Unknown key '{unknown[0]}' for experiment {kind}", field=f"parameters.{unknown[0]}")
    resolved_parameters = {}
    for key, setting in ledger.items():
        path = f"parameters.{key}"
        if key in parameters:
            check_value(path, parameters[key], setting)
            resolved_parameters[key] = copy.deepcopy(parameters[key])
        else:
            resolved_parameters[key] = copy.deepcopy(setting.default)
            defaults.append(DefaultApplied(path, setting.default, setting.provenance.value))
    resolved["parameters"] = resolved_parameters
    logger.debug(f"Config for {kind} resolved with {len(defaults)} defaults")
    return resolved, ValidationReport(kind, defaults)


def load_config(path: str | os.PathLike):
    """Reads a config file; unreadable or malformed files are configuration errors."""
    try:
        return load_from_file(path)
    except (OSError, UnicodeDecodeError) as error:
        raise ConfigError(f"Cannot read config file {path}: {error}") from error
    except JSONDecodeError as error:
        raise ConfigError(f"Config file {path} is not valid JSON: {error}") from error


def resolve_config_path(name_or_path: str):
    """A bundled experiment name resolves to data/experiments/<name>.json; anything else is taken as a path."""
    bundled = get_experiments_folder() / f"{name_or_path}.json"
    if not os.path.exists(name_or_path) and os.path.isfile(bundled):
        return str(bundled)
    return name_or_path


def bundled_experiments():
    folder = get_experiments_folder()
    if not os.path.isdir(folder):
        return []
    return sorted(pathlib.Path(entry).stem for entry in os.listdir(folder) if entry.endswith(".json"))


def ledger_lines():
    for kind, ledger in EXPERIMENT_SETTINGS.items():
        yield f"{kind}:"
        for key, setting in ledger.items():
            yield f"  {key} = {json.dumps(setting.default)} [{setting.provenance.value}] {setting.description}"


def save_output_root(output_root: str, folder_config: str = default_folder_config):
    """Stores the output root override in the config folder's .env file, replacing any earlier value."""
    os.makedirs(folder_config, exist_ok=True)
    env_path = os.path.join(folder_config, ".env")
    try:
        with open(env_path, 'r', encoding="utf-8") as env_file:
            lines = env_file.readlines()
    except IOError:
        lines = []
    new_lines = [(line if line.endswith('\n') else line + '\n') for line in lines
                 if not line.startswith(OUTPUT_ROOT_VARIABLE)]
    new_lines.append(f"{OUTPUT_ROOT_VARIABLE}={output_root}\n")
    with open(env_path, 'w', encoding="utf-8") as env_file:
        env_file.writelines(new_lines)
    return env_path


def cli_config():
    parser = argparse.ArgumentParser(description="A utility to inspect experiment defaults and configure where run "
                                                 "directories are written. Settings changed here are stored for use "
                                                 "in future runs in the config folder: ~/overfitsim/config",
                                     formatter_class=MultilineFormatter)
    parser.add_argument("--show", action="store_true", help="Print the defaults ledger: every experiment parameter "
                                                            "with its default value and provenance tag.")
    parser.add_argument("--output_root", default=None, type=str, help="Folder under which run directories are "
                                                                      "created. Stored as OVERFITSIM_OUTPUT_ROOT in "
                                                                      "the .env file of the config folder.")
    args = parser.parse_args()

    if args.output_root:
        output_root = os.path.abspath(os.path.expanduser(args.output_root))
        env_path = save_output_root(output_root)
        print(f"Output root set to {output_root} in {env_path}")
    if args.show:
        print(f"overfitsim {get_version()}")
        print(f"Output root: {get_output_folder()}")
        for line in ledger_lines():
            print(line)
    if not args.output_root and not args.show:
        parser.print_help()


if __name__ == "__main__":
    cli_config()
