###############################################################################
# Main command line interface for OVERFITSIM
# OVERFITSIM project
# License: GPL v3
###############################################################################
import argparse
import json
import sys

from overfitsim.Experiments import run_experiment
from overfitsim.utils.AdvancedConfig import MultilineFormatter, bundled_experiments, get_log_folder, get_version, \
    load_config, resolve_config_path, validate_config
from overfitsim.utils.SimulationErrors import ConfigError, SimulationException, make_logger


def print_error(error: SimulationException):
    print(json.dumps(error.to_dict(), sort_keys=True))


def cli_main():
    parser = argparse.ArgumentParser(description=f'OVERFITSIM version: {get_version()}\n'
                                                 f' OVERFITSIM runs seeded simulations of learning dynamics on '
                                                 f'multi-well objective landscapes and emits their data as CSV/JSON.',
                                     formatter_class=MultilineFormatter,
                                     epilog="Experiments are described by JSON config files. A bundled experiment "
                                            "can be named instead of a path, e.g. \"overfitsim run fig2\". "
                                            "Exit status is 0 on success, 2 for configuration errors and 3 for "
                                            "runtime faults.|n "
                                            "COMMAND LIST:|n "
                                            "-\toverfitsim-config")
    parser.add_argument('--version', "-v", action='version', version=f"OVERFITSIM {get_version()}")
    parser.add_argument("--verbose", action="store_true", help="Log progress messages to the console.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    run_parser = subparsers.add_parser("run", help="Run an experiment and write its artifacts and manifest.")
    run_parser.add_argument("config", type=str, help="Path to an experiment config, or the name of a bundled one.")
    run_parser.add_argument("--output_root", "-o", type=str, default=None, help="Root folder for the run directory. "
                            "Overrides output_directory in the config and the OVERFITSIM_OUTPUT_ROOT variable.")
    validate_parser = subparsers.add_parser("validate", help="Check a config without running it and list every "
                                                             "defaulted parameter with its provenance.")
    validate_parser.add_argument("config", type=str, help="Path to an experiment config, or a bundled name.")
    subparsers.add_parser("list-experiments", help="List the bundled experiment configs.")

    args = parser.parse_args()
    logger = make_logger("CLILogger", get_log_folder(), "cli_logs.txt", args.verbose)

    if args.command == "list-experiments":
        for name in bundled_experiments():
            print(name)
        sys.exit(0)

    try:
        raw_config = load_config(resolve_config_path(args.config))
        if args.command == "validate":
            _, report = validate_config(raw_config, logger)
            for line in report.lines():
                print(line)
        else:
            record = run_experiment(raw_config, args.output_root, logger)
            print(json.dumps({"status": "ok", "run_directory": record.run_directory,
                              "config_hash": record.config_hash}, sort_keys=True))
    except ConfigError as error:
        logger.error(error.msg)
        print_error(error)
        sys.exit(error.exit_code)
    except SimulationException as error:
        logger.exception(error.msg)
        print_error(error)
        sys.exit(error.exit_code)
    except IOError as error:
        logger.exception(error)
        print(json.dumps({"status": "error", "error": type(error).__name__, "message": str(error)}, sort_keys=True))
        sys.exit(3)
    sys.exit(0)


if __name__ == "__main__":
    cli_main()
