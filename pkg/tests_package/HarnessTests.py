import io
import json
import os
import shutil
import sys
import unittest
from inspect import getsourcefile
from unittest import mock

from overfitsim.CLI import cli_main
from overfitsim.Experiments import run_experiment
from overfitsim.utils.AdvancedConfig import bundled_experiments, get_output_folder, load_config, \
    resolve_config_path, save_output_root, validate_config
from overfitsim.utils.SimulationErrors import ConfigError

tests_folder = os.path.dirname(getsourcefile(lambda: 0))
test_out_folder = os.path.join(tests_folder, "test_files", "temp_harness")

BILINEAR = {"experiment": "bilinear_check", "name": "bilinear_small", "parameters": {"dt": 1e-3}}
GAN = {"experiment": "gan_trajectory", "name": "gan_small", "seed": 11,
       "parameters": {"steps": 5, "record_every": 1, "sample_size": 20}}


class HarnessTestCase(unittest.TestCase):

    def setUp(self) -> None:
        os.makedirs(test_out_folder, exist_ok=True)

    def tearDown(self) -> None:
        shutil.rmtree(test_out_folder, ignore_errors=True)

    def test_bundled_config_defaults(self):
        _, report = validate_config(load_config(resolve_config_path("fig2")))
        self.assertEqual(5, len(report.defaults))
        self.assertEqual("valid; 5 defaults applied", next(report.lines()))

    def test_default_provenance(self):
        resolved, report = validate_config(load_config(resolve_config_path("fig5")))
        self.assertEqual(0.15, resolved["parameters"]["alpha_y"])
        alpha = [entry for entry in report.defaults if entry.field == "parameters.alpha_y"]
        self.assertEqual(1, len(alpha))
        self.assertEqual("artifact default", alpha[0].provenance)

    def test_every_bundled_config_validates(self):
        names = bundled_experiments()
        self.assertIn("fig2", names)
        self.assertIn("table1", names)
        for name in names:
            validate_config(load_config(resolve_config_path(name)))

    def test_errors_name_the_field(self):
        config = {"experiment": "sgld_fraction", "parameters": {"temperatures": [0.0, 0.1, 0.2, -0.3]}}
        with self.assertRaises(ConfigError) as context:
            validate_config(config)
        self.assertEqual("parameters.temperatures[3]", context.exception.field)
        with self.assertRaises(ConfigError) as context:
            validate_config({"experiment": "bilinear_check", "paramters": {}})
        self.assertEqual("paramters", context.exception.field)
        with self.assertRaises(ConfigError) as context:
            validate_config({"experiment": "bilinear_check", "parameters": {"omgea": 1.0}})
        self.assertEqual("parameters.omgea", context.exception.field)
        with self.assertRaises(ConfigError):
            validate_config({"experiment": "gan_trajectory", "landscape": {"wells": []}})

    def test_run_writes_artifacts(self):
        record = run_experiment(BILINEAR, test_out_folder)
        self.assertTrue(os.path.basename(record.run_directory).startswith("bilinear_small_"))
        self.assertEqual(12, len(os.path.basename(record.run_directory)) - len("bilinear_small_"))
        with open(os.path.join(record.run_directory, "manifest.json"), 'r', encoding="utf-8") as manifest_file:
            manifest = json.load(manifest_file)
        self.assertEqual("ok", manifest["status"])
        self.assertEqual(record.config_hash, manifest["config_hash"])
        self.assertIn("bilinear_trajectory.csv", manifest["artifacts"])
        with open(os.path.join(record.run_directory, "bilinear_trajectory.csv"), 'r', encoding="utf-8") as csv_file:
            lines = csv_file.read().splitlines()
        self.assertEqual("# experiment: bilinear_check", lines[0])
        self.assertEqual(f"# config_hash: {record.config_hash}", lines[1])
        self.assertEqual("# seed: 0", lines[2])
        self.assertEqual("t,x,y", lines[3])

    def test_reruns_are_identical(self):
        first = run_experiment(GAN, test_out_folder)
        contents = {}
        for name in ("gan_trajectory.csv", "summary.json"):
            with open(os.path.join(first.run_directory, name), 'rb') as artifact:
                contents[name] = artifact.read()
        second = run_experiment(GAN, test_out_folder)
        self.assertEqual(first.run_directory, second.run_directory)
        for name, content in contents.items():
            with open(os.path.join(second.run_directory, name), 'rb') as artifact:
                self.assertEqual(content, artifact.read())

    def test_invalid_config_writes_nothing(self):
        with self.assertRaises(ConfigError):
            run_experiment({"experiment": "bilinear_check", "parameters": {"dt": -1.0}}, test_out_folder)
        self.assertEqual([], os.listdir(test_out_folder))

    def test_output_root_from_environment(self):
        with mock.patch.dict(os.environ, {"OVERFITSIM_OUTPUT_ROOT": test_out_folder}):
            self.assertEqual(os.path.abspath(test_out_folder), get_output_folder())

    def test_save_output_root(self):
        env_path = save_output_root("/tmp/first", test_out_folder)
        save_output_root("/tmp/second", test_out_folder)
        with open(env_path, 'r', encoding="utf-8") as env_file:
            self.assertEqual(["OVERFITSIM_OUTPUT_ROOT=/tmp/second\n"], env_file.readlines())

    def test_cli_validate(self):
        with mock.patch.object(sys, 'argv', ["overfitsim", "validate", "fig2"]), \
                mock.patch('sys.stdout', new_callable=io.StringIO) as stdout:
            with self.assertRaises(SystemExit) as context:
                cli_main()
        self.assertEqual(0, context.exception.code)
        self.assertIn("valid; 5 defaults applied", stdout.getvalue())

    def test_cli_config_error(self):
        path = os.path.join(test_out_folder, "bad.json")
        with open(path, 'w', encoding="utf-8") as config_file:
            json.dump({"experiment": "bilinear_check", "parameters": {"dt": 0}}, config_file)
        with mock.patch.object(sys, 'argv', ["overfitsim", "validate", path]), \
                mock.patch('sys.stdout', new_callable=io.StringIO) as stdout:
            with self.assertRaises(SystemExit) as context:
                cli_main()
        self.assertEqual(2, context.exception.code)
        error = json.loads(stdout.getvalue())
        self.assertEqual("parameters.dt", error["field"])
        self.assertEqual("ConfigError", error["error"])

    def test_cli_run(self):
        path = os.path.join(test_out_folder, "bilinear.json")
        with open(path, 'w', encoding="utf-8") as config_file:
            json.dump(BILINEAR, config_file)
        output_root = os.path.join(test_out_folder, "runs")
        with mock.patch.object(sys, 'argv', ["overfitsim", "run", path, "-o", output_root]), \
                mock.patch('sys.stdout', new_callable=io.StringIO) as stdout:
            with self.assertRaises(SystemExit) as context:
                cli_main()
        self.assertEqual(0, context.exception.code)
        result = json.loads(stdout.getvalue().strip().splitlines()[-1])
        self.assertEqual("ok", result["status"])
        self.assertTrue(os.path.isfile(os.path.join(result["run_directory"], "manifest.json")))

    def test_cli_list_experiments(self):
        with mock.patch.object(sys, 'argv', ["overfitsim", "list-experiments"]), \
                mock.patch('sys.stdout', new_callable=io.StringIO) as stdout:
            with self.assertRaises(SystemExit) as context:
                cli_main()
        self.assertEqual(0, context.exception.code)
        self.assertIn("fig2", stdout.getvalue().splitlines())


if __name__ == '__main__':
    unittest.main()
