import unittest
from unittest.mock import patch
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

# Add project root to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from typer.testing import CliRunner

from src.cli import app, group_from_spec
from src.config import EXIT_OK, EXIT_FAILURE, EXIT_SCHEMA
from src.logger import setup_logging

FIXTURES = Path(__file__).parent / "fixtures"


class TestCli(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner()
        patcher = patch('src.cli.setup_logging')
        self.mock_logging = patcher.start()
        self.addCleanup(patcher.stop)
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def write(self, name, obj):
        path = self.dir / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
        return str(path)

    def run_report(self, *args, expected_code=EXIT_OK):
        out = self.dir / "report.json"
        result = self.runner.invoke(app, [*args, "-o", str(out)])
        self.assertEqual(result.exit_code, expected_code, result.output)
        return json.loads(out.read_text(encoding="utf-8"))

    def test_prepare(self):
        report = self.run_report("prepare", self.write("f.json", [3, 1]))
        self.assertEqual(report["command"], "prepare")
        self.assertEqual(report["results"], {"mu": 0, "lambda": 1, "distinguished": [3, 1], "unit": [1]})
        report = self.run_report("prepare", self.write("g.json", [9]))
        self.assertEqual((report["results"]["mu"], report["results"]["lambda"]), (2, 0))

    def test_prepare_to_stdout(self):
        path = self.write("f.json", {"schema": "iwalab-element-1", "coefficients": [0, 3, 3, 1]})
        result = self.runner.invoke(app, ["prepare", path])
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        report = json.loads(result.output)
        self.assertEqual(report["results"]["lambda"], 3)
        self.assertEqual(report["schema"], "iwalab-report-1")

    def test_module_cross_check(self):
        report = self.run_report("module", str(FIXTURES / "t_plus_3_module.json"), "--method", "both")
        results = report["results"]
        self.assertEqual(results["crossCheck"], "pass")
        self.assertEqual((results["determinant"]["lambda"], results["determinant"]["mu"]), (1, 0))

    def test_module_not_square(self):
        path = self.write("m.json", {"schema": "iwalab-module-1", "generators": 1, "relations": [[[1], [0, 1]]]})
        result = self.runner.invoke(app, ["module", path, "--method", "determinant"])
        self.assertEqual(result.exit_code, EXIT_FAILURE)

    def test_malformed_input(self):
        path = self.write("bad.json", '{"coefficients": [1, 2,')
        result = self.runner.invoke(app, ["prepare", path])
        self.assertEqual(result.exit_code, EXIT_SCHEMA)

    def test_untagged_document_rejected(self):
        path = self.write("f.json", {"coefficients": [3, 1]})
        result = self.runner.invoke(app, ["prepare", path])
        self.assertEqual(result.exit_code, EXIT_SCHEMA)

    def test_bad_n_range(self):
        result = self.runner.invoke(app, ["--n-range", "four", "check"])
        self.assertEqual(result.exit_code, EXIT_SCHEMA)

    def test_invalid_prime(self):
        result = self.runner.invoke(app, ["--prime", "4", "check"])
        self.assertEqual(result.exit_code, EXIT_FAILURE)

    def test_formula(self):
        record = {"schema": "iwalab-formula-1", "formula": "kida-classical", "degree": 3, "delta": 1, "lambdaBase": 2,
                  "primes": [{"e": 3, "count": 2}]}
        report = self.run_report("formula", self.write("k.json", record))
        self.assertEqual(report["results"], {"lambdaTop": 8, "warnings": []})

    def test_unknown_formula(self):
        result = self.runner.invoke(app, ["formula", self.write("k.json", {"schema": "iwalab-formula-1", "formula": "class-number"})])
        self.assertEqual(result.exit_code, EXIT_SCHEMA)

    def test_anchor_complex(self):
        report = self.run_report("complex", str(FIXTURES / "anchor_complex.json"))
        results = report["results"]
        self.assertEqual(results["lambda"], -3)
        self.assertTrue(results["classification"]["muZero"])
        self.assertEqual(results["kida"]["outcome"], "holds")
        self.assertEqual((results["kida"]["lambdaC"], results["kida"]["lambdaCbar"]), (-3, -1))

    def test_verify_kida_is_deterministic(self):
        args = ["verify-kida", "--group", "3", "--family", "a", "--seeds", "0:4"]
        first = self.run_report(*args)
        second = self.run_report(*args)
        parallel = self.run_report("--jobs", "2", *args)
        self.assertEqual(first, second)
        self.assertEqual(first, parallel)
        self.assertEqual(first["seedRange"], [0, 4])
        self.assertEqual(first["results"]["summary"]["total"], 4)
        self.assertNotIn("violation", first["results"]["summary"]["outcomes"])

    def test_verify_kida_rejects_family(self):
        result = self.runner.invoke(app, ["verify-kida", "--family", "z", "--seeds", "0:1"])
        self.assertEqual(result.exit_code, EXIT_FAILURE)

    def test_check(self):
        result = self.runner.invoke(app, ["check"])
        self.assertEqual(result.exit_code, EXIT_OK, result.output)
        self.assertIn("numpy", result.output)

    def test_group_from_spec(self):
        self.assertEqual(group_from_spec("1", 3).order, 1)
        self.assertEqual(group_from_spec("9", 3).order, 9)
        self.assertEqual(group_from_spec("3x3", 3).order, 9)


class TestLogging(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.addCleanup(self.close_handlers)

    def close_handlers(self):
        for handler in list(logging.getLogger().handlers):
            handler.close()
            logging.getLogger().removeHandler(handler)

    def test_log_file_in_given_directory(self):
        log_file = setup_logging(verbose=True, console_output=False, log_dir=self.dir, run_label="verify-kida-p3")
        logging.getLogger("src.complex").debug("residual profile built")
        for handler in logging.getLogger().handlers:
            handler.flush()
        self.assertTrue(log_file.name.startswith("iwalab_verify-kida-p3_"))
        self.assertIn("[verify-kida-p3] src.complex - residual profile built", log_file.read_text(encoding="utf-8"))

    def test_old_logs_pruned(self):
        for k in range(3):
            stale = self.dir / f"iwalab_old-p3_{k}.log"
            stale.write_text("", encoding="utf-8")
            os.utime(stale, (1000 + k, 1000 + k))
        log_file = setup_logging(console_output=False, log_dir=self.dir, run_label="batch-p3", keep=2)
        self.assertEqual(sorted(f.name for f in self.dir.glob("iwalab_*.log")),
                         sorted([log_file.name, "iwalab_old-p3_2.log"]))

    @patch.dict(os.environ, {"IWALAB_LOG_LEVEL": "warning"})
    def test_console_level_from_environment(self):
        setup_logging(console_output=True, log_dir=self.dir)
        console = [h for h in logging.getLogger().handlers if not isinstance(h, logging.FileHandler)]
        self.assertEqual([h.level for h in console], [logging.WARNING])

    def test_cli_labels_the_run(self):
        runner = CliRunner()
        with patch('src.cli.setup_logging') as mock_logging:
            runner.invoke(app, ["--prime", "5", "check", "--help"])
        self.assertEqual(mock_logging.call_args.kwargs["run_label"], "check-p5")


if __name__ == '__main__':
    unittest.main()
