import io
import json
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from scripts.cli import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, main
from utils.spec_io import load_document

GOLDEN_DIR = BASE_DIR / "tests" / "golden"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


class TestConnectionCommand(unittest.TestCase):
    def test_flat_kahler_golden_table(self):
        code, out, _ = run_cli("connection", "--builtin", "flat_kahler", "--point", "0,0,0,0")
        self.assertEqual(code, EXIT_PASS)
        golden = (GOLDEN_DIR / "flat_kahler_connection.txt").read_text(encoding="utf-8")
        self.assertEqual(out, golden)

    def test_round_sphere_json(self):
        code, out, _ = run_cli("connection", "--builtin", "round_s2", "--point", "1.0,0.2", "--format", "json")
        self.assertEqual(code, EXIT_PASS)
        payload = json.loads(out)
        gam = np.array(payload["Gamma_g"])
        self.assertAlmostEqual(gam[0, 1, 1], -np.sin(1.0) * np.cos(1.0), places=12)
        self.assertAlmostEqual(gam[1, 0, 1], np.cos(1.0) / np.sin(1.0), places=12)
        # dF of a 2-form in dimension 2 vanishes, so Gamma is Levi-Civita
        np.testing.assert_allclose(payload["Gamma"], payload["Gamma_g"], atol=1e-14)

    def test_s6_torsion_table_is_minus_third_dF(self):
        code, out, _ = run_cli("connection", "--builtin", "s6", "--format", "json")
        self.assertEqual(code, EXIT_PASS)
        payload = json.loads(out)
        self.assertEqual(payload["point"], [0.0] * 6)
        np.testing.assert_allclose(payload["T"], -np.array(payload["dF"]) / 3.0, atol=1e-12)
        self.assertGreater(np.max(np.abs(payload["dF"])), 0.1)

    def test_text_rows_list_nonzero_entries(self):
        code, out, _ = run_cli("connection", "--builtin", "s6")
        self.assertEqual(code, EXIT_PASS)
        self.assertTrue(out.startswith("spec: s6_nearly_kahler  point: (0, 0, 0, 0, 0, 0)\n"))
        self.assertIn("[T] torsion T_ijk\n  (0,", out)

    def test_point_outside_domain(self):
        code, _, err = run_cli("connection", "--builtin", "flat_kahler", "--point", "5,0,0,0")
        self.assertEqual(code, EXIT_ERROR)
        self.assertIn("[ERROR]", err)


class TestVerifyCommand(unittest.TestCase):
    def test_s6_hermitian_passes(self):
        code, out, err = run_cli("verify", "--builtin", "s6", "--suite", "hermitian", "--points", "4",
                                 "--format", "json")
        self.assertEqual(code, EXIT_PASS)
        report = json.loads(out)
        self.assertEqual(report["suite"], "hermitian")
        self.assertEqual(report["points"], 4)
        self.assertIn("[INFO] Decision:", err)

    def test_control_fails(self):
        code, out, _ = run_cli("verify", "--builtin", "control_noncriterion", "--suite", "emc", "--points", "4")
        self.assertEqual(code, EXIT_FAIL)
        self.assertIn("fail  skew1", out)

    def test_shipped_spec_by_name(self):
        code, _, _ = run_cli("verify", "--spec", "control_noncriterion", "--suite", "emc", "--points", "4")
        self.assertEqual(code, EXIT_FAIL)

    def test_missing_spec_file(self):
        code, out, err = run_cli("verify", "--spec", "missing.json")
        self.assertEqual(code, EXIT_ERROR)
        self.assertEqual(out, "")
        self.assertIn("not found", err)

    def test_unknown_builtin(self):
        code, _, _ = run_cli("verify", "--builtin", "hyperbolic_plane")
        self.assertEqual(code, EXIT_ERROR)

    def test_spec_and_builtin_are_exclusive(self):
        code, _, _ = run_cli("verify", "--spec", "a.json", "--builtin", "s6")
        self.assertEqual(code, EXIT_ERROR)


class TestOtherCommands(unittest.TestCase):
    def test_generate_then_verify(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / "wp.json")
            code, _, _ = run_cli("generate", "--builtin", "weighted_product", "--factors", "t2,t2",
                                 "--weights", "1,4", "--out", path)
            self.assertEqual(code, EXIT_PASS)
            doc = load_document(path)
            self.assertEqual(doc["fields"]["Q"][2][2], "4.0")
            self.assertEqual(doc["fields"]["Q"][0][0], "1.0")
            code, _, _ = run_cli("verify", "--spec", path, "--suite", "splitting", "--points", "4")
            self.assertEqual(code, EXIT_PASS)

    def test_generate_is_reproducible(self):
        _, first, _ = run_cli("generate", "--builtin", "s6")
        _, second, _ = run_cli("generate", "--builtin", "s6")
        self.assertEqual(first, second)
        self.assertEqual(json.loads(first)["backend"], "embedded")

    def test_basis_of_line_product(self):
        code, out, _ = run_cli("basis", "--builtin", "line_product", "--factor", "s6", "--format", "json")
        self.assertEqual(code, EXIT_PASS)
        payload = json.loads(out)
        self.assertEqual(payload["kernel_dim"], 1)
        self.assertEqual(len(payload["vectors"]), 7)
        self.assertTrue(all(v < 1e-10 for v in payload["residuals"].values()))

    def test_split_commands(self):
        code, out, _ = run_cli("split", "--builtin", "weighted_product", "--factors", "t2,t2",
                               "--weights", "1,4", "--points", "8", "--format", "json")
        self.assertEqual(code, EXIT_PASS)
        payload = json.loads(out)
        self.assertEqual(payload["multiplicities"], [2, 2])
        code, _, err = run_cli("split", "--builtin", "eigen_drift", "--points", "8")
        self.assertEqual(code, EXIT_FAIL)
        self.assertIn("spread", err)

    def test_builtins_listing(self):
        code, out, _ = run_cli("builtins")
        self.assertEqual(code, EXIT_PASS)
        self.assertIn("s6_nearly_kahler", out.split())
        self.assertIn("flat_kahler", out.split())

    def test_no_subcommand(self):
        code, _, _ = run_cli()
        self.assertEqual(code, EXIT_ERROR)


if __name__ == "__main__":
    unittest.main()
