import sys
import unittest
from pathlib import Path

import numpy as np

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from geometry.connections import exterior_derivative_F, levi_civita
from geometry.einstein import (
    contorsion,
    contorsion_from_torsion,
    einstein_connection,
    einstein_contorsion,
    emc_contorsion_residual,
    general_emc_connection,
)
from geometry.pointwise import PointGeometry
from manifolds.builtins import builtin
from manifolds.fields import make_provider
from utils.errors import TorsionSymmetryError
from utils.sampling import sample_points
from utils.tensor import residual

TOL = 1e-9


def provider_for(name, params=None):
    return make_provider(builtin(name, params or {}))


def random_skew_torsion(n, seed):
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(n, n, n))
    return T - np.transpose(T, (1, 0, 2))


class TestEinsteinConnection(unittest.TestCase):
    def test_flat_kahler_reduces_to_levi_civita(self):
        p = provider_for("flat_kahler")
        conn = einstein_connection(p)
        pt = np.full(4, 0.25)
        self.assertLess(np.max(np.abs(conn.at(pt))), 1e-15)
        self.assertLess(np.max(np.abs(conn.torsion(pt).comps)), 1e-15)
        self.assertLess(np.max(np.abs(contorsion(p, conn, pt).comps)), 1e-15)

    def test_product_of_flat_tori_reduces_to_levi_civita(self):
        p = provider_for("weighted_product", {"factors": ["t2", "t2"], "weights": [1.0, 4.0]})
        pt = np.full(4, 2.0)
        gam = einstein_connection(p).at(pt)
        self.assertLess(np.max(np.abs(gam - levi_civita(p).at(pt))), 1e-14)

    def test_s6_torsion_is_minus_third_dF(self):
        p = provider_for("s6")
        conn = einstein_connection(p)
        for pt in sample_points(p.spec.domain, 8, 42):
            T = conn.torsion(pt).comps
            dF = exterior_derivative_F(p, pt).comps
            self.assertLess(residual(T, dF / 3.0), TOL)
            # totally skew
            self.assertLess(residual(T, np.transpose(T, (0, 2, 1))), TOL)

    def test_s6_satisfies_metricity(self):
        p = provider_for("s6")
        for pt in sample_points(p.spec.domain, 8, 7):
            geo = PointGeometry(p, pt)
            self.assertLess(residual(geo.emc), TOL)
            self.assertLess(residual(emc_contorsion_residual(geo.K, geo.nabla_g("F"), geo.A)), TOL)

    def test_contorsion_closed_form_on_s6(self):
        p = provider_for("s6")
        pt = np.array([0.1, -0.2, 0.05, 0.0, 0.15, -0.1])
        geo = PointGeometry(p, pt)
        K = contorsion(p, einstein_connection(p), pt).comps
        self.assertLess(residual(K, -einstein_contorsion(geo.dF, geo.A)), 1e-10)
        self.assertLess(residual(K, -contorsion_from_torsion(geo.T, geo.A)), 1e-10)

    def test_control_spec_breaks_metricity(self):
        p = provider_for("control_noncriterion")
        geo = PointGeometry(p, np.array([0.3, -0.2, 0.5, 0.1]))
        self.assertGreater(residual(geo.emc), 1e-6)


class TestGeneralEMCConnection(unittest.TestCase):
    def test_zero_torsion_gives_levi_civita(self):
        p = provider_for("round_s2")
        pt = np.array([1.2, 0.3])
        general = general_emc_connection(p, np.zeros((2, 2, 2)))
        np.testing.assert_allclose(general.at(pt), levi_civita(p).at(pt), atol=1e-14)

    def test_minus_third_dF_gives_einstein_connection(self):
        p = provider_for("s6")
        pt = np.array([0.2, 0.1, -0.1, 0.0, 0.05, 0.1])
        dF = exterior_derivative_F(p, pt).comps
        general = general_emc_connection(p, -dF / 3.0)
        gam = general.coefficients(pt, 0).value
        self.assertLess(residual(gam, -einstein_connection(p).at(pt)), 1e-10)

    def test_prescribed_torsion_sets_contorsion(self):
        p = provider_for("flat_kahler")
        pt = np.zeros(4)
        T = random_skew_torsion(4, 5)
        general = general_emc_connection(p, T)
        K = contorsion(p, general, pt).comps
        A = p.value("A", pt).comps
        self.assertLess(residual(K, -contorsion_from_torsion(T, A)), 1e-12)

    def test_torsion_must_be_skew(self):
        p = provider_for("flat_kahler")
        T = np.ones((4, 4, 4))
        with self.assertLogs("geometry.einstein", "DEBUG") as logs:
            with self.assertRaises(TorsionSymmetryError):
                general_emc_connection(p, T).at(np.zeros(4))
        self.assertIn("symmetric part", logs.output[0])


if __name__ == "__main__":
    unittest.main()
