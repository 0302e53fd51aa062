import sys
import unittest
from pathlib import Path

import numpy as np

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from geometry.connections import (
    adjoint_A,
    bianchi_residual,
    covariant_derivative,
    covariant_derivative_pm,
    curvature,
    exterior_derivative_F,
    exterior_derivative_eta,
    levi_civita,
    lie_bracket,
    lie_derivative_A,
    sectional_curvature,
    split_metric,
    torsion_of,
)
from geometry.einstein import einstein_connection
from geometry.nijenhuis import nijenhuis, nijenhuis_via_connection
from geometry.pointwise import PointGeometry
from manifolds.builtins import builtin
from manifolds.fields import make_provider
from utils.errors import MissingFieldError, SingularMatrixError, UnsupportedValence
from utils.jets import Jet
from utils.tensor import TensorValue, residual

S2_POINT = np.array([1.0, 0.2])
S6_POINT = np.array([0.11, -0.07, 0.05, 0.13, -0.02, 0.09])


def provider_for(name, params=None):
    return make_provider(builtin(name, params or {}))


class TestLeviCivita(unittest.TestCase):
    def test_flat_space_has_zero_coefficients(self):
        p = provider_for("flat_kahler")
        gam = levi_civita(p).at(np.zeros(4))
        self.assertEqual(gam.shape, (4, 4, 4))
        self.assertLess(np.max(np.abs(gam)), 1e-15)

    def test_round_sphere_coefficients(self):
        p = provider_for("round_s2")
        gam = levi_civita(p).at(S2_POINT)
        s, c = np.sin(S2_POINT[0]), np.cos(S2_POINT[0])
        self.assertAlmostEqual(gam[0, 1, 1], -s * c, places=12)
        self.assertAlmostEqual(gam[1, 0, 1], c / s, places=12)
        self.assertAlmostEqual(gam[1, 1, 0], c / s, places=12)
        self.assertAlmostEqual(gam[0, 0, 0], 0.0, places=12)

    def test_levi_civita_is_metric_and_torsion_free(self):
        p = provider_for("round_s2", {"radius": 1.5})
        conn = levi_civita(p)
        Dg = covariant_derivative(conn, "g", S2_POINT)
        self.assertEqual(Dg.valence, (0, 3))
        self.assertLess(np.max(np.abs(Dg.comps)), 1e-12)
        T, T_cov = torsion_of(conn, S2_POINT)
        self.assertLess(np.max(np.abs(T_cov.comps)), 1e-15)

    def test_sphere_sectional_curvature(self):
        for radius in (1.0, 2.0):
            p = provider_for("round_s2", {"radius": radius})
            R = curvature(levi_civita(p), S2_POINT).comps
            g = p.value("g", S2_POINT).comps
            self.assertAlmostEqual(sectional_curvature(R, g, 0, 1), 1.0 / radius ** 2, places=10)
            self.assertLess(bianchi_residual(R), 1e-10)

    def test_embedded_s6_is_unit_sphere(self):
        geo = PointGeometry(provider_for("s6"), S6_POINT)
        for a, b in ((0, 1), (2, 5), (3, 4)):
            self.assertAlmostEqual(sectional_curvature(geo.R_g, geo.g, a, b), 1.0, places=8)

    def test_unsupported_valence(self):
        p = provider_for("flat_kahler")
        x = Jet.constant(np.zeros((4, 4, 4, 4)), 4, 1)
        with self.assertRaises(UnsupportedValence):
            covariant_derivative(levi_civita(p), x, np.zeros(4), valence=(1, 3))

    def test_plus_minus_agree_for_symmetric_connection(self):
        p = provider_for("round_s2")
        plus, minus = covariant_derivative_pm(levi_civita(p), "A", S2_POINT)
        np.testing.assert_allclose(plus.comps, minus.comps, atol=1e-13)

    def test_plus_minus_differ_by_torsion_on_s6(self):
        p = provider_for("s6")
        conn = einstein_connection(p)
        T, _ = torsion_of(conn, S6_POINT)
        T = T.comps
        rng = np.random.default_rng(11)
        fields = {"A": p.jet("A", S6_POINT, 1),
                  "shifted": Jet.constant(rng.normal(size=(6, 6)), 6, 1) + p.jet("A", S6_POINT, 1)}
        for label, a in fields.items():
            plus, minus = covariant_derivative_pm(conn, a, S6_POINT)
            av = a.value
            expected = np.zeros((6, 6, 6))
            for m in range(6):
                for i in range(6):
                    for j in range(6):
                        expected[m, i, j] = sum(T[i, q, m] * av[q, j] - T[q, j, m] * av[i, q]
                                                for q in range(6))
            np.testing.assert_allclose(plus.comps - minus.comps, expected, atol=1e-11, err_msg=label)
        self.assertGreater(np.max(np.abs(T)), 0.1)


class TestBrackets(unittest.TestCase):
    def test_lie_bracket_of_linear_fields(self):
        x, y = Jet.coordinates([0.3, 0.5], 2)
        zero = Jet.constant(0.0, 2, 2)
        X = Jet.stack([y, zero], (2,))
        Y = Jet.stack([zero, x], (2,))
        br = lie_bracket(X, Y)
        np.testing.assert_allclose(br.comps, [-0.3, 0.5])

    def test_lie_bracket_matches_finite_differences_on_s6(self):
        p = provider_for("s6")

        def column(c):
            return lambda q, order: p.jet("A", q, order)[:, c]

        def value(c, q):
            return p.value("A", q).comps[:, c]

        h = 1e-5
        largest = 0.0
        for a, c in ((0, 1), (2, 5), (3, 0)):
            br = lie_bracket(column(a), column(c), S6_POINT).comps
            X, Y = value(a, S6_POINT), value(c, S6_POINT)
            dX = np.zeros((6, 6))
            dY = np.zeros((6, 6))
            for s in range(6):
                e = np.zeros(6)
                e[s] = h
                dX[:, s] = (value(a, S6_POINT + e) - value(a, S6_POINT - e)) / (2 * h)
                dY[:, s] = (value(c, S6_POINT + e) - value(c, S6_POINT - e)) / (2 * h)
            expected = dY @ X - dX @ Y
            np.testing.assert_allclose(br, expected, atol=1e-7)
            largest = max(largest, np.max(np.abs(br)))
        self.assertGreater(largest, 1e-3)

    def test_lie_derivative_of_constant_structure(self):
        p = provider_for("line_product", {"factor": "k4"})
        b = p.bundle(np.full(5, 0.1), 1)
        self.assertLess(np.max(np.abs(lie_derivative_A(b["A"], b["xi"]))), 1e-15)

    def test_exterior_derivative_of_control_form(self):
        p = provider_for("control_noncriterion")
        dF = exterior_derivative_F(p, np.full(4, 0.2)).comps
        # F_01 = x2, so dF_012 = d_2 F_01 = 1
        self.assertAlmostEqual(dF[0, 1, 2], 1.0)
        self.assertAlmostEqual(dF[2, 0, 1], 1.0)
        self.assertAlmostEqual(dF[1, 0, 2], -1.0)

    def test_reeb_form_is_closed_on_line_product(self):
        p = provider_for("line_product", {"factor": "s6"})
        deta = exterior_derivative_eta(p, np.full(7, 0.05)).comps
        self.assertEqual(deta.shape, (7, 7))
        self.assertLess(np.max(np.abs(deta)), 1e-15)
        with self.assertRaises(MissingFieldError):
            exterior_derivative_eta(provider_for("flat_kahler"), np.zeros(4))


class TestMetricSplit(unittest.TestCase):
    def test_split_and_adjoint(self):
        p = provider_for("control_noncriterion")
        pt = np.array([0.1, 0.1, 0.5, 0.1])
        g, F = split_metric(p, pt)
        np.testing.assert_allclose(g.comps, np.eye(4))
        self.assertAlmostEqual(F.comps[0, 1], 0.5)
        np.testing.assert_allclose(F.comps, -F.comps.T)
        A = adjoint_A(g, F)
        self.assertEqual(A.valence, (1, 1))
        np.testing.assert_allclose(A.comps, p.value("A", pt).comps, atol=1e-15)

    def test_adjoint_needs_invertible_metric(self):
        g = TensorValue(2, (0, 2), np.zeros((2, 2)))
        F = TensorValue(2, (0, 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
        with self.assertLogs("geometry.connections", "WARNING") as logs:
            with self.assertRaises(SingularMatrixError):
                adjoint_A(g, F)
        self.assertIn("condition number", logs.output[0])


class TestNijenhuis(unittest.TestCase):
    def test_flat_kahler_is_integrable(self):
        p = provider_for("flat_kahler", {"dim": 6})
        pt = np.full(6, 0.3)
        g = p.value("g", pt).comps
        N = nijenhuis(p.jet("A", pt, 1), pt, g)
        self.assertLess(np.max(np.abs(N.comps)), 1e-15)

    def test_nearly_kahler_sphere(self):
        geo = PointGeometry(provider_for("s6"), S6_POINT)
        N = geo.N_A
        self.assertGreater(np.max(np.abs(N)), 0.1)
        # totally skew
        self.assertLess(residual(N, np.transpose(N, (1, 0, 2))), 1e-10)
        self.assertLess(residual(N, np.transpose(N, (0, 2, 1))), 1e-10)
        L = geo.L_g
        self.assertLess(residual(L, np.transpose(L, (1, 0, 2))), 1e-10)

    def test_connection_formula_matches_coordinates(self):
        geo = PointGeometry(provider_for("s6"), S6_POINT)
        zero = np.zeros((6, 6, 6))
        via_lc = nijenhuis_via_connection(geo.A, geo.nabla_g("A"), zero, geo.g)
        self.assertLess(residual(via_lc, -geo.N_A), 1e-10)
        via_e = nijenhuis_via_connection(geo.A, geo.nabla_e("A"), geo.T_vec, geo.g)
        self.assertLess(residual(via_e, -geo.N_A), 1e-10)

    def test_missing_contact_field(self):
        geo = PointGeometry(provider_for("flat_kahler"), np.zeros(4))
        with self.assertRaises(MissingFieldError):
            _ = geo.xi
        with self.assertRaises(MissingFieldError):
            _ = geo.deta


if __name__ == "__main__":
    unittest.main()
