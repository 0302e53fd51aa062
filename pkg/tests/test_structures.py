import sys
import unittest
from pathlib import Path

import numpy as np

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from geometry.pointwise import PointGeometry
from geometry.spectral import (
    aq_basis,
    cluster_eigenvalues,
    generalized_eigh,
    involutivity_residual,
    involutivity_summary,
    jacobi_eigh,
    spectral_split,
)
from geometry.structures import (
    anc_residual,
    axiom_residual,
    check_axioms,
    n5_tensor,
    nearly_kahler_residual,
    reeb_checks,
    special_tensors,
)
from manifolds.builtins import builtin, builtin_document
from manifolds.fields import load_spec, make_provider
from utils.errors import (
    CommutationError,
    DegenerateMetricError,
    MissingFieldError,
    MultiplicityError,
    NonConstantSpectrum,
    SpecSchemaError,
)
from utils.sampling import sample_points

TOL = 1e-9


def provider_for(name, params=None):
    return make_provider(builtin(name, params or {}))


def para_hermitian_plane():
    doc = {
        "name": "para_plane", "dim": 2, "backend": "chart",
        "fields": {"g": [["1", "0"], ["0", "-1"]], "F": [["0", "-1"], ["1", "0"]],
                   "Q": [["1", "0"], ["0", "1"]]},
    }
    return make_provider(load_spec(doc))


def overscaled_plane():
    doc = {
        "name": "overscaled_a", "dim": 2, "backend": "chart",
        "fields": {"g": [["1", "0"], ["0", "1"]], "F": [["0", "2"], ["-2", "0"]],
                   "Q": [["1", "0"], ["0", "1"]]},
    }
    return make_provider(load_spec(doc))


def noncommuting_plane():
    doc = {
        "name": "skewed_q", "dim": 2, "backend": "chart",
        "fields": {"g": [["1", "0"], ["0", "1"]], "F": [["0", "1"], ["-1", "0"]],
                   "Q": [["1", "0"], ["0", "2"]]},
    }
    return make_provider(load_spec(doc))


class TestAxioms(unittest.TestCase):
    def test_flat_kahler_is_weak_hermitian(self):
        with self.assertLogs("geometry.structures", "DEBUG") as logs:
            ax = check_axioms(provider_for("flat_kahler"), "weak_hermitian", np.zeros(4))
        self.assertIn("weak_hermitian axioms", logs.output[0])
        self.assertLess(axiom_residual(ax), 1e-15)
        self.assertAlmostEqual(ax["q_min_eigenvalue"], 1.0)

    def test_weighted_product_is_weak_hermitian(self):
        p = provider_for("weighted_product", {"factors": ["t2", "k2"], "weights": [1.0, 4.0]})
        ax = check_axioms(p, "weak_hermitian", np.array([1.0, 2.0, 0.1, -0.3]))
        self.assertLess(axiom_residual(ax), 1e-14)
        self.assertEqual(ax["Q_positive"], 0.0)

    def test_line_product_is_weak_acm(self):
        p = provider_for("line_product", {"factor": "s6"})
        pt = np.array([0.3, 0.1, -0.1, 0.2, 0.0, 0.05, -0.15])
        ax = check_axioms(p, "weak_acm", pt)
        self.assertLess(axiom_residual(ax), TOL)
        self.assertIn("A_xi", ax)

    def test_para_hermitian_plane(self):
        p = para_hermitian_plane()
        ax = check_axioms(p, "weak_para_hermitian", np.zeros(2))
        self.assertLess(axiom_residual(ax), 1e-15)
        wrong = check_axioms(p, "weak_hermitian", np.zeros(2))
        self.assertGreater(axiom_residual(wrong), 0.1)

    def test_control_spec_has_point_dependent_q(self):
        # F_01 = x2 makes A^2 = -x2^2 on the first plane
        ax = check_axioms(provider_for("control_noncriterion"), "weak_hermitian", np.array([0.1, 0.1, 0.5, 0.1]))
        self.assertLess(axiom_residual(ax), 1e-15)
        self.assertAlmostEqual(ax["q_min_eigenvalue"], 0.25)

    def test_unknown_kind(self):
        with self.assertRaises(SpecSchemaError):
            check_axioms(provider_for("flat_kahler"), "weak_kahler_einstein", np.zeros(4))

    def test_contact_kind_needs_reeb_field(self):
        with self.assertRaises(MissingFieldError):
            check_axioms(provider_for("flat_kahler"), "weak_acm", np.zeros(4))


class TestNearlyKahler(unittest.TestCase):
    def test_s6_is_nearly_kahler(self):
        p = provider_for("s6")
        for pt in sample_points(p.spec.domain, 6, 42):
            self.assertLess(nearly_kahler_residual(p, pt), TOL)

    def test_control_spec_is_not(self):
        p = provider_for("control_noncriterion")
        self.assertGreater(nearly_kahler_residual(p, np.array([0.2, 0.1, 0.4, 0.3])), 1e-3)

    def test_line_product_is_nearly_cosymplectic(self):
        p = provider_for("line_product", {"factor": "s6"})
        pt = np.array([-0.4, 0.1, 0.2, -0.05, 0.1, 0.0, 0.2])
        geo = PointGeometry(p, pt)
        self.assertLess(anc_residual(p, pt, geo), TOL)
        checks = reeb_checks(p, pt, geo)
        for key, value in checks.items():
            self.assertLess(value, TOL, key)

    def test_special_tensors_vanish_for_identity_q(self):
        p = provider_for("line_product", {"factor": "k4"})
        geo = PointGeometry(p, np.full(5, 0.2))
        tensors = special_tensors(p, geo.point, geo)
        for name, t in tensors.items():
            self.assertLess(np.max(np.abs(t)), 1e-15, name)
        self.assertLess(np.max(np.abs(n5_tensor(geo))), 1e-15)

    def test_n5_matches_finite_differences_with_weighted_q(self):
        base = builtin_document("weighted_product", {"factors": ["s2", "s2"], "weights": [1.0, 4.0]})
        p = make_provider(builtin("line_product", {"spec": base}))
        n = p.dim
        h = 1e-5

        def fields(q):
            g, A, Q = (p.value(name, q).comps for name in ("g", "A", "Q"))
            return A, g @ (Q - np.eye(n))

        largest = 0.0
        for pt in sample_points(p.spec.domain, 3, 42):
            A, hq = fields(pt)
            dA = np.zeros((n, n, n))                     # dA[k, c, m] = d_m A^k_c
            dh = np.zeros((n, n, n))                     # dh[a, b, m] = d_m h_ab
            for m in range(n):
                e = np.zeros(n)
                e[m] = h
                Ap, hp = fields(pt + e)
                Am, hm = fields(pt - e)
                dA[:, :, m] = (Ap - Am) / (2 * h)
                dh[:, :, m] = (hp - hm) / (2 * h)
            expected = np.zeros((n, n, n))
            for a in range(n):
                for b in range(n):
                    for c in range(n):
                        total = 0.0
                        for k in range(n):
                            # (AZ) h(X,Y) - (AY) h(X,Z)
                            total += A[k, c] * dh[a, b, k] - A[k, b] * dh[a, c, k]
                            # h([X,AZ],Y) - h([X,AY],Z)
                            total += dA[k, c, a] * hq[k, b] - dA[k, b, a] * hq[k, c]
                            # h([Y,AZ] - [Z,AY] - A[Y,Z], X)
                            total += (dA[k, c, b] - dA[k, b, c]) * hq[k, a]
                        expected[a, b, c] = total
            N5 = n5_tensor(PointGeometry(p, pt))
            np.testing.assert_allclose(N5, expected, atol=1e-6)
            largest = max(largest, np.max(np.abs(N5)))
        self.assertGreater(largest, 0.1)

    def test_special_tensors_need_contact(self):
        with self.assertRaises(MissingFieldError):
            special_tensors(provider_for("flat_kahler"), np.zeros(4))


class TestSpectral(unittest.TestCase):
    def test_jacobi_matches_numpy(self):
        rng = np.random.default_rng(9)
        M = rng.normal(size=(6, 6))
        S = M + M.T
        w, V = jacobi_eigh(S)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(S), atol=1e-12)
        np.testing.assert_allclose(V.T @ V, np.eye(6), atol=1e-12)
        np.testing.assert_allclose(S @ V, V * w, atol=1e-11)

    def test_generalized_eigenbasis_is_g_orthonormal(self):
        g = np.array([[2.0, 0.3], [0.3, 1.0]])
        Q = np.linalg.solve(g, np.array([[3.0, 0.5], [0.5, 1.5]]))   # g-self-adjoint
        w, E = generalized_eigh(g, Q)
        np.testing.assert_allclose(E.T @ g @ E, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(Q @ E, E * w, atol=1e-12)

    def test_generalized_eigh_needs_definite_metric(self):
        with self.assertRaises(DegenerateMetricError):
            generalized_eigh(np.diag([1.0, -1.0]), np.eye(2))

    def test_cluster(self):
        clusters = cluster_eigenvalues([1.0, 4.0, 1.0 + 1e-9, 4.0])
        self.assertEqual([m for _, m in clusters], [2, 2])
        self.assertAlmostEqual(clusters[0][0], 1.0, places=8)
        self.assertEqual(clusters[1][0], 4.0)

    def test_aq_basis_of_weighted_product(self):
        p = provider_for("weighted_product", {"factors": ["t2", "t2"], "weights": [1.0, 4.0]})
        pt = np.full(4, 1.5)
        basis = aq_basis(p, pt)
        np.testing.assert_allclose(basis.eigenvalues, [1.0, 1.0, 4.0, 4.0], atol=1e-12)
        self.assertEqual(basis.kernel_dim, 0)
        self.assertEqual(basis.spectrum, [(1.0, 2), (4.0, 2)])
        b = p.bundle(pt, 0)
        for key, value in basis.residuals(b["g"].value, b["A"].value, b["Q"].value).items():
            self.assertLess(value, 1e-12, key)

    def test_aq_basis_keeps_reeb_direction(self):
        p = provider_for("line_product", {"factor": "s6"})
        pt = np.array([0.0, 0.1, 0.0, -0.1, 0.2, 0.0, 0.1])
        basis = aq_basis(p, pt)
        self.assertEqual(basis.kernel_dim, 1)
        xi = p.bundle(pt, 0)["xi"].value
        last = basis.vectors[:, -1]
        self.assertAlmostEqual(abs(float(last @ xi)), 1.0, places=10)
        b = p.bundle(pt, 0)
        for key, value in basis.residuals(b["g"].value, b["A"].value, b["Q"].value).items():
            self.assertLess(value, 1e-10, key)

    def test_aq_basis_needs_commuting_fields(self):
        with self.assertRaises(CommutationError):
            aq_basis(noncommuting_plane(), np.zeros(2))

    def test_aq_basis_rejects_a_not_matching_q(self):
        # A^2 = -4 Id while Q = Id: A commutes with Q but the blocks are sqrt(4) J
        with self.assertRaises(MultiplicityError) as ctx:
            aq_basis(overscaled_plane(), np.zeros(2))
        self.assertAlmostEqual(ctx.exception.eigenvalue, 1.0, places=12)
        self.assertIn("a_blocks", str(ctx.exception))

    def test_involutivity_summary_takes_worst_point(self):
        p = provider_for("weighted_product", {"factors": ["s2", "t2"], "weights": [1.0, 4.0]})
        pts = sample_points(p.spec.domain, 6, 42)
        split = spectral_split(p, pts)
        summary = involutivity_summary(split, p, pts)
        self.assertEqual(list(summary), list(split.eigenvalues))
        for i, value in enumerate(split.eigenvalues):
            for key in ("bracket", "geodesic"):
                per_point = [involutivity_residual(split, p, pt)[i][key] for pt in pts]
                self.assertEqual(summary[value][key], max(per_point))
                self.assertLess(summary[value][key], 1e-12)

    def test_split_of_weighted_product(self):
        p = provider_for("weighted_product", {"factors": ["t2", "t2"], "weights": [1.0, 4.0]})
        pts = sample_points(p.spec.domain, 16, 42)
        split = spectral_split(p, pts)
        self.assertEqual(split.k, 2)
        np.testing.assert_allclose(split.eigenvalues, [1.0, 4.0])
        self.assertEqual(split.multiplicities, (2, 2))
        P0 = split.projector(0, p.bundle(pts[0], 0)["Q"].value)
        np.testing.assert_allclose(P0, np.diag([1.0, 1.0, 0.0, 0.0]), atol=1e-14)
        for row in involutivity_residual(split, p, pts[3]):
            self.assertLess(row["bracket"], 1e-14)
            self.assertLess(row["geodesic"], 1e-14)

    def test_drifting_eigenvalue(self):
        p = provider_for("eigen_drift")
        with self.assertRaises(NonConstantSpectrum) as ctx:
            spectral_split(p, sample_points(p.spec.domain, 16, 42))
        self.assertGreater(ctx.exception.spread, 0.1)

    def test_eigenvalues_too_close(self):
        p = provider_for("weighted_product", {"factors": ["t2", "t2"], "weights": [1.0, 1.00001]})
        with self.assertRaises(MultiplicityError):
            spectral_split(p, sample_points(p.spec.domain, 4, 42))


if __name__ == "__main__":
    unittest.main()
