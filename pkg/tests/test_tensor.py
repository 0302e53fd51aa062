import sys
import unittest
from pathlib import Path

import numpy as np

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from utils.errors import SingularMatrixError, SlotMismatch
from utils.jets import Jet
from utils.tensor import (
    TensorValue,
    antisymmetrize,
    contract,
    invert_matrix,
    lower_index,
    raise_index,
    residual,
    slot_apply,
    symmetrize,
    tensor,
    tensor_product,
)


def matrix_jet(point):
    x, y = Jet.coordinates(point, 2)
    cells = [2.0 + x * y, x.sin(), y * 0.5, 3.0 + y * y]
    return Jet.stack(cells, (2, 2))


def matrix_value(point):
    x, y = point
    return np.array([[2.0 + x * y, np.sin(x)], [0.5 * y, 3.0 + y * y]])


class TestJets(unittest.TestCase):
    def test_product_rule(self):
        x, y = Jet.coordinates([0.4, -0.3], 2)
        f = x * x * y
        self.assertAlmostEqual(float(f.value), 0.16 * -0.3)
        np.testing.assert_allclose(f.parts[1], [2 * 0.4 * -0.3, 0.16])
        np.testing.assert_allclose(f.parts[2], [[2 * -0.3, 0.8], [0.8, 0.0]])

    def test_third_order_of_exp(self):
        (x,) = Jet.coordinates([0.2], 3)
        f = (x * 2.0).exp()
        e = np.exp(0.4)
        self.assertAlmostEqual(float(f.parts[3][0, 0, 0]), 8 * e)

    def test_inverse_matches_finite_differences(self):
        p = np.array([0.3, 0.7])
        inv = matrix_jet(p).inv()
        np.testing.assert_allclose(inv.value, np.linalg.inv(matrix_value(p)), atol=1e-14)
        h = 1e-6
        for i in range(2):
            dp = np.zeros(2)
            dp[i] = h
            fd = (np.linalg.inv(matrix_value(p + dp)) - np.linalg.inv(matrix_value(p - dp))) / (2 * h)
            np.testing.assert_allclose(inv.parts[1][..., i], fd, atol=1e-8)

    def test_inverse_of_singular_matrix(self):
        (x,) = Jet.coordinates([0.0], 1)
        m = Jet.stack([x, x, x, x], (2, 2))
        with self.assertRaises(SingularMatrixError):
            m.inv()

    def test_partial_moves_derivative_to_value_axis(self):
        x, y = Jet.coordinates([1.0, 2.0], 2)
        v = Jet.stack([x * y, y], (2,))
        d = v.partial()
        self.assertEqual(d.shape, (2, 2))
        np.testing.assert_allclose(d.value, [[2.0, 1.0], [0.0, 1.0]])
        self.assertEqual(d.order, 1)

    def test_einsum_follows_leibniz(self):
        p = [0.2, -0.5]
        a = matrix_jet(p)
        prod = Jet.einsum("ij,jk->ik", a, a)
        h = 1e-6
        dp = np.array([h, 0.0])
        q = np.asarray(p)
        fd = (matrix_value(q + dp) @ matrix_value(q + dp) - matrix_value(q - dp) @ matrix_value(q - dp)) / (2 * h)
        np.testing.assert_allclose(prod.parts[1][..., 0], fd, atol=1e-8)


class TestTensorValues(unittest.TestCase):
    def test_valence_must_fit_shape(self):
        with self.assertRaises(SlotMismatch):
            TensorValue(3, (1, 1), np.zeros((3, 3, 3)))

    def test_contract_trace(self):
        m = tensor(np.arange(9.0).reshape(3, 3), (1, 1))
        self.assertAlmostEqual(float(contract(m, 0, 0).comps), 0 + 4 + 8)

    def test_product_orders_upper_slots_first(self):
        a = tensor(np.array([1.0, 2.0]), (0, 1))
        b = tensor(np.array([3.0, 5.0]), (1, 0))
        t = tensor_product(a, b)
        self.assertEqual(t.valence, (1, 1))
        # t^k_i = b^k a_i
        self.assertAlmostEqual(float(t.comps[1, 0]), 5.0)

    def test_invert_singular(self):
        with self.assertRaises(SingularMatrixError):
            invert_matrix(tensor(np.ones((2, 2)), (0, 2)))

    def test_lower_then_raise_restores(self):
        rng = np.random.default_rng(3)
        g = np.diag([1.0, 2.0, 4.0])
        t = tensor(rng.normal(size=(3, 3)), (1, 1))
        low = lower_index(t, 0, g)
        self.assertEqual(low.valence, (0, 2))
        back = raise_index(low, 0, np.linalg.inv(g))
        np.testing.assert_allclose(back.comps, t.comps)

    def test_raise_upper_slot_rejected(self):
        t = tensor(np.eye(2), (1, 1))
        with self.assertRaises(SlotMismatch):
            raise_index(t, 0, np.eye(2))

    def test_mixed_variance_alternation_rejected(self):
        t = tensor(np.eye(2), (1, 1))
        with self.assertRaises(SlotMismatch):
            symmetrize(t, [0, 1])

    def test_symmetric_and_antisymmetric_parts(self):
        rng = np.random.default_rng(11)
        t = tensor(rng.normal(size=(3, 3, 3)), (0, 3))
        alt = antisymmetrize(t, [0, 1, 2]).comps
        np.testing.assert_allclose(alt, -np.transpose(alt, (1, 0, 2)), atol=1e-14)
        np.testing.assert_allclose(alt, -np.transpose(alt, (0, 2, 1)), atol=1e-14)
        sym = symmetrize(t, [0, 1]).comps
        np.testing.assert_allclose(sym, np.transpose(sym, (1, 0, 2)), atol=1e-14)

    def test_slot_apply_inserts_endomorphism(self):
        rng = np.random.default_rng(5)
        t = rng.normal(size=(3, 3))
        A = rng.normal(size=(3, 3))
        # t(AX, Y) = A^k_i t_kj
        np.testing.assert_allclose(slot_apply(t, A), np.einsum("ki,kj->ij", A, t))
        np.testing.assert_allclose(slot_apply(t, None, A), np.einsum("kj,ik->ij", A, t))

    def test_residual_is_scale_relative(self):
        a = np.full((2, 2), 1e6)
        self.assertAlmostEqual(residual(a, -a), 0.0)
        self.assertLess(residual(a, -a + 1e-3), 1e-9)
        self.assertAlmostEqual(residual(np.ones(2)), 0.5)


if __name__ == "__main__":
    unittest.main()
