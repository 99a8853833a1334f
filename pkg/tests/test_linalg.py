import os
import sys
import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import DimensionError, DimensionLimitError, NotHermitianError, RangeError
from linalg import (
    Factor,
    complete_basis,
    dagger,
    eig_hermitian,
    hermitian_basis,
    is_unitary,
    ket,
    matrix_from_json,
    matrix_to_json,
    max_dimension,
    partial_trace,
    random_density,
    random_state_vector,
    random_unitary,
    tensor_product,
    unitary_mapping,
)

R = 1.0 / np.sqrt(2.0)


def _projector(v):
    return np.outer(v, np.conj(v))


class TestPartialTrace(unittest.TestCase):

    def test_singlet_reduces_to_maximally_mixed(self):
        """Tracing B out of the singlet gives diag(1/2, 1/2) exactly"""
        singlet = R * (np.kron(ket(0, 2), ket(1, 2)) - np.kron(ket(1, 2), ket(0, 2)))
        rho = partial_trace(_projector(singlet), 2, 2, Factor.FIRST)
        self.assertLess(np.max(np.abs(rho - np.diag([0.5, 0.5]))), 1e-12)

    def test_triplet_zero_reduces_to_maximally_mixed(self):
        """|T0> gives the same reduced state as the singlet"""
        triplet = R * (np.kron(ket(0, 2), ket(1, 2)) + np.kron(ket(1, 2), ket(0, 2)))
        rho = partial_trace(_projector(triplet), 2, 2, Factor.FIRST)
        self.assertLess(np.max(np.abs(rho - np.diag([0.5, 0.5]))), 1e-12)

    def test_product_operator(self):
        """Tr_B(A x B) = Tr(B) A and Tr_A(A x B) = Tr(A) B"""
        a = np.array([[1, 2j], [-2j, 3]], dtype=np.complex128)
        b = np.diag([0.25, 0.5, 0.25]).astype(np.complex128)
        m = np.kron(a, b)
        assert_allclose(partial_trace(m, 2, 3, Factor.FIRST), a, atol=1e-14)
        assert_allclose(partial_trace(m, 2, 3, Factor.SECOND), np.trace(a) * b, atol=1e-14)

    def test_linearity(self):
        """Tr_B(c1 M1 + c2 M2) = c1 Tr_B(M1) + c2 Tr_B(M2) for both factors"""
        rng = np.random.default_rng(11)
        m1 = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        m2 = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        c1, c2 = 0.3 - 1.2j, -2.5 + 0.4j
        for keep in (Factor.FIRST, Factor.SECOND):
            assert_allclose(
                partial_trace(c1 * m1 + c2 * m2, 2, 3, keep),
                c1 * partial_trace(m1, 2, 3, keep) + c2 * partial_trace(m2, 2, 3, keep),
                atol=1e-12,
            )

    def test_wrong_shape(self):
        """A matrix whose side is not dim_a * dim_b is rejected"""
        with self.assertRaises(DimensionError):
            partial_trace(np.eye(5), 2, 3, Factor.FIRST)


class TestTensorProduct(unittest.TestCase):

    def test_factor_order(self):
        """The left factor is the slow index"""
        v = tensor_product(ket(1, 2).reshape(-1, 1), ket(0, 3).reshape(-1, 1))
        self.assertEqual(v.shape, (6, 1))
        self.assertEqual(int(np.argmax(np.abs(v))), 3)

    def test_matches_index_loop(self):
        """Entry (i*r + k, j*s + l) is a[i, j] * b[k, l]"""
        rng = np.random.default_rng(4)
        a = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        b = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        expected = np.zeros((6, 6), dtype=np.complex128)
        for i in range(2):
            for j in range(3):
                for k in range(3):
                    for l in range(2):
                        expected[i * 3 + k, j * 2 + l] = a[i, j] * b[k, l]
        assert_allclose(tensor_product(a, b), expected, atol=0)

    def test_dimension_cap_from_environment(self):
        """RHO_LAB_MAX_DIM lowers the cap at call time"""
        with mock.patch.dict(os.environ, {"RHO_LAB_MAX_DIM": "4"}):
            self.assertEqual(max_dimension(), 4)
            with self.assertRaises(DimensionLimitError):
                tensor_product(np.eye(2), np.eye(3))

    def test_invalid_cap(self):
        """A non-numeric cap is a configuration error"""
        with mock.patch.dict(os.environ, {"RHO_LAB_MAX_DIM": "lots"}):
            with self.assertRaises(DimensionLimitError):
                max_dimension()


class TestEigen(unittest.TestCase):

    def test_descending_and_reconstructs(self):
        """Eigenvalues come out descending and V diag(w) V^dagger rebuilds the matrix"""
        rho = random_density(4, 3, 11)
        values, vectors = eig_hermitian(rho)
        self.assertTrue(np.all(np.diff(values) <= 1e-15))
        assert_allclose(vectors @ np.diag(values) @ dagger(vectors), rho, atol=1e-12)
        assert_allclose(dagger(vectors) @ vectors, np.eye(4), atol=1e-12)

    def test_rejects_non_hermitian(self):
        """A non-Hermitian input raises NotHermitianError"""
        with self.assertRaises(NotHermitianError):
            eig_hermitian(np.array([[0, 1], [0, 0]]))


class TestRandom(unittest.TestCase):

    def test_random_unitary(self):
        """Haar unitaries are unitary and reproducible from the seed"""
        u = random_unitary(5, 3)
        self.assertTrue(is_unitary(u, 1e-12))
        assert_allclose(u, random_unitary(5, 3))
        self.assertFalse(np.allclose(u, random_unitary(5, 4)))

    def test_random_density(self):
        """Ginibre density matrices have unit trace and the requested rank"""
        rho = random_density(4, 2, 5)
        self.assertAlmostEqual(np.trace(rho).real, 1.0, places=12)
        values = np.linalg.eigvalsh(rho)
        self.assertGreater(values.min(), -1e-12)
        self.assertEqual(int(np.sum(values > 1e-12)), 2)

    def test_random_unitary_scalar(self):
        """In dimension one a Haar unitary is a unit-modulus phase"""
        for seed in range(5):
            u = random_unitary(1, seed)
            self.assertEqual(u.shape, (1, 1))
            self.assertAlmostEqual(abs(u[0, 0]), 1.0, places=14)

    def test_random_density_mean(self):
        """Averaged over many seeds, random qubit states approach I/2"""
        total = np.zeros((2, 2), dtype=np.complex128)
        n = 4000
        for seed in range(n):
            total += random_density(2, 1 + seed % 2, seed)
        assert_allclose(total / n, np.eye(2) / 2.0, atol=0.03)

    def test_random_density_rank_range(self):
        """Rank must lie between 1 and the dimension"""
        with self.assertRaises(RangeError):
            random_density(3, 0, 1)
        with self.assertRaises(RangeError):
            random_density(3, 4, 1)

    def test_random_state_vector(self):
        """Random pure states are normalized"""
        v = random_state_vector(6, 9)
        self.assertAlmostEqual(np.linalg.norm(v), 1.0, places=12)


class TestBasisCompletion(unittest.TestCase):

    def test_complete_basis(self):
        """The completion is orthonormal and starts with the given vector"""
        v = random_state_vector(4, 2)
        basis = complete_basis(v)
        assert_allclose(basis[:, 0], v, atol=1e-14)
        assert_allclose(dagger(basis) @ basis, np.eye(4), atol=1e-12)

    def test_canonical_vector(self):
        """Canonical candidates parallel to the seed vector are skipped"""
        basis = complete_basis(ket(0, 3))
        assert_allclose(basis, np.eye(3), atol=1e-14)

    def test_unitary_mapping(self):
        """U v = w and U is unitary"""
        v = random_state_vector(6, 1)
        w = random_state_vector(6, 2)
        u = unitary_mapping(v, w)
        self.assertTrue(is_unitary(u, 1e-10))
        assert_allclose(u @ v, w, atol=1e-12)

    def test_unitary_mapping_dimension_mismatch(self):
        """Vectors of different dimension cannot be mapped onto each other"""
        with self.assertRaises(DimensionError):
            unitary_mapping(ket(0, 2), ket(0, 3))


class TestHermitianBasis(unittest.TestCase):

    def test_frobenius_orthonormal(self):
        """dim^2 Hermitian matrices with Tr(H_i H_j) = delta_ij"""
        basis = hermitian_basis(3)
        self.assertEqual(len(basis), 9)
        gram = np.array([[np.trace(a @ b).real for b in basis] for a in basis])
        assert_allclose(gram, np.eye(9), atol=1e-14)
        for h in basis:
            assert_allclose(h, dagger(h), atol=0)


class TestMatrixJson(unittest.TestCase):

    def test_codec(self):
        """A matrix survives the rows/cols/re/im encoding"""
        m = random_unitary(3, 8)
        assert_allclose(matrix_from_json(matrix_to_json(m)), m, atol=0)

    def test_inconsistent_shape(self):
        """Declared shape must match the data"""
        with self.assertRaises(DimensionError):
            matrix_from_json({"rows": 2, "cols": 2, "re": [[1, 0]], "im": [[0, 0]]})

    def test_ket_range(self):
        """Basis indices outside the dimension are rejected"""
        with self.assertRaises(RangeError):
            ket(2, 2)


if __name__ == '__main__':
    unittest.main()
