import os
import sys
import unittest

import numpy as np
from numpy.testing import assert_allclose

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from apparatus import (
    SAMPLE_CHUNK,
    Apparatus,
    MeterMu,
    apparatus_from_json,
    apparatus_to_json,
    expected_value,
    expected_value_global,
    extract_povm,
    indicator_apparatus,
    outcome_distribution,
    outcome_distribution_global,
    projective_apparatus,
    random_apparatus,
    sample_outcomes,
    spin_meter,
    trivial_apparatus,
)
from errors import DimensionError, NonPhysicalError, OrthonormalityError, RangeError
from linalg import ket, random_density
from states import DensityMatrix, named_state, pure_density, random_bipartite, reduced_density

R = 1.0 / np.sqrt(2.0)
HADAMARD = np.array([[R, R], [R, -R]], dtype=np.complex128)


class TestApparatusValidation(unittest.TestCase):

    def _valid_kwargs(self):
        return dict(
            dim_system=2,
            dim_ancilla=1,
            ancilla_init=np.ones(1),
            joint_unitary=np.eye(2),
            pointer_projectors=(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])),
            outcome_values=(1.0, -1.0),
        )

    def test_valid(self):
        """A sigma_z meter written out by hand is accepted"""
        app = Apparatus(**self._valid_kwargs())
        self.assertEqual(app.n_outcomes, 2)
        self.assertEqual(app.joint_dim, 2)

    def test_non_unitary(self):
        """The joint evolution must be unitary"""
        kwargs = self._valid_kwargs()
        kwargs["joint_unitary"] = np.array([[1.0, 1.0], [0.0, 1.0]])
        with self.assertRaises(NonPhysicalError):
            Apparatus(**kwargs)

    def test_incomplete_projectors(self):
        """Pointer projectors must sum to the identity"""
        kwargs = self._valid_kwargs()
        kwargs["pointer_projectors"] = (np.diag([1.0, 0.0]),)
        kwargs["outcome_values"] = (1.0,)
        with self.assertRaises(NonPhysicalError):
            Apparatus(**kwargs)

    def test_value_count(self):
        """One scale value per outcome"""
        kwargs = self._valid_kwargs()
        kwargs["outcome_values"] = (1.0,)
        with self.assertRaises(DimensionError):
            Apparatus(**kwargs)

    def test_non_finite_value(self):
        """Scale values are finite reals"""
        kwargs = self._valid_kwargs()
        kwargs["outcome_values"] = (1.0, float("inf"))
        with self.assertRaises(RangeError):
            Apparatus(**kwargs)

    def test_ancilla_dimension(self):
        """The ancilla state must match dim_ancilla"""
        kwargs = self._valid_kwargs()
        kwargs["ancilla_init"] = ket(0, 2)
        with self.assertRaises(DimensionError):
            Apparatus(**kwargs)

    def test_non_orthonormal_basis(self):
        """Projective apparatuses need an orthonormal basis"""
        with self.assertRaises(OrthonormalityError):
            projective_apparatus(np.array([[1.0, 1.0], [0.0, 1.0]]), (1.0, -1.0))


class TestReadout(unittest.TestCase):

    def test_spin_meter(self):
        """sigma_z meter reads +1 on up and 0 on average for right"""
        meter = spin_meter("z")
        assert_allclose(outcome_distribution(meter, pure_density(ket(0, 2))), [1.0, 0.0], atol=1e-15)
        self.assertAlmostEqual(expected_value(meter, pure_density(named_state("right"))), 0.0, places=14)
        self.assertAlmostEqual(expected_value(spin_meter("x"), pure_density(named_state("right"))), 1.0, places=14)

    def test_unknown_axis(self):
        """Only x, y and z meters exist"""
        with self.assertRaises(RangeError):
            spin_meter("w")

    def test_trivial_apparatus(self):
        """A one-outcome apparatus always reads its single value"""
        rho = DensityMatrix(random_density(3, 2, 1))
        assert_allclose(outcome_distribution(trivial_apparatus(3), rho), [1.0], atol=1e-12)

    def test_random_apparatus_distribution(self):
        """Random black boxes yield probability distributions"""
        for seed in range(5):
            app = random_apparatus(3, 2, 4, seed)
            rho = DensityMatrix(random_density(3, 3, seed + 100))
            probabilities = outcome_distribution(app, rho)
            self.assertEqual(probabilities.shape, (4,))
            self.assertGreater(probabilities.min(), -1e-12)
            self.assertAlmostEqual(float(probabilities.sum()), 1.0, places=12)

    def test_dimension_mismatch(self):
        """States of the wrong dimension are rejected"""
        with self.assertRaises(DimensionError):
            outcome_distribution(spin_meter("z"), DensityMatrix(np.eye(3) / 3.0))

    def test_global_matches_reduced(self):
        """The apparatus on S of a global pure state sees only the reduced state"""
        for seed in range(5):
            app = random_apparatus(2, 2, 3, seed)
            psi = random_bipartite(2, 3, seed + 50)
            assert_allclose(
                outcome_distribution_global(app, psi),
                outcome_distribution(app, reduced_density(psi)),
                atol=1e-12,
            )
            self.assertAlmostEqual(
                expected_value_global(app, psi), expected_value(app, reduced_density(psi)), places=12
            )

    def test_indicator_apparatus(self):
        """The indicator scale turns the expected value into an outcome probability"""
        app = random_apparatus(2, 2, 3, 8)
        rho = DensityMatrix(random_density(2, 2, 9))
        indicator = indicator_apparatus(app, 1)
        self.assertAlmostEqual(expected_value(indicator, rho), outcome_distribution(app, rho)[1], places=14)
        with self.assertRaises(RangeError):
            indicator_apparatus(app, 3)

    def test_affine_in_the_state(self):
        """P_k((1 - lam) rho0 + lam rho1) = (1 - lam) P_k(rho0) + lam P_k(rho1) on a grid of lam"""
        for seed in range(3):
            app = random_apparatus(3, 2, 4, seed)
            rho0 = DensityMatrix(random_density(3, 1, seed + 20))
            rho1 = DensityMatrix(random_density(3, 3, seed + 30))
            p0, p1 = outcome_distribution(app, rho0), outcome_distribution(app, rho1)
            for lam in np.linspace(0.0, 1.0, 11):
                rho = DensityMatrix((1.0 - lam) * rho0.matrix + lam * rho1.matrix)
                assert_allclose(outcome_distribution(app, rho), (1.0 - lam) * p0 + lam * p1, atol=1e-12)

    def test_indicators_sum_to_one(self):
        """The indicator readings of all outcomes add up to one"""
        app = random_apparatus(3, 2, 4, 14)
        rho = DensityMatrix(random_density(3, 2, 15))
        total = sum(expected_value(indicator_apparatus(app, k), rho) for k in range(app.n_outcomes))
        self.assertAlmostEqual(total, 1.0, places=12)

    def test_json_codec(self):
        """A decoded apparatus gives the same statistics"""
        app = random_apparatus(2, 2, 3, 12)
        decoded = apparatus_from_json(apparatus_to_json(app))
        rho = DensityMatrix(random_density(2, 2, 13))
        assert_allclose(outcome_distribution(decoded, rho), outcome_distribution(app, rho), atol=1e-14)


class TestPovmExtraction(unittest.TestCase):

    def test_extracted_povm(self):
        """Extracted elements are complete, positive and reproduce the engine"""
        for seed in range(10):
            app = random_apparatus(3, 2, 4, seed)
            povm = extract_povm(app)
            assert_allclose(sum(povm.elements), np.eye(3), atol=1e-9)
            for m in povm.elements:
                self.assertGreater(np.linalg.eigvalsh(m)[0], -1e-9)
            rho = DensityMatrix(random_density(3, 2, seed + 7))
            assert_allclose(povm.probabilities(rho), outcome_distribution(app, rho), atol=1e-9)
            self.assertAlmostEqual(povm.expected_value(rho), expected_value(app, rho), places=9)

    def test_projective_meter(self):
        """A sigma_z meter has the computational projectors as its POVM"""
        povm = extract_povm(spin_meter("z"))
        assert_allclose(povm.elements[0], np.diag([1.0, 0.0]), atol=1e-14)
        assert_allclose(povm.elements[1], np.diag([0.0, 1.0]), atol=1e-14)


class TestMeterMu(unittest.TestCase):

    def test_bell_measurement(self):
        """Measuring one half of the Bell pair gives 1/2 and collapses both spins"""
        phi = named_state("bell_phi")
        probability, post = MeterMu.computational().measure(phi.vector, [2, 2], qubit=1, outcome=1)
        self.assertAlmostEqual(probability, 0.5, places=15)
        assert_allclose(post, np.kron(ket(1, 2), ket(1, 2)), atol=1e-15)

    def test_zero_probability(self):
        """Impossible outcomes return no post-measurement state"""
        probability, post = MeterMu.computational().measure(np.kron(ket(0, 2), ket(0, 2)), [2, 2], 0, 1)
        self.assertEqual(probability, 0.0)
        self.assertIsNone(post)

    def test_rotated_basis(self):
        """Projectors of a Hadamard meter are |+><+| and |-><-|"""
        meter = MeterMu(HADAMARD)
        assert_allclose(meter.projector(0), np.full((2, 2), 0.5), atol=1e-15)

    def test_non_orthonormal(self):
        """Meter bases must be orthonormal"""
        with self.assertRaises(OrthonormalityError):
            MeterMu(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_requires_qubit(self):
        """Meters act on qubit factors only"""
        with self.assertRaises(DimensionError):
            MeterMu.computational().measure(ket(0, 6), [3, 2], qubit=0, outcome=0)


class TestSampling(unittest.TestCase):

    def test_counts(self):
        """Counts add up to n and repeat for the same seed"""
        app = random_apparatus(2, 2, 3, 4)
        rho = DensityMatrix(random_density(2, 2, 5))
        counts = sample_outcomes(app, rho, 5000, seed=17)
        self.assertEqual(int(counts.sum()), 5000)
        np.testing.assert_array_equal(counts, sample_outcomes(app, rho, 5000, seed=17))

    def test_independent_of_workers(self):
        """Chunked seeding makes the histogram independent of the worker count"""
        rho = DensityMatrix(np.eye(2) / 2.0)
        n = 3 * SAMPLE_CHUNK + 11
        serial = sample_outcomes(spin_meter("z"), rho, n, seed=3, workers=1)
        parallel = sample_outcomes(spin_meter("z"), rho, n, seed=3, workers=4)
        np.testing.assert_array_equal(serial, parallel)

    def test_certain_outcome(self):
        """Zero-probability outcomes are never drawn"""
        counts = sample_outcomes(spin_meter("z"), pure_density(ket(1, 2)), 1000, seed=1)
        np.testing.assert_array_equal(counts, [0, 1000])

    def test_positive_count(self):
        """At least one draw is required"""
        with self.assertRaises(RangeError):
            sample_outcomes(spin_meter("z"), DensityMatrix(np.eye(2) / 2.0), 0, seed=1)


if __name__ == '__main__':
    unittest.main()
