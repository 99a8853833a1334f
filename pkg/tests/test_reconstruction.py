import os
import sys
import unittest

import numpy as np
from numpy.testing import assert_allclose

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from apparatus import Apparatus, extract_povm, outcome_distribution, random_apparatus, spin_meter, trivial_apparatus
from errors import BornPreconditionError, ConstantFormError, DimensionError, NonPhysicalError
from linalg import ket, random_density, random_state_vector
from reconstruction import (
    AffineForm,
    affine_fit_residual,
    affine_to_operator,
    extremal_polarizations,
    fit_affine,
    random_bloch_vector,
    two_branch_apparatus,
    verify_born,
)
from states import BlochVector, DensityMatrix, density_to_bloch, pure_density

R = 1.0 / np.sqrt(2.0)


def _unsharp_apparatus() -> Apparatus:
    """Outcome 0 fires with probability rho_00 / 2, so it never reaches certainty"""
    ancilla_plus = np.array([R, R], dtype=np.complex128)
    first = np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    return Apparatus(
        dim_system=2,
        dim_ancilla=2,
        ancilla_init=ancilla_plus,
        joint_unitary=np.eye(4),
        pointer_projectors=(first, np.eye(4) - first),
        outcome_values=(1.0, -1.0),
    )


class TestAffineForm(unittest.TestCase):

    def test_spin_meter_form(self):
        """P(up-branch) = (1 + p_z) / 2 for a sigma_z meter"""
        form = fit_affine(spin_meter("z"), 0)
        assert_allclose(form.a, [0.0, 0.0, 0.5], atol=1e-15)
        self.assertAlmostEqual(form.b, 0.5, places=15)

    def test_fit_is_exact_on_held_out_points(self):
        """The four-point fit predicts the engine everywhere on the ball"""
        for seed in range(5):
            app = random_apparatus(2, 2, 3, seed)
            for k in range(app.n_outcomes):
                form = fit_affine(app, k)
                self.assertLess(affine_fit_residual(app, k, form, n=20, seed=seed), 1e-12)

    def test_bounds(self):
        """Forms leaving [0, 1] on the ball are rejected"""
        with self.assertRaises(NonPhysicalError):
            AffineForm(np.array([1.0, 0.0, 0.0]), 0.5)
        with self.assertRaises(DimensionError):
            AffineForm(np.array([0.1, 0.0]), 0.5)

    def test_extremal_polarizations(self):
        """The maximizer is a/|a| and the minimizer its antipode"""
        p1, p2 = extremal_polarizations(fit_affine(spin_meter("x"), 0))
        assert_allclose(p1.p, [1.0, 0.0, 0.0], atol=1e-15)
        assert_allclose(p2.p, [-1.0, 0.0, 0.0], atol=1e-15)

    def test_constant_form(self):
        """A constant form has no unique extremum"""
        with self.assertRaises(ConstantFormError):
            extremal_polarizations(fit_affine(trivial_apparatus(2), 0))

    def test_requires_qubit(self):
        """The Bloch-ball analysis only applies to spins"""
        with self.assertRaises(DimensionError):
            fit_affine(trivial_apparatus(3), 0)

    def test_affine_to_operator(self):
        """Tr(rho M) reproduces the affine form"""
        form = fit_affine(spin_meter("z"), 0)
        assert_allclose(affine_to_operator(form), np.diag([1.0, 0.0]), atol=1e-15)
        app = random_apparatus(2, 2, 2, 3)
        form = fit_affine(app, 1)
        m = affine_to_operator(form)
        rho = DensityMatrix(random_density(2, 2, 4))
        self.assertAlmostEqual(np.trace(rho.matrix @ m).real, outcome_distribution(app, rho)[1], places=12)

    def test_two_routes_to_povm(self):
        """The affine-form operator equals the linear-inversion POVM element"""
        for seed in range(5):
            app = random_apparatus(2, 2, 3, seed)
            povm = extract_povm(app)
            for k in range(app.n_outcomes):
                assert_allclose(affine_to_operator(fit_affine(app, k)), povm.elements[k], atol=1e-12)

    def test_extrema_beat_grid_search(self):
        """No point of a fine sphere grid does better than the returned extremal polarizations"""
        theta, phi = np.meshgrid(np.linspace(0.0, np.pi, 61), np.linspace(0.0, 2.0 * np.pi, 121))
        grid = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
        for seed in range(3):
            form = fit_affine(random_apparatus(2, 2, 3, seed), 0)
            values = grid.reshape(-1, 3) @ form.a + form.b
            p1, p2 = extremal_polarizations(form)
            self.assertGreaterEqual(form.evaluate(p1), values.max() - 1e-12)
            self.assertLessEqual(form.evaluate(p2), values.min() + 1e-12)
            self.assertAlmostEqual(form.evaluate(p1), values.max(), delta=1e-2)
            self.assertAlmostEqual(form.evaluate(p2), values.min(), delta=1e-2)

    def test_random_bloch_vector(self):
        """Random polarizations lie inside the ball"""
        for seed in range(20):
            self.assertLessEqual(random_bloch_vector(seed).norm, 1.0)


class TestBornRule(unittest.TestCase):

    def test_two_branch_apparatus(self):
        """|psi1> takes branch 1 with certainty"""
        psi1 = random_state_vector(2, 5)
        app = two_branch_apparatus(psi1)
        assert_allclose(outcome_distribution(app, pure_density(psi1)), [1.0, 0.0], atol=1e-12)

    def test_certificate(self):
        """P(rho) = <psi1|rho|psi1> and the closed form for random psi1"""
        for seed in range(20):
            psi1 = random_state_vector(2, seed)
            certificate = verify_born(two_branch_apparatus(psi1), psi1, trials=100, seed=seed)
            self.assertAlmostEqual(certificate.p1.norm, 1.0, delta=1e-6)
            assert_allclose(certificate.p2.p, -certificate.p1.p, atol=1e-6)
            assert_allclose(certificate.p1.p, density_to_bloch(pure_density(psi1)).p, atol=1e-6)
            self.assertLess(certificate.max_abs_error, 1e-9)
            self.assertLess(certificate.closed_form_error, 1e-9)

    def test_slightly_unnormalized_state(self):
        """A branch state within the norm tolerance of one is accepted"""
        psi1 = np.array([0.70710678119, 0.70710678119], dtype=np.complex128)
        certificate = verify_born(two_branch_apparatus(psi1), psi1, trials=20, seed=2)
        self.assertAlmostEqual(certificate.p1.norm, 1.0, delta=1e-12)
        assert_allclose(certificate.p1.p, [1.0, 0.0, 0.0], atol=1e-9)
        self.assertLess(certificate.max_abs_error, 1e-9)

    def test_unsharp_apparatus(self):
        """An apparatus that never fires with certainty is not a two-branch device"""
        with self.assertRaises(BornPreconditionError):
            verify_born(_unsharp_apparatus(), ket(0, 2))

    def test_wrong_branch_state(self):
        """The state must be the one the apparatus sends to branch 1"""
        right = np.array([R, R], dtype=np.complex128)
        with self.assertRaises(BornPreconditionError):
            verify_born(spin_meter("z"), right)

    def test_bloch_vector_rejects_long_input(self):
        """Polarizations are bounded by one"""
        with self.assertRaises(NonPhysicalError):
            BlochVector(np.array([0.0, 0.0, 1.1]))


if __name__ == '__main__':
    unittest.main()
