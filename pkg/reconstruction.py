"""Affine outcome probabilities over the Bloch ball and the Born rule they imply for a spin"""
import logging
from dataclasses import dataclass

import numpy as np

from apparatus import Apparatus, outcome_distribution, projective_apparatus
from errors import BornPreconditionError, ConstantFormError, DimensionError, NonPhysicalError
from linalg import SeedLike, as_state_vector, eig_hermitian, make_rng, random_density
from states import (
    IDENTITY_2,
    PAULIS,
    BlochVector,
    DensityMatrix,
    bloch_to_density,
    density_to_bloch,
    pure_density,
)

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-9
CONSTANT_FORM_TOL = 1e-12
EXTREMUM_TOL = 1e-9
BRANCH_STATE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class AffineForm:
    """P(p) = a . p + b for an outcome probability as a function of the polarization"""
    a: np.ndarray
    b: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.shape != (3,):
            raise DimensionError(f"Affine coefficient vector must have 3 components, got {a.shape}")
        norm = np.linalg.norm(a)
        if self.b - norm < -BOUND_TOL or self.b + norm > 1.0 + BOUND_TOL:
            raise NonPhysicalError(
                f"Affine form leaves [0, 1] on the Bloch ball: min {self.b - norm!r}, max {self.b + norm!r}"
            )
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    def evaluate(self, p: BlochVector) -> float:
        return float(np.dot(self.a, p.p) + self.b)


@dataclass(frozen=True, eq=False)
class BornCertificate:
    p1: BlochVector
    p2: BlochVector
    psi1: np.ndarray
    max_abs_error: float
    closed_form_error: float


def _require_qubit(app: Apparatus):
    if app.dim_system != 2:
        raise DimensionError(f"Bloch-ball analysis needs a qubit apparatus, got dimension {app.dim_system}")


def two_branch_apparatus(psi1) -> Apparatus:
    """Stern-Gerlach device: |psi1> always takes branch 1 (outcome 0), its orthogonal state branch 2"""
    psi1 = as_state_vector(psi1, tol=1e-10)
    psi1 = psi1 / np.linalg.norm(psi1)
    if psi1.size != 2:
        raise DimensionError(f"Two-branch apparatus acts on a spin, got dimension {psi1.size}")
    orthogonal = np.array([-np.conj(psi1[1]), np.conj(psi1[0])])
    return projective_apparatus(np.column_stack([psi1, orthogonal]), (1.0, -1.0))


def fit_affine(app: Apparatus, outcome_index: int) -> AffineForm:
    """Exact affine form from the outcome probability at p = 0, e_x, e_y, e_z"""
    _require_qubit(app)

    def probability(p) -> float:
        return float(outcome_distribution(app, bloch_to_density(BlochVector(p)))[outcome_index])

    b = probability(np.zeros(3))
    a = np.array([probability(axis) - b for axis in np.eye(3)])
    return AffineForm(a, b)


def random_bloch_vector(seed: SeedLike) -> BlochVector:
    """Uniform point of the Bloch ball"""
    rng = make_rng(seed)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return BlochVector(direction * rng.random() ** (1.0 / 3.0))


def affine_fit_residual(app: Apparatus, outcome_index: int, form: AffineForm,
                        n: int = 20, seed: SeedLike = 0) -> float:
    """Max deviation of the fitted form from the engine on n held-out Bloch vectors"""
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n):
        p = random_bloch_vector(rng)
        actual = outcome_distribution(app, bloch_to_density(p))[outcome_index]
        worst = max(worst, abs(actual - form.evaluate(p)))
    return worst


def extremal_polarizations(f: AffineForm):
    """Maximizer a/|a| and minimizer -a/|a| of the form over the Bloch ball"""
    norm = np.linalg.norm(f.a)
    if norm <= CONSTANT_FORM_TOL:
        raise ConstantFormError("Affine form is constant over the Bloch ball; extrema are not unique")
    return BlochVector(f.a / norm), BlochVector(-f.a / norm)


def verify_born(app: Apparatus, psi1, trials: int = 100, seed: SeedLike = 0) -> BornCertificate:
    """Derives P(rho) = <psi1|rho|psi1> for a two-branch apparatus and measures the deviation"""
    psi1 = as_state_vector(psi1, tol=1e-10)
    psi1 = psi1 / np.linalg.norm(psi1)
    form = fit_affine(app, 0)
    p1, p2 = extremal_polarizations(form)
    if form.evaluate(p1) < 1.0 - EXTREMUM_TOL:
        raise BornPreconditionError(f"Branch-1 probability peaks at {form.evaluate(p1)!r}, not at 1")
    psi1_polarization = density_to_bloch(pure_density(psi1))
    if np.linalg.norm(psi1_polarization.p - p1.p) > BRANCH_STATE_TOL:
        raise BornPreconditionError("The given state is not the one sent to branch 1 with certainty")

    rng = make_rng(seed)
    max_abs_error = 0.0
    closed_form_error = 0.0
    for _ in range(trials):
        rank = int(rng.integers(1, 3))
        rho = DensityMatrix(random_density(2, rank, rng))
        probability = outcome_distribution(app, rho)[0]
        born = np.vdot(psi1, rho.matrix @ psi1).real
        p = density_to_bloch(rho)
        closed_form = (np.dot(p.p, p1.p) + 1.0) / 2.0
        max_abs_error = max(max_abs_error, abs(probability - born))
        closed_form_error = max(closed_form_error, abs(probability - closed_form))
    logger.debug(f"Born certificate: max error {max_abs_error:.3e}, closed form error {closed_form_error:.3e}")
    return BornCertificate(p1, p2, psi1, float(max_abs_error), float(closed_form_error))


def affine_to_operator(f: AffineForm) -> np.ndarray:
    """M = b I + a_x sigma_x + a_y sigma_y + a_z sigma_z, so that Tr(rho M) = P(p(rho))"""
    m = f.b * IDENTITY_2 + sum(component * sigma for component, sigma in zip(f.a, PAULIS))
    eigenvalues = eig_hermitian(m)[0]
    if eigenvalues[-1] < -BOUND_TOL or eigenvalues[0] > 1.0 + BOUND_TOL:
        raise NonPhysicalError(f"Operator eigenvalues {eigenvalues.tolist()} fall outside [0, 1]")
    return m
