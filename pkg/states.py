"""Quantum states: density matrices, bipartite pure states, Bloch vectors and mixtures"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from errors import (
    DimensionError,
    NonPhysicalError,
    OrthonormalityError,
    ProbabilityError,
    RangeError,
)
from linalg import (
    Factor,
    SeedLike,
    as_matrix,
    as_state_vector,
    dagger,
    eig_hermitian,
    ket,
    make_rng,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    random_state_vector,
)

logger = logging.getLogger(__name__)

DENSITY_TOL = 1e-10
VECTOR_NORM_TOL = 1e-12
PROBABILITY_SUM_TOL = 1e-12
RANK_TOL = 1e-12
BLOCH_TOL = 1e-12
BLOCH_CLIP_TOL = 4 * DENSITY_TOL  # trace and eigenvalue slack of a valid qubit state
ORTHONORMAL_TOL = 1e-10

IDENTITY_2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator"""
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"Density matrix must be square, got {m.shape}")
        if np.max(np.abs(m - dagger(m))) > DENSITY_TOL:
            raise NonPhysicalError("Density matrix is not Hermitian")
        trace = np.trace(m).real
        if abs(trace - 1.0) > DENSITY_TOL:
            raise NonPhysicalError(f"Density matrix has trace {trace!r}")
        min_eig = scipy.linalg.eigvalsh(0.5 * (m + dagger(m)))[0]
        if min_eig < -DENSITY_TOL:
            raise NonPhysicalError(f"Density matrix has negative eigenvalue {min_eig!r}")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        return eig_hermitian(self.matrix)[0]

    def rank(self) -> int:
        return int(np.sum(self.spectrum() > RANK_TOL))

    def distance(self, other: "DensityMatrix") -> float:
        """Max-entry distance between two density matrices"""
        return float(np.max(np.abs(self.matrix - other.matrix)))


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Pure state of a system S (first factor) and an environment E (second factor)"""
    dim_s: int
    dim_e: int
    vector: np.ndarray

    def __post_init__(self):
        v = as_state_vector(self.vector, tol=VECTOR_NORM_TOL)
        if self.dim_s < 1 or self.dim_e < 1 or self.dim_s * self.dim_e != v.size:
            raise DimensionError(
                f"Vector of dimension {v.size} does not match {self.dim_s} x {self.dim_e}"
            )
        object.__setattr__(self, "vector", _freeze(v))

    def amplitudes(self) -> np.ndarray:
        """Coefficient matrix c[i, j] of |i>|j>"""
        return self.vector.reshape(self.dim_s, self.dim_e)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    s_basis: np.ndarray  # columns |s_k>
    e_basis: np.ndarray  # columns |eps_k>

    @property
    def schmidt_rank(self) -> int:
        return int(np.sum(self.coefficients ** 2 > RANK_TOL))

    def reconstruct(self) -> np.ndarray:
        return np.einsum('k,ik,jk->ij', self.coefficients, self.s_basis, self.e_basis).reshape(-1)


@dataclass(frozen=True, eq=False)
class BlochVector:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.shape != (3,):
            raise DimensionError(f"Bloch vector must have 3 components, got shape {p.shape}")
        if np.linalg.norm(p) > 1.0 + BLOCH_TOL:
            raise NonPhysicalError(f"Bloch vector of length {np.linalg.norm(p)!r} lies outside the ball")
        object.__setattr__(self, "p", _freeze(p))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.p))


@dataclass(frozen=True)
class MixtureComponent:
    """One member of a proper mixture; dim_e == 1 encodes a pure state of S alone"""
    probability: float
    state: BipartiteState


class NamedState(Enum):
    BELL_PHI = "bell_phi"
    SINGLET = "singlet"
    TRIPLET0 = "triplet0"
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"


def pure_density(v: Any) -> DensityMatrix:
    v = as_state_vector(v, tol=DENSITY_TOL)
    return DensityMatrix(np.outer(v, np.conj(v)))


def product_state(s: Any, e: Any) -> BipartiteState:
    s = as_state_vector(s)
    e = as_state_vector(e)
    return BipartiteState(s.size, e.size, np.kron(s, e))


def random_bipartite(dim_s: int, dim_e: int, seed: SeedLike) -> BipartiteState:
    return BipartiteState(dim_s, dim_e, random_state_vector(dim_s * dim_e, seed))


def reduced_density(psi: BipartiteState, keep: Factor = Factor.FIRST) -> DensityMatrix:
    """Partial trace of |psi><psi| over the discarded factor"""
    projector = np.outer(psi.vector, np.conj(psi.vector))
    rho = partial_trace(projector, psi.dim_s, psi.dim_e, keep)
    return DensityMatrix(0.5 * (rho + dagger(rho)))


def schmidt_decompose(psi: BipartiteState) -> SchmidtDecomposition:
    """Schmidt form sum_k alpha_k |s_k>|eps_k> via the SVD of the amplitude matrix"""
    u, s, vh = scipy.linalg.svd(psi.amplitudes(), full_matrices=False)
    # rows of vh are the environment vectors, unconjugated
    return SchmidtDecomposition(
        coefficients=_freeze(s),
        s_basis=_freeze(u),
        e_basis=_freeze(vh.T),
    )


def purify(rho: DensityMatrix, dim_e: Optional[int] = None) -> BipartiteState:
    """Purification sum_k sqrt(lambda_k) |v_k>|k> with environment dimension = rank (or dim_e if given)"""
    values, vectors = eig_hermitian(rho.matrix)
    rank = int(np.sum(values > RANK_TOL))
    env = rank if dim_e is None else dim_e
    if env < rank:
        raise DimensionError(f"Environment dimension {env} is smaller than the rank {rank}")
    amplitudes = np.zeros((rho.dim, env), dtype=np.complex128)
    for k in range(rank):
        amplitudes[:, k] = np.sqrt(values[k]) * vectors[:, k]
    vector = amplitudes.reshape(-1)
    vector = vector / np.linalg.norm(vector)
    logger.debug(f"Purified rank-{rank} state of dimension {rho.dim} into environment of dimension {env}")
    return BipartiteState(rho.dim, env, vector)


def _check_probabilities(probabilities: Sequence[float]):
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.size == 0:
        raise ProbabilityError("A mixture needs at least one component")
    if np.any(probs < 0):
        raise ProbabilityError(f"Negative probability in {probs.tolist()}")
    if abs(probs.sum() - 1.0) > PROBABILITY_SUM_TOL:
        raise ProbabilityError(f"Probabilities sum to {probs.sum()!r}, expected 1")


def mix(components: Sequence[Tuple[float, DensityMatrix]]) -> DensityMatrix:
    """Density matrix sum_k p_k rho_k of a proper mixture"""
    _check_probabilities([p for p, _ in components])
    dims = {rho.dim for _, rho in components}
    if len(dims) != 1:
        raise DimensionError(f"Mixture components have different dimensions {sorted(dims)}")
    total = sum(p * rho.matrix for p, rho in components)
    return DensityMatrix(0.5 * (total + dagger(total)))


def mixture_density(components: Sequence[MixtureComponent]) -> DensityMatrix:
    """Flattens a mixture of pure and improper-mixture states into its density matrix"""
    return mix([(c.probability, reduced_density(c.state)) for c in components])


def bloch_to_density(p: BlochVector) -> DensityMatrix:
    rho = 0.5 * IDENTITY_2 + 0.5 * sum(component * sigma for component, sigma in zip(p.p, PAULIS))
    return DensityMatrix(rho)


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise DimensionError(f"Bloch vectors describe qubits only, got dimension {rho.dim}")
    p = np.array([np.trace(rho.matrix @ sigma).real for sigma in PAULIS])
    length = np.linalg.norm(p)
    if 1.0 < length <= 1.0 + BLOCH_CLIP_TOL:
        p = p / length
    return BlochVector(p)


def named_state(name: Union[NamedState, str]) -> Union[BipartiteState, np.ndarray]:
    """Exact amplitude tables of the standard spin states"""
    name = NamedState(name)
    r = 1.0 / np.sqrt(2.0)
    up, down = ket(0, 2), ket(1, 2)
    if name is NamedState.UP:
        return up
    if name is NamedState.DOWN:
        return down
    if name is NamedState.LEFT:
        return r * (up - down)
    if name is NamedState.RIGHT:
        return r * (up + down)
    if name is NamedState.BELL_PHI:
        vector = r * (np.kron(up, up) + np.kron(down, down))
    elif name is NamedState.SINGLET:
        vector = r * (np.kron(up, down) - np.kron(down, up))
    else:
        vector = r * (np.kron(up, down) + np.kron(down, up))
    return BipartiteState(2, 2, vector)


def _basis_columns(e_basis: Any) -> np.ndarray:
    if isinstance(e_basis, np.ndarray) and e_basis.ndim == 2:
        cols = np.asarray(e_basis, dtype=np.complex128)
    else:
        cols = np.column_stack([np.asarray(v, dtype=np.complex128) for v in e_basis])
    gram = dagger(cols) @ cols
    if np.max(np.abs(gram - np.eye(cols.shape[1]))) > ORTHONORMAL_TOL:
        raise OrthonormalityError("Environment basis is not orthonormal")
    return cols


def envariance_unitary(phases: Sequence[float], e_basis: Any) -> np.ndarray:
    """U_E = sum_k exp(-i phi_k)|eps_k><eps_k| plus the identity on the orthogonal complement"""
    cols = _basis_columns(e_basis)
    if len(phases) != cols.shape[1]:
        raise RangeError(f"Got {len(phases)} phases for {cols.shape[1]} basis vectors")
    dim_e = cols.shape[0]
    shifts = np.exp(-1j * np.asarray(phases, dtype=np.float64)) - 1.0
    return np.eye(dim_e, dtype=np.complex128) + (cols * shifts[np.newaxis, :]) @ dagger(cols)


def with_schmidt_phases(decomposition: SchmidtDecomposition, phases: Sequence[float]) -> BipartiteState:
    """Builds sum_k exp(i phi_k) alpha_k |s_k>|eps_k>; missing trailing phases count as zero"""
    count = decomposition.coefficients.size
    if len(phases) > count:
        raise RangeError(f"Got {len(phases)} phases for {count} Schmidt terms")
    full = np.zeros(count)
    full[:len(phases)] = phases
    weights = decomposition.coefficients * np.exp(1j * full)
    amplitudes = np.einsum('k,ik,jk->ij', weights, decomposition.s_basis, decomposition.e_basis)
    dim_s, dim_e = decomposition.s_basis.shape[0], decomposition.e_basis.shape[0]
    vector = amplitudes.reshape(-1)
    return BipartiteState(dim_s, dim_e, vector / np.linalg.norm(vector))


def apply_local(psi: BipartiteState, u_s: Optional[np.ndarray] = None,
                u_e: Optional[np.ndarray] = None) -> BipartiteState:
    """(U_S x U_E)|psi> with either factor defaulting to the identity"""
    amplitudes = psi.amplitudes()
    if u_s is not None:
        amplitudes = as_matrix(u_s) @ amplitudes
    if u_e is not None:
        amplitudes = amplitudes @ as_matrix(u_e).T
    return BipartiteState(psi.dim_s, psi.dim_e, amplitudes.reshape(-1))


def equal_up_to_phase(a: Any, b: Any) -> float:
    """Distance ||a - exp(i theta) b|| minimized over the global phase theta"""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionError(f"Cannot compare vectors of shapes {a.shape} and {b.shape}")
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def density_to_json(rho: DensityMatrix) -> Dict[str, Any]:
    return {"dim": rho.dim, "matrix": matrix_to_json(rho.matrix)}


def density_from_json(data: Dict[str, Any]) -> DensityMatrix:
    return DensityMatrix(matrix_from_json(data["matrix"]))


def bipartite_to_json(psi: BipartiteState) -> Dict[str, Any]:
    column = psi.vector.reshape(-1, 1)
    return {"dim_s": psi.dim_s, "dim_e": psi.dim_e, "vector": matrix_to_json(column)}


def bipartite_from_json(data: Dict[str, Any]) -> BipartiteState:
    vector = matrix_from_json(data["vector"]).reshape(-1)
    return BipartiteState(int(data["dim_s"]), int(data["dim_e"]), vector)


def random_mixture(dim: int, n_components: int, seed: SeedLike) -> List[MixtureComponent]:
    """Random proper mixture of pure and improper-mixture components"""
    rng = make_rng(seed)
    probabilities = rng.dirichlet(np.ones(n_components))
    probabilities[-1] = 1.0 - probabilities[:-1].sum()
    components = []
    for probability in probabilities:
        dim_e = int(rng.integers(1, dim + 1))
        components.append(MixtureComponent(float(probability), random_bipartite(dim, dim_e, rng)))
    return components
