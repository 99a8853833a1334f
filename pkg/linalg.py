"""Dense complex linear algebra for desk-scale quantum simulation.

Matrices are plain ``numpy`` complex128 arrays and state vectors are 1-D
complex128 arrays. Composite spaces use a fixed factor order: the leftmost
factor is the slowest-varying index (A, then B, then the qubit alpha, ...).
"""
import logging
import os
from enum import Enum
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import scipy.linalg

from errors import (
    DimensionError,
    DimensionLimitError,
    NonPhysicalError,
    NotHermitianError,
    RangeError,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 4096
MAX_DIM_ENV = "RHO_LAB_MAX_DIM"
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
COMPLETION_THRESHOLD = 1e-6

SeedLike = Union[int, np.random.Generator]


class Factor(Enum):
    """Selects one factor of a bipartite space"""
    FIRST = "first"
    SECOND = "second"


def max_dimension() -> int:
    """Dimension cap for any single matrix side, overridable through RHO_LAB_MAX_DIM"""
    value = os.environ.get(MAX_DIM_ENV)
    if value is None:
        return DEFAULT_MAX_DIM
    try:
        cap = int(value)
    except ValueError as e:
        raise DimensionLimitError(f"{MAX_DIM_ENV} must be an integer, got {value!r}") from e
    if cap < 1:
        raise DimensionLimitError(f"{MAX_DIM_ENV} must be positive, got {cap}")
    return cap


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_matrix(m: Any) -> np.ndarray:
    """Validates and converts input into a finite complex matrix"""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"Expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonPhysicalError("Matrix has non-finite entries")
    return arr


def as_state_vector(v: Any, tol: float = NORM_TOL) -> np.ndarray:
    """Validates a unit vector"""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"Expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonPhysicalError("State vector has non-finite entries")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > tol:
        raise NonPhysicalError(f"State vector norm is {norm!r}, expected 1")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def ket(index: int, dim: int) -> np.ndarray:
    """Canonical basis vector |index> in dimension dim"""
    if not 0 <= index < dim:
        raise RangeError(f"Basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m))) <= tol


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(dagger(m) @ m - np.eye(m.shape[0]))) <= tol


def tensor_product(a: Any, b: Any) -> np.ndarray:
    """Kronecker product with the left factor as the slow index"""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    cap = max_dimension()
    if rows > cap or cols > cap:
        raise DimensionLimitError(f"Tensor product of size {rows}x{cols} exceeds max dimension {cap}")
    return np.kron(a, b)


def partial_trace(m: Any, dim_a: int, dim_b: int, keep: Factor) -> np.ndarray:
    """Traces out one factor of an operator on a (dim_a * dim_b)-dimensional space"""
    m = as_matrix(m)
    side = dim_a * dim_b
    if m.shape != (side, side):
        raise DimensionError(f"Matrix of shape {m.shape} is not square with side {dim_a}*{dim_b}")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep is Factor.FIRST:
        return np.einsum('ijkj->ik', t)
    return np.einsum('ijil->jl', t)


def eig_hermitian(m: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Spectral decomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns.
    """
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitianError("eig_hermitian requires a Hermitian matrix")
    h = 0.5 * (m + dagger(m))
    values, vectors = scipy.linalg.eigh(h)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def ginibre(rows: int, cols: int, seed: SeedLike) -> np.ndarray:
    """Matrix with i.i.d. standard complex Gaussian entries"""
    rng = make_rng(seed)
    real = rng.normal(size=(rows, cols))
    imag = rng.normal(size=(rows, cols))
    return (real + 1j * imag) / np.sqrt(2.0)


def random_unitary(dim: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix"""
    if dim < 1:
        raise RangeError(f"Dimension must be positive, got {dim}")
    z = ginibre(dim, dim, seed)
    q, r = scipy.linalg.qr(z)
    d = np.diag(r)
    phases = d / np.abs(d)
    return q * phases[np.newaxis, :]


def random_state_vector(dim: int, seed: SeedLike) -> np.ndarray:
    """Haar-random pure state"""
    if dim < 1:
        raise RangeError(f"Dimension must be positive, got {dim}")
    v = ginibre(dim, 1, seed)[:, 0]
    return v / np.linalg.norm(v)


def random_density(dim: int, rank: int, seed: SeedLike) -> np.ndarray:
    """Random density matrix of the given rank, G G^dagger / Tr with G a dim x rank Ginibre matrix"""
    if not 1 <= rank <= dim:
        raise RangeError(f"Rank must satisfy 1 <= rank <= {dim}, got {rank}")
    g = ginibre(dim, rank, seed)
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.trace(rho).real


def complete_basis(v: np.ndarray) -> np.ndarray:
    """Extends a unit vector to an orthonormal basis (columns, v first).

    Gram-Schmidt over the canonical basis vectors in index order; candidates
    whose residual norm falls below COMPLETION_THRESHOLD are skipped.
    """
    dim = v.size
    basis: List[np.ndarray] = [v / np.linalg.norm(v)]
    for k in range(dim):
        if len(basis) == dim:
            break
        candidate = ket(k, dim)
        # two passes keep the result orthogonal to working precision
        for _ in range(2):
            for b in basis:
                candidate = candidate - b * np.vdot(b, candidate)
        norm = np.linalg.norm(candidate)
        if norm < COMPLETION_THRESHOLD:
            continue
        basis.append(candidate / norm)
    if len(basis) != dim:
        raise DimensionError(f"Basis completion produced {len(basis)} of {dim} vectors")
    return np.column_stack(basis)


def unitary_mapping(v: Any, w: Any) -> np.ndarray:
    """Deterministic unitary U with U v = w"""
    v = as_state_vector(v, tol=HERMITIAN_TOL)
    w = as_state_vector(w, tol=HERMITIAN_TOL)
    if v.size != w.size:
        raise DimensionError(f"Cannot map a dimension-{v.size} vector onto dimension {w.size}")
    a = complete_basis(v)
    b = complete_basis(w)
    return b @ dagger(a)


def hermitian_basis(dim: int) -> List[np.ndarray]:
    """Frobenius-orthonormal basis of the real vector space of dim x dim Hermitian matrices"""
    basis = []
    for j in range(dim):
        e = np.zeros((dim, dim), dtype=np.complex128)
        e[j, j] = 1.0
        basis.append(e)
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1.0 / np.sqrt(2.0)
            basis.append(sym)
            anti = np.zeros((dim, dim), dtype=np.complex128)
            anti[j, k] = -1j / np.sqrt(2.0)
            anti[k, j] = 1j / np.sqrt(2.0)
            basis.append(anti)
    return basis


def matrix_to_json(m: Any) -> Dict[str, Any]:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def matrix_from_json(data: Dict[str, Any]) -> np.ndarray:
    try:
        rows, cols = int(data["rows"]), int(data["cols"])
        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data.get("im", np.zeros((rows, cols))), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as e:
        raise DimensionError(f"Malformed matrix JSON: {e}") from e
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise DimensionError(f"Matrix JSON declares {rows}x{cols} but holds {re.shape} / {im.shape}")
    return as_matrix(re + 1j * im)
