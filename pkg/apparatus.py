"""Black-box measurement apparatus modeled as ancilla + joint unitary + pointer readout.

The engine applies the trace rule only at the pointer readout of the dilated
apparatus; every other step is unitary evolution. Each measurement starts from
a fresh ancilla in ``ancilla_init``, so the apparatus keeps no memory of
previously measured particles.
"""
import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from errors import DimensionError, NonPhysicalError, OrthonormalityError, RangeError
from linalg import (
    SeedLike,
    as_matrix,
    as_state_vector,
    dagger,
    hermitian_basis,
    is_unitary,
    ket,
    make_rng,
    matrix_from_json,
    matrix_to_json,
    random_unitary,
)
from states import BipartiteState, DensityMatrix

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-10
PROJECTOR_TOL = 1e-10
POVM_TOL = 1e-9
METER_TOL = 1e-12
SAMPLE_CHUNK = 65536


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Apparatus:
    dim_system: int
    dim_ancilla: int
    ancilla_init: np.ndarray
    joint_unitary: np.ndarray
    pointer_projectors: Tuple[np.ndarray, ...]
    outcome_values: Tuple[float, ...]

    def __post_init__(self):
        joint = self.dim_system * self.dim_ancilla
        ancilla = as_state_vector(self.ancilla_init, tol=UNITARY_TOL)
        if ancilla.size != self.dim_ancilla:
            raise DimensionError(f"Ancilla state has dimension {ancilla.size}, expected {self.dim_ancilla}")
        unitary = as_matrix(self.joint_unitary)
        if unitary.shape != (joint, joint):
            raise DimensionError(f"Joint unitary has shape {unitary.shape}, expected side {joint}")
        if not is_unitary(unitary, UNITARY_TOL):
            raise NonPhysicalError("Joint unitary is not unitary")
        projectors = tuple(as_matrix(p) for p in self.pointer_projectors)
        if not projectors:
            raise RangeError("An apparatus needs at least one pointer projector")
        for i, p in enumerate(projectors):
            if p.shape != (joint, joint):
                raise DimensionError(f"Projector {i} has shape {p.shape}, expected side {joint}")
            if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL or np.max(np.abs(p - dagger(p))) > PROJECTOR_TOL:
                raise NonPhysicalError(f"Pointer operator {i} is not an orthogonal projector")
            for j in range(i):
                if np.max(np.abs(p @ projectors[j])) > PROJECTOR_TOL:
                    raise NonPhysicalError(f"Pointer projectors {j} and {i} are not orthogonal")
        if np.max(np.abs(sum(projectors) - np.eye(joint))) > PROJECTOR_TOL:
            raise NonPhysicalError("Pointer projectors do not sum to the identity")
        values = tuple(float(x) for x in self.outcome_values)
        if len(values) != len(projectors):
            raise DimensionError(f"{len(values)} outcome values for {len(projectors)} projectors")
        if not all(np.isfinite(values)):
            raise RangeError(f"Outcome values must be finite, got {values}")
        object.__setattr__(self, "ancilla_init", _freeze(ancilla))
        object.__setattr__(self, "joint_unitary", _freeze(unitary))
        object.__setattr__(self, "pointer_projectors", tuple(_freeze(p) for p in projectors))
        object.__setattr__(self, "outcome_values", values)

    @property
    def n_outcomes(self) -> int:
        return len(self.pointer_projectors)

    @property
    def joint_dim(self) -> int:
        return self.dim_system * self.dim_ancilla


@dataclass(frozen=True, eq=False)
class Povm:
    elements: Tuple[np.ndarray, ...]
    outcome_values: Tuple[float, ...]

    def __post_init__(self):
        elements = tuple(as_matrix(m) for m in self.elements)
        dim = elements[0].shape[0]
        for k, m in enumerate(elements):
            if m.shape != (dim, dim):
                raise DimensionError(f"POVM element {k} has shape {m.shape}")
            if np.max(np.abs(m - dagger(m))) > POVM_TOL:
                raise NonPhysicalError(f"POVM element {k} is not Hermitian")
            if scipy.linalg.eigvalsh(0.5 * (m + dagger(m)))[0] < -POVM_TOL:
                raise NonPhysicalError(f"POVM element {k} is not positive")
        if np.max(np.abs(sum(elements) - np.eye(dim))) > POVM_TOL:
            raise NonPhysicalError("POVM elements do not sum to the identity")
        if len(self.outcome_values) != len(elements):
            raise DimensionError(f"{len(self.outcome_values)} outcome values for {len(elements)} elements")
        object.__setattr__(self, "elements", tuple(_freeze(m) for m in elements))
        object.__setattr__(self, "outcome_values", tuple(float(x) for x in self.outcome_values))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def probabilities(self, rho: DensityMatrix) -> np.ndarray:
        return np.array([np.trace(rho.matrix @ m).real for m in self.elements])

    def expected_value(self, rho: DensityMatrix) -> float:
        return float(np.dot(self.outcome_values, self.probabilities(rho)))


@dataclass(frozen=True, eq=False)
class MeterMu:
    """Projective qubit meter in an orthonormal basis {|0>, |1>} (columns of ``basis``)"""
    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis)
        if b.shape != (2, 2):
            raise DimensionError(f"Meter basis must be 2x2, got {b.shape}")
        if np.max(np.abs(dagger(b) @ b - np.eye(2))) > METER_TOL:
            raise OrthonormalityError("Meter basis is not orthonormal")
        object.__setattr__(self, "basis", _freeze(b))

    @classmethod
    def computational(cls) -> "MeterMu":
        return cls(np.eye(2, dtype=np.complex128))

    def projector(self, outcome: int) -> np.ndarray:
        b = self.basis[:, outcome]
        return np.outer(b, np.conj(b))

    def measure(self, vector: np.ndarray, dims: Sequence[int], qubit: int,
                outcome: int) -> Tuple[float, Optional[np.ndarray]]:
        """Projects factor ``qubit`` of a pure multi-party state onto the given outcome.

        Returns the outcome probability and the renormalized post-measurement
        state, or None for the state when the outcome has zero probability.
        """
        if dims[qubit] != 2:
            raise DimensionError(f"Factor {qubit} has dimension {dims[qubit]}, a meter needs a qubit")
        if outcome not in (0, 1):
            raise RangeError(f"Meter outcome must be 0 or 1, got {outcome}")
        b = self.basis[:, outcome]
        t = np.asarray(vector, dtype=np.complex128).reshape(dims)
        amplitude = np.tensordot(np.conj(b), t, axes=([0], [qubit]))
        probability = float(np.vdot(amplitude, amplitude).real)
        if probability <= 0.0:
            return 0.0, None
        post = np.moveaxis(np.multiply.outer(b, amplitude), 0, qubit).reshape(-1)
        return probability, post / np.sqrt(probability)


def projective_apparatus(basis: Any, values: Sequence[float]) -> Apparatus:
    """Direct projective measurement in an orthonormal basis (ancilla of dimension 1)"""
    b = as_matrix(basis)
    dim = b.shape[0]
    if b.shape != (dim, dim) or np.max(np.abs(dagger(b) @ b - np.eye(dim))) > PROJECTOR_TOL:
        raise OrthonormalityError("Measurement basis must be a complete orthonormal set of columns")
    projectors = tuple(np.outer(b[:, k], np.conj(b[:, k])) for k in range(dim))
    return Apparatus(
        dim_system=dim,
        dim_ancilla=1,
        ancilla_init=np.ones(1, dtype=np.complex128),
        joint_unitary=np.eye(dim, dtype=np.complex128),
        pointer_projectors=projectors,
        outcome_values=tuple(values),
    )


def spin_meter(axis: str = "z") -> Apparatus:
    """Stern-Gerlach meter along x, y or z: outcome 0 is spin +1, outcome 1 is spin -1"""
    r = 1.0 / np.sqrt(2.0)
    bases = {
        "x": np.array([[r, r], [r, -r]], dtype=np.complex128),
        "y": np.array([[r, r], [1j * r, -1j * r]], dtype=np.complex128),
        "z": np.eye(2, dtype=np.complex128),
    }
    if axis not in bases:
        raise RangeError(f"Unknown spin axis {axis!r}")
    return projective_apparatus(bases[axis], (1.0, -1.0))


def trivial_apparatus(dim: int) -> Apparatus:
    """One-outcome apparatus: always reads 1"""
    return Apparatus(
        dim_system=dim,
        dim_ancilla=1,
        ancilla_init=np.ones(1, dtype=np.complex128),
        joint_unitary=np.eye(dim, dtype=np.complex128),
        pointer_projectors=(np.eye(dim, dtype=np.complex128),),
        outcome_values=(1.0,),
    )


def random_apparatus(dim_system: int, dim_ancilla: int, n_outcomes: int, seed: SeedLike) -> Apparatus:
    """Arbitrary black box: Haar joint unitary, pointer blocks of a random orthonormal basis"""
    joint = dim_system * dim_ancilla
    if not 1 <= n_outcomes <= joint:
        raise RangeError(f"Outcome count {n_outcomes} must lie in [1, {joint}]")
    rng = make_rng(seed)
    unitary = random_unitary(joint, rng)
    pointer_basis = random_unitary(joint, rng)
    sizes = 1 + rng.multinomial(joint - n_outcomes, np.full(n_outcomes, 1.0 / n_outcomes))
    projectors = []
    start = 0
    for size in sizes:
        block = pointer_basis[:, start:start + size]
        projectors.append(block @ dagger(block))
        start += size
    values = rng.uniform(-1.0, 1.0, size=n_outcomes)
    return Apparatus(
        dim_system=dim_system,
        dim_ancilla=dim_ancilla,
        ancilla_init=ket(0, dim_ancilla),
        joint_unitary=unitary,
        pointer_projectors=tuple(projectors),
        outcome_values=tuple(values),
    )


def _readout(app: Apparatus, operator: np.ndarray) -> np.ndarray:
    """Pointer readout Tr(Pi_k U (X x |a><a|) U^dagger) for any system operator X"""
    ancilla = np.outer(app.ancilla_init, np.conj(app.ancilla_init))
    joint = np.kron(operator, ancilla)
    evolved = app.joint_unitary @ joint @ dagger(app.joint_unitary)
    return np.array([np.einsum('ij,ji->', p, evolved).real for p in app.pointer_projectors])


def _check_dim(app: Apparatus, dim: int):
    if dim != app.dim_system:
        raise DimensionError(f"State of dimension {dim} fed to an apparatus for dimension {app.dim_system}")


def outcome_distribution(app: Apparatus, rho: DensityMatrix) -> np.ndarray:
    _check_dim(app, rho.dim)
    return _readout(app, rho.matrix)


def outcome_distribution_global(app: Apparatus, psi: BipartiteState) -> np.ndarray:
    """Outcome probabilities for S of a global pure state, the apparatus acting trivially on E"""
    _check_dim(app, psi.dim_s)
    # rows: (system, ancilla) with the system slow, columns: environment
    t = np.einsum('se,a->sae', psi.amplitudes(), app.ancilla_init)
    m = t.reshape(app.joint_dim, psi.dim_e)
    evolved = app.joint_unitary @ m
    return np.array([np.vdot(evolved, p @ evolved).real for p in app.pointer_projectors])


def expected_value(app: Apparatus, rho: DensityMatrix) -> float:
    """F(rho): expected reading of the apparatus scale"""
    return float(np.dot(app.outcome_values, outcome_distribution(app, rho)))


def expected_value_global(app: Apparatus, psi: BipartiteState) -> float:
    return float(np.dot(app.outcome_values, outcome_distribution_global(app, psi)))


def indicator_apparatus(app: Apparatus, outcome_index: int) -> Apparatus:
    """Same dilation with the 0/1 indicator of one outcome as its scale"""
    if not 0 <= outcome_index < app.n_outcomes:
        raise RangeError(f"Outcome index {outcome_index} out of range for {app.n_outcomes} outcomes")
    values = tuple(1.0 if k == outcome_index else 0.0 for k in range(app.n_outcomes))
    return dataclasses.replace(app, outcome_values=values)


def extract_povm(app: Apparatus) -> Povm:
    """Recovers M_k from outcome probabilities on a Frobenius-orthonormal Hermitian basis"""
    basis = hermitian_basis(app.dim_system)
    responses = [_readout(app, h) for h in basis]
    elements = []
    for k in range(app.n_outcomes):
        m = sum(r[k] * h for r, h in zip(responses, basis))
        elements.append(0.5 * (m + dagger(m)))
    logger.debug(f"Extracted {len(elements)} POVM elements in dimension {app.dim_system}")
    return Povm(tuple(elements), app.outcome_values)


def _sample_chunk(cdf: np.ndarray, size: int, seed: int, chunk: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk]))
    draws = np.searchsorted(cdf, rng.random(size), side='right')
    draws = np.minimum(draws, cdf.size - 1)
    return np.bincount(draws, minlength=cdf.size)


def sample_outcomes(app: Apparatus, rho: DensityMatrix, n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Histogram of n independent readouts drawn by inverse CDF.

    Draws are split into fixed-size chunks seeded by (seed, chunk index), so the
    histogram does not depend on the number of workers.
    """
    if n < 1:
        raise RangeError(f"Sample count must be positive, got {n}")
    probabilities = np.clip(outcome_distribution(app, rho), 0.0, None)
    cdf = np.cumsum(probabilities / probabilities.sum())
    chunks = [(c, min(SAMPLE_CHUNK, n - c * SAMPLE_CHUNK)) for c in range(-(-n // SAMPLE_CHUNK))]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            counts = list(executor.map(lambda c: _sample_chunk(cdf, c[1], seed, c[0]), chunks))
    else:
        counts = [_sample_chunk(cdf, size, seed, c) for c, size in chunks]
    return np.sum(counts, axis=0).astype(np.int64)


def apparatus_to_json(app: Apparatus) -> Dict[str, Any]:
    return {
        "dim_system": app.dim_system,
        "dim_ancilla": app.dim_ancilla,
        "ancilla_init": matrix_to_json(app.ancilla_init.reshape(-1, 1)),
        "joint_unitary": matrix_to_json(app.joint_unitary),
        "pointer_projectors": [matrix_to_json(p) for p in app.pointer_projectors],
        "outcome_values": list(app.outcome_values),
    }


def apparatus_from_json(data: Dict[str, Any]) -> Apparatus:
    return Apparatus(
        dim_system=int(data["dim_system"]),
        dim_ancilla=int(data["dim_ancilla"]),
        ancilla_init=matrix_from_json(data["ancilla_init"]).reshape(-1),
        joint_unitary=matrix_from_json(data["joint_unitary"]),
        pointer_projectors=tuple(matrix_from_json(p) for p in data["pointer_projectors"]),
        outcome_values=tuple(float(x) for x in data["outcome_values"]),
    )
