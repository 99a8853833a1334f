"""Executable thought experiments on the linearity of F(rho) = expected apparatus reading.

Joint spaces of the gate experiments are ordered A, B, alpha, beta: particle A
is measured by the apparatus, B purifies it, and alpha/beta are the source qubits.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from apparatus import (
    Apparatus,
    MeterMu,
    expected_value,
    expected_value_global,
    extract_povm,
    outcome_distribution,
    outcome_distribution_global,
    sample_outcomes,
)
from errors import DimensionError, NonPhysicalError, OrderingError, RangeError
from linalg import SeedLike, is_unitary, ket, make_rng, random_density, unitary_mapping
from reconstruction import fit_affine, verify_born
from states import (
    BipartiteState,
    DensityMatrix,
    MixtureComponent,
    NamedState,
    apply_local,
    envariance_unitary,
    equal_up_to_phase,
    mix,
    mixture_density,
    named_state,
    pure_density,
    purify,
    reduced_density,
    schmidt_decompose,
    with_schmidt_phases,
)

logger = logging.getLogger(__name__)

EXACT_TOL = 1e-10
LINEARITY_TOL = 1e-9
SANDWICH_SLACK = 1e-12
DEFAULT_MAX_Q = 8
DEFAULT_GRID_Q = 8
N_SIGMA = 5.0
BELL_AMPLITUDES = (1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class GateG:
    """Controlled transformation on A+B+alpha: identity if alpha is |0>, Psi0 -> Psi1 if alpha is |1>"""
    dim_ab: int
    unitary: np.ndarray

    def __post_init__(self):
        if self.unitary.shape != (2 * self.dim_ab, 2 * self.dim_ab):
            raise DimensionError(f"Gate of shape {self.unitary.shape} does not act on {self.dim_ab} x 2")
        if not is_unitary(self.unitary, EXACT_TOL):
            raise NonPhysicalError("Gate G is not unitary")

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Applies G to a state of A+B+alpha, or of A+B+alpha+(trailing factors)"""
        side = self.unitary.shape[0]
        columns = np.asarray(vector).reshape(side, -1)
        return (self.unitary @ columns).reshape(-1)


@dataclass
class ExperimentReport:
    label: str
    kind: str
    expectation: float
    reference_value: float
    residual: float
    tolerance: float
    conditional_expectations: Tuple[float, ...] = ()
    branch_probability: Optional[float] = None
    details: Dict[str, float] = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(abs(self.residual) <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind,
            "expectation": float(self.expectation),
            "conditional_expectations": [float(x) for x in self.conditional_expectations],
            "branch_probability": None if self.branch_probability is None else float(self.branch_probability),
            "reference_value": float(self.reference_value),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "details": {k: float(v) for k, v in sorted(self.details.items())},
        }


class Preparation(NamedTuple):
    outcome: int
    upper_state: np.ndarray
    probability: float


def interpolate(rho0: DensityMatrix, rho1: DensityMatrix, x: float) -> DensityMatrix:
    """rho_x = (1 - x) rho0 + x rho1"""
    if x <= 0.0:
        return rho0
    if x >= 1.0:
        return rho1
    return mix([(1.0 - x, rho0), (x, rho1)])


def common_purifications(rho0: DensityMatrix, rho1: DensityMatrix) -> Tuple[BipartiteState, BipartiteState]:
    """Purifications of both states sharing one environment of dimension max(rank0, rank1)"""
    if rho0.dim != rho1.dim:
        raise DimensionError(f"States of dimensions {rho0.dim} and {rho1.dim} cannot share a gate")
    dim_e = max(rho0.rank(), rho1.rank())
    return purify(rho0, dim_e), purify(rho1, dim_e)


def build_gate_g(psi0: BipartiteState, psi1: BipartiteState) -> GateG:
    if (psi0.dim_s, psi0.dim_e) != (psi1.dim_s, psi1.dim_e):
        raise DimensionError(
            f"Gate states live in {psi0.dim_s}x{psi0.dim_e} and {psi1.dim_s}x{psi1.dim_e}"
        )
    dim_ab = psi0.dim_s * psi0.dim_e
    mapping = unitary_mapping(psi0.vector, psi1.vector)
    control0 = np.diag([1.0, 0.0]).astype(np.complex128)
    control1 = np.diag([0.0, 1.0]).astype(np.complex128)
    gate = GateG(dim_ab, np.kron(np.eye(dim_ab), control0) + np.kron(mapping, control1))

    for k in range(dim_ab):
        basis_state = np.kron(ket(k, dim_ab), ket(0, 2))
        if np.linalg.norm(gate.apply(basis_state) - basis_state) > EXACT_TOL:
            raise DimensionError("Gate G does not act as identity on the |0> control sector")
    mapped = gate.apply(np.kron(psi0.vector, ket(1, 2)))
    if np.linalg.norm(mapped - np.kron(psi1.vector, ket(1, 2))) > EXACT_TOL:
        raise DimensionError("Gate G does not map Psi0|1> to Psi1|1>")
    return gate


def source_state(amplitudes: Tuple[float, float] = BELL_AMPLITUDES) -> np.ndarray:
    """c0|0>|0> + c1|1>|1> on the qubits alpha, beta"""
    c0, c1 = amplitudes
    return c0 * np.kron(ket(0, 2), ket(0, 2)) + c1 * np.kron(ket(1, 2), ket(1, 2))


def _after_gate(gate: GateG, dim_a: int, vector: np.ndarray) -> BipartiteState:
    final = gate.apply(vector)
    return BipartiteState(dim_a, final.size // dim_a, final / np.linalg.norm(final))


def _unmeasured_run(psi0: BipartiteState, psi1: BipartiteState, amplitudes, app: Apparatus):
    """Experiment without the meter: returns A's reduced state after G and the expected reading"""
    gate = build_gate_g(psi0, psi1)
    final = _after_gate(gate, psi0.dim_s, np.kron(psi0.vector, source_state(amplitudes)))
    return reduced_density(final), expected_value_global(app, final)


def _metered_run(psi0: BipartiteState, psi1: BipartiteState, amplitudes, app: Apparatus,
                 meter: MeterMu):
    """Experiment with beta measured first: returns a = P(meter reads 1) and E_0, E_1"""
    gate = build_gate_g(psi0, psi1)
    initial = np.kron(psi0.vector, source_state(amplitudes))
    dims = [psi0.dim_s, psi0.dim_e, 2, 2]
    probabilities = []
    conditionals = []
    for outcome in (0, 1):
        probability, post = meter.measure(initial, dims, qubit=3, outcome=outcome)
        probabilities.append(probability)
        if post is None:
            conditionals.append(0.0)
            continue
        conditionals.append(expected_value_global(app, _after_gate(gate, psi0.dim_s, post)))
    return probabilities[1], tuple(conditionals)


def run_fig2(meter1: Optional[MeterMu] = None, seed: SeedLike = 0) -> Preparation:
    """Bell pair, lower qubit measured by meter1; returns the outcome and the upper qubit's state"""
    meter1 = meter1 or MeterMu.computational()
    phi = named_state(NamedState.BELL_PHI)
    p1, _ = meter1.measure(phi.vector, [2, 2], qubit=1, outcome=1)
    outcome = 1 if make_rng(seed).random() < p1 else 0
    probability = p1 if outcome == 1 else 1.0 - p1
    return Preparation(outcome, fig2_conditional_state(meter1, outcome), probability)


def fig2_conditional_state(meter1: MeterMu, outcome: int) -> np.ndarray:
    """Upper-qubit state at point X given the lower qubit's meter outcome"""
    phi = named_state(NamedState.BELL_PHI)
    _, post = meter1.measure(phi.vector, [2, 2], qubit=1, outcome=outcome)
    upper = post.reshape(2, 2) @ np.conj(meter1.basis[:, outcome])
    return upper / np.linalg.norm(upper)


def run_fig3a(rho0: DensityMatrix, rho1: DensityMatrix, app: Apparatus,
              tol: float = EXACT_TOL, label: str = "fig3a") -> ExperimentReport:
    """Source S emits Psi0, source Q emits the Bell pair, A+B+alpha pass through G, A is measured"""
    psi0, psi1 = common_purifications(rho0, rho1)
    rho_a, expectation = _unmeasured_run(psi0, psi1, BELL_AMPLITUDES, app)
    midpoint = mix([(0.5, rho0), (0.5, rho1)])
    reference = expected_value(app, midpoint)
    details = {
        "expectation": abs(expectation - reference),
        "reduced_state": rho_a.distance(midpoint),
    }
    return ExperimentReport(label, "fig3a", expectation, reference, max(details.values()), tol,
                            details=details)


def run_fig3b(rho0: DensityMatrix, rho1: DensityMatrix, app: Apparatus,
              meter: Optional[MeterMu] = None, tol: float = EXACT_TOL,
              label: str = "fig3b") -> ExperimentReport:
    """Same as fig3a with beta measured by meter mu before the gate (law of total expectation)"""
    meter = meter or MeterMu.computational()
    psi0, psi1 = common_purifications(rho0, rho1)
    a, (e0, e1) = _metered_run(psi0, psi1, BELL_AMPLITUDES, app, meter)
    expectation = (1.0 - a) * e0 + a * e1
    _, unmeasured = _unmeasured_run(psi0, psi1, BELL_AMPLITUDES, app)
    f0, f1 = expected_value(app, rho0), expected_value(app, rho1)
    details = {
        "conditional_0": abs(e0 - f0),
        "conditional_1": abs(e1 - f1),
        "deferred_measurement": abs(expectation - unmeasured),
        "branch_probability": abs(a - 0.5),
    }
    logger.debug(f"fig3b a={a:.15f} E0={e0:.12f} E1={e1:.12f}")
    return ExperimentReport(label, "fig3b", expectation, unmeasured, max(details.values()), tol,
                            conditional_expectations=(e0, e1), branch_probability=a, details=details)


def check_midpoint(rho0: DensityMatrix, rho1: DensityMatrix, app: Apparatus,
                   tol: float = EXACT_TOL, label: str = "midpoint") -> ExperimentReport:
    """F((rho0 + rho1)/2) = (F(rho0) + F(rho1))/2 as the sum of the relation and its swap"""
    f0, f1 = expected_value(app, rho0), expected_value(app, rho1)
    f_mid = expected_value(app, mix([(0.5, rho0), (0.5, rho1)]))
    a = abs(BELL_AMPLITUDES[1]) ** 2
    details = {
        "f_p1": abs(f_mid - ((1.0 - a) * f0 + a * f1)),
        "f_p2": abs(f_mid - ((1.0 - a) * f1 + a * f0)),
        "midpoint": abs(f_mid - 0.5 * (f0 + f1)),
    }
    return ExperimentReport(label, "midpoint", f_mid, 0.5 * (f0 + f1), details["midpoint"], tol,
                            branch_probability=a, details=details)


def check_dyadic(rho0: DensityMatrix, rho1: DensityMatrix, app: Apparatus, p: int, q: int,
                 max_q: int = DEFAULT_MAX_Q, tol: float = LINEARITY_TOL,
                 label: str = "dyadic") -> ExperimentReport:
    """Linearity at lambda = p/2^q by nested midpoints and by direct evaluation"""
    if not 0 <= q <= max_q:
        raise RangeError(f"q must lie in [0, {max_q}], got {q}")
    if not 0 <= p <= 2 ** q:
        raise RangeError(f"p must lie in [0, {2 ** q}], got {p}")
    scale = 2 ** q
    lam = p / scale
    f0, f1 = expected_value(app, rho0), expected_value(app, rho1)

    lo, hi = 0, scale
    f_lo, f_hi = f0, f1
    step_residual = 0.0
    while p not in (lo, hi):
        mid = (lo + hi) // 2
        f_mid = 0.5 * (f_lo + f_hi)
        direct_mid = expected_value(app, interpolate(rho0, rho1, mid / scale))
        step_residual = max(step_residual, abs(direct_mid - f_mid))
        if p < mid:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    iterated = f_lo if p == lo else f_hi

    direct = expected_value(app, interpolate(rho0, rho1, lam))
    reference = (1.0 - lam) * f0 + lam * f1
    details = {
        "iterated": abs(iterated - reference),
        "direct": abs(direct - reference),
        "midpoint_steps": step_residual,
        "lambda": lam,
    }
    residual = max(details["iterated"], details["direct"], details["midpoint_steps"])
    return ExperimentReport(label, "dyadic", direct, reference, residual, tol, details=details)


def _grid_bracket(rho0: DensityMatrix, rho1: DensityMatrix, app: Apparatus, lam: float, q: int,
                  orientation: float) -> Tuple[float, float]:
    """sup of F over grid points below lambda and inf over grid points above it.

    ``orientation`` is +1 when F(rho0) <= F(rho1) and -1 when the two states
    are relabeled, so that the bracket is taken in the ascending direction.
    """
    scale = 2 ** q
    below, above = [], []
    for k in range(scale + 1):
        x = k / scale
        value = orientation * expected_value(app, interpolate(rho0, rho1, x))
        if x < lam:
            below.append(value)
        elif x > lam:
            above.append(value)
    return orientation * max(below), orientation * min(above)


def dyadic_bracket(rho0: DensityMatrix, rho1: DensityMatrix, app: Apparatus, lam: float,
                   q: int = DEFAULT_GRID_Q, tol: float = LINEARITY_TOL,
                   label: str = "dyadic_bracket") -> ExperimentReport:
    """Finite-grid sup/inf of F(rho_x) on both sides of lambda bracket F(rho_lambda) and approach it"""
    if not 0.0 < lam < 1.0:
        raise RangeError(f"lambda must lie strictly inside (0, 1), got {lam}")
    f0, f1 = expected_value(app, rho0), expected_value(app, rho1)
    orientation = 1.0 if f0 <= f1 else -1.0
    f_lam = expected_value(app, interpolate(rho0, rho1, lam))
    reference = (1.0 - lam) * f0 + lam * f1
    sup_minus, inf_plus = _grid_bracket(rho0, rho1, app, lam, q, orientation)
    gap = abs(f1 - f0) / 2 ** q
    details = {
        "sup_below": max(0.0, orientation * (sup_minus - f_lam) - SANDWICH_SLACK),
        "inf_above": max(0.0, orientation * (f_lam - inf_plus) - SANDWICH_SLACK),
        "sup_gap": max(0.0, abs(sup_minus - reference) - gap),
        "inf_gap": max(0.0, abs(inf_plus - reference) - gap),
        "answer": abs(f_lam - reference),
    }
    return ExperimentReport(label, "dyadic_bracket", f_lam, reference, max(details.values()), tol,
                            details=details)


def run_appendix(xi: float, lam: float, eta: float, rho0: DensityMatrix, rho1: DensityMatrix,
                 app: Apparatus, tol: float = LINEARITY_TOL, grid_q: Optional[int] = DEFAULT_GRID_Q,
                 label: str = "appendix") -> ExperimentReport:
    """Modified experiment with source amplitudes sqrt((eta-lam)/(eta-xi)), sqrt((lam-xi)/(eta-xi))"""
    if not (0.0 <= xi <= 1.0 and 0.0 <= eta <= 1.0):
        raise RangeError(f"xi and eta must lie in [0, 1], got {xi}, {eta}")
    if not xi < lam < eta:
        raise OrderingError(f"Expected xi < lambda < eta, got {xi}, {lam}, {eta}")

    f0, f1 = expected_value(app, rho0), expected_value(app, rho1)
    # F(rho0) <= F(rho1) is the convention for the inequalities; otherwise relabel
    orientation = 1.0 if f0 <= f1 else -1.0
    rho_xi = interpolate(rho0, rho1, xi)
    rho_eta = interpolate(rho0, rho1, eta)
    rho_lam = interpolate(rho0, rho1, lam)
    f_xi, f_eta, f_lam = (expected_value(app, r) for r in (rho_xi, rho_eta, rho_lam))

    amplitudes = (np.sqrt((eta - lam) / (eta - xi)), np.sqrt((lam - xi) / (eta - xi)))
    psi0, psi1 = common_purifications(rho_xi, rho_eta)
    rho_a, expectation = _unmeasured_run(psi0, psi1, amplitudes, app)
    a_tilde, (e0, e1) = _metered_run(psi0, psi1, amplitudes, app, MeterMu.computational())

    reference = (1.0 - lam) * f0 + lam * f1
    details = {
        "reduced_state": rho_a.distance(rho_lam),
        "branch_probability": abs(a_tilde - (lam - xi) / (eta - xi)),
        "expectation": abs(expectation - f_lam),
        "total_expectation": abs(f_lam - ((1.0 - a_tilde) * f_xi + a_tilde * f_eta)),
        "conditionals": max(abs(e0 - f_xi), abs(e1 - f_eta)),
        "sandwich_low": max(0.0, orientation * (f_xi - f_lam) - SANDWICH_SLACK),
        "sandwich_high": max(0.0, orientation * (f_lam - f_eta) - SANDWICH_SLACK),
        "answer": abs(f_lam - reference),
    }
    if grid_q is not None:
        bracket = dyadic_bracket(rho0, rho1, app, lam, grid_q, tol)
        details["grid_bracket"] = bracket.residual
    residual = max(details.values())
    details["relabeled"] = 0.0 if orientation > 0 else 1.0
    return ExperimentReport(label, "appendix", expectation, reference, residual, tol,
                            conditional_expectations=(e0, e1), branch_probability=a_tilde,
                            details=details)


def _chained_residual(probabilities: Sequence[float], rhos: Sequence[DensityMatrix], app: Apparatus) -> float:
    """Worst induction step p1 F1 + (1-p1) F(rest) with the rest renormalized"""
    worst = 0.0
    for i in range(len(rhos) - 1):
        rest = np.asarray(probabilities[i + 1:], dtype=np.float64)
        weight = rest.sum()
        if weight <= 0.0:
            break
        weights = rest / weight
        weights[-1] = 1.0 - weights[:-1].sum()
        inner = mix(list(zip(weights.tolist(), rhos[i + 1:])))
        lhs = sum(w * expected_value(app, r) for w, r in zip(weights, rhos[i + 1:]))
        worst = max(worst, abs(lhs - expected_value(app, inner)))
    return worst


def check_general_mixture(components: Sequence[MixtureComponent], app: Apparatus,
                          tol: float = EXACT_TOL, label: str = "mixture") -> ExperimentReport:
    """Law of total expectation over a mixture of pure states and improper mixtures"""
    rho = mixture_density(components)
    probabilities = [c.probability for c in components]
    rhos = [reduced_density(c.state) for c in components]
    per_component = [expected_value_global(app, c.state) for c in components]
    total = float(np.dot(probabilities, per_component))
    f_rho = expected_value(app, rho)
    weighted = float(np.dot(probabilities, [expected_value(app, r) for r in rhos]))
    details = {
        "expected_kth": max(abs(e - expected_value(app, r)) for e, r in zip(per_component, rhos)),
        "main_n": abs(weighted - f_rho),
        "total_expectation": abs(total - f_rho),
        "chained": _chained_residual(probabilities, rhos, app),
    }
    return ExperimentReport(label, "mixture", total, f_rho, max(details.values()), tol, details=details)


def check_envariance(psi: BipartiteState, phases: Sequence[float], app: Apparatus,
                     tol: float = EXACT_TOL, label: str = "envariance") -> ExperimentReport:
    """Phases of Schmidt coefficients are invisible to any apparatus acting on S"""
    decomposition = schmidt_decompose(psi)
    rank = decomposition.schmidt_rank
    if len(phases) != rank:
        raise RangeError(f"Got {len(phases)} phases for Schmidt rank {rank}")
    shifted = with_schmidt_phases(decomposition, phases)
    original = outcome_distribution_global(app, psi)
    after = outcome_distribution_global(app, shifted)
    u_e = envariance_unitary(phases, decomposition.e_basis[:, :rank])
    restored = apply_local(shifted, u_e=u_e)
    details = {
        "total_variation": 0.5 * float(np.sum(np.abs(original - after))),
        "restored_state": equal_up_to_phase(restored.vector, psi.vector),
        "reduced_state": reduced_density(shifted).distance(reduced_density(psi)),
    }
    return ExperimentReport(
        label, "envariance",
        float(np.dot(app.outcome_values, after)),
        float(np.dot(app.outcome_values, original)),
        max(details.values()), tol, details=details,
    )


def spin_case_study(app: Apparatus, outcome_index: int = 0, tol: float = EXACT_TOL,
                    label: str = "spin") -> ExperimentReport:
    """Up/down mixture, left/right mixture and the singlet half all give P = b"""
    if app.dim_system != 2:
        raise DimensionError(f"Spin case study needs a qubit apparatus, got dimension {app.dim_system}")
    form = fit_affine(app, outcome_index)

    def probability(name: NamedState) -> float:
        return float(outcome_distribution(app, pure_density(named_state(name)))[outcome_index])

    p_up, p_down = probability(NamedState.UP), probability(NamedState.DOWN)
    p_m1 = 0.5 * p_up + 0.5 * p_down
    p_m2 = 0.5 * probability(NamedState.LEFT) + 0.5 * probability(NamedState.RIGHT)
    p_singlet = float(outcome_distribution_global(app, named_state(NamedState.SINGLET))[outcome_index])
    details = {
        "m1_vs_m2": abs(p_m1 - p_m2),
        "m1": abs(p_m1 - form.b),
        "m2": abs(p_m2 - form.b),
        "singlet": abs(p_singlet - form.b),
        "up": abs(p_up - (form.a[2] + form.b)),
        "down": abs(p_down - (form.b - form.a[2])),
    }
    return ExperimentReport(label, "spin", p_m1, form.b, max(details.values()), tol,
                            conditional_expectations=(p_m1, p_m2, p_singlet), details=details)


def estimate_expectation(app: Apparatus, rho: DensityMatrix, n: int, seed: int,
                         workers: int = 1) -> Tuple[float, float]:
    """Empirical mean reading over n draws and its standard error under the exact distribution"""
    counts = sample_outcomes(app, rho, n, seed, workers)
    values = np.asarray(app.outcome_values)
    probabilities = outcome_distribution(app, rho)
    mean = float(np.dot(counts, values) / n)
    variance = float(np.dot(probabilities, values ** 2) - np.dot(probabilities, values) ** 2)
    return mean, float(np.sqrt(max(variance, 0.0) / n))


def check_sampled_expectation(app: Apparatus, rho: DensityMatrix, n: int, seed: int,
                              n_sigma: float = N_SIGMA, workers: int = 1,
                              label: str = "sampled") -> ExperimentReport:
    """Sampled mean within n_sigma standard errors of the exact F(rho)"""
    mean, stderr = estimate_expectation(app, rho, n, seed, workers)
    exact = expected_value(app, rho)
    tolerance = max(n_sigma * stderr, EXACT_TOL)
    return ExperimentReport(label, "sampled", mean, exact, abs(mean - exact), tolerance,
                            details={"draws": float(n), "standard_error": stderr})


def check_sampled_histogram(app: Apparatus, rho: DensityMatrix, n: int, seed: int,
                            n_sigma: float = N_SIGMA, workers: int = 1,
                            label: str = "histogram") -> ExperimentReport:
    """Every outcome count within n_sigma binomial deviations of n P_k; residual in units of sigma"""
    counts = sample_outcomes(app, rho, n, seed, workers)
    probabilities = np.clip(outcome_distribution(app, rho), 0.0, 1.0)
    details: Dict[str, float] = {}
    worst = 0.0
    for k, (count, p) in enumerate(zip(counts, probabilities)):
        sigma = np.sqrt(n * p * (1.0 - p))
        deviation = abs(count - n * p)
        score = deviation / sigma if sigma > 0 else (0.0 if deviation == 0 else np.inf)
        details[f"count_{k}"] = float(count)
        worst = max(worst, float(score))
    return ExperimentReport(label, "histogram", float(counts[0]), float(n * probabilities[0]),
                            worst, n_sigma, details=details)


def check_povm_extraction(app: Apparatus, n_states: int = 50, seed: SeedLike = 0,
                          tol: float = LINEARITY_TOL, label: str = "povm") -> ExperimentReport:
    """Extracted POVM is complete, positive and predicts the engine on random states"""
    povm = extract_povm(app)
    rng = make_rng(seed)
    completeness = float(np.max(np.abs(sum(povm.elements) - np.eye(povm.dim))))
    min_eigenvalue = min(float(np.linalg.eigvalsh(m)[0]) for m in povm.elements)
    prediction = 0.0
    for _ in range(n_states):
        rank = int(rng.integers(1, povm.dim + 1))
        rho = DensityMatrix(random_density(povm.dim, rank, rng))
        gap = np.abs(povm.probabilities(rho) - outcome_distribution(app, rho))
        prediction = max(prediction, float(np.max(gap)))
    details = {
        "completeness": completeness,
        "positivity": max(0.0, -min_eigenvalue),
        "prediction": prediction,
    }
    return ExperimentReport(label, "povm", float(app.n_outcomes), float(len(povm.elements)),
                            max(details.values()), tol, details=details)


def check_born(app: Apparatus, psi1, trials: int = 100, seed: SeedLike = 0,
               tol: float = LINEARITY_TOL, label: str = "born") -> ExperimentReport:
    """Born certificate of a two-branch apparatus as a pass/fail report"""
    certificate = verify_born(app, psi1, trials, seed)
    details = {
        "p1_norm": abs(certificate.p1.norm - 1.0),
        "p2_antipodal": float(np.linalg.norm(certificate.p2.p + certificate.p1.p)),
        "born": certificate.max_abs_error,
        "closed_form": certificate.closed_form_error,
    }
    return ExperimentReport(label, "born", certificate.max_abs_error, 0.0, max(details.values()), tol,
                            details=details)
