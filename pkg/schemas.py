"""
pydantic models of the experiment file read by ``rho-lab run``
"""
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from apparatus import (
    Apparatus,
    MeterMu,
    apparatus_from_json,
    random_apparatus,
    sample_outcomes,
    spin_meter,
    trivial_apparatus,
)
from errors import ConfigError
from experiments import (
    EXACT_TOL,
    LINEARITY_TOL,
    N_SIGMA,
    ExperimentReport,
    check_born,
    check_dyadic,
    check_envariance,
    check_general_mixture,
    check_midpoint,
    check_povm_extraction,
    check_sampled_expectation,
    dyadic_bracket,
    run_appendix,
    run_fig3a,
    run_fig3b,
    spin_case_study,
)
from linalg import matrix_from_json
from reconstruction import two_branch_apparatus
from states import (
    BipartiteState,
    BlochVector,
    DensityMatrix,
    MixtureComponent,
    bloch_to_density,
    mix,
    named_state,
    pure_density,
    reduced_density,
)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ComplexVectorModel(StrictModel):
    re: List[float]
    im: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_lengths(self):
        if self.im is not None and len(self.im) != len(self.re):
            raise ValueError(f"re has {len(self.re)} entries but im has {len(self.im)}")
        return self

    def to_array(self) -> np.ndarray:
        im = self.im if self.im is not None else [0.0] * len(self.re)
        return np.asarray(self.re, dtype=np.float64) + 1j * np.asarray(im, dtype=np.float64)


class ComplexMatrixModel(StrictModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    def to_array(self) -> np.ndarray:
        return matrix_from_json(self.model_dump(exclude_none=True))


# --- bipartite states ---

class NamedBipartite(StrictModel):
    type: Literal["named"]
    name: Literal["bell_phi", "singlet", "triplet0"]

    def build(self) -> BipartiteState:
        return named_state(self.name)


class VectorBipartite(StrictModel):
    type: Literal["vector"]
    dim_s: int = Field(ge=1)
    dim_e: int = Field(ge=1)
    vector: ComplexVectorModel

    def build(self) -> BipartiteState:
        return BipartiteState(self.dim_s, self.dim_e, self.vector.to_array())


BipartiteSpec = Annotated[Union[NamedBipartite, VectorBipartite], Field(discriminator="type")]


# --- density matrices ---

class NamedDensity(StrictModel):
    """Spin states give |v><v|, two-spin states give the reduced state of the first spin"""
    type: Literal["named"]
    name: Literal["up", "down", "left", "right", "bell_phi", "singlet", "triplet0"]

    def build(self) -> DensityMatrix:
        state = named_state(self.name)
        if isinstance(state, BipartiteState):
            return reduced_density(state)
        return pure_density(state)


class BlochDensity(StrictModel):
    type: Literal["bloch"]
    p: List[float] = Field(min_length=3, max_length=3)

    def build(self) -> DensityMatrix:
        return bloch_to_density(BlochVector(np.asarray(self.p)))


class MatrixDensity(StrictModel):
    type: Literal["matrix"]
    matrix: ComplexMatrixModel

    def build(self) -> DensityMatrix:
        return DensityMatrix(self.matrix.to_array())


class PureDensity(StrictModel):
    type: Literal["pure"]
    vector: ComplexVectorModel

    def build(self) -> DensityMatrix:
        return pure_density(self.vector.to_array())


class ReducedDensity(StrictModel):
    type: Literal["reduced"]
    state: BipartiteSpec

    def build(self) -> DensityMatrix:
        return reduced_density(self.state.build())


class WeightedDensity(StrictModel):
    probability: float = Field(ge=0.0, le=1.0)
    state: "DensitySpec"


class MixtureDensity(StrictModel):
    type: Literal["mixture"]
    components: List[WeightedDensity] = Field(min_length=1)

    def build(self) -> DensityMatrix:
        return mix([(c.probability, c.state.build()) for c in self.components])


DensitySpec = Annotated[
    Union[NamedDensity, BlochDensity, MatrixDensity, PureDensity, ReducedDensity, MixtureDensity],
    Field(discriminator="type"),
]
WeightedDensity.model_rebuild()
MixtureDensity.model_rebuild()


class ComponentModel(StrictModel):
    probability: float = Field(ge=0.0, le=1.0)
    state: BipartiteSpec


# --- apparatus ---

class SpinApparatus(StrictModel):
    type: Literal["spin"]
    axis: Literal["x", "y", "z"] = "z"

    def build(self) -> Apparatus:
        return spin_meter(self.axis)


class RandomApparatus(StrictModel):
    type: Literal["random"]
    dim_system: int = Field(ge=1)
    dim_ancilla: int = Field(ge=1)
    n_outcomes: int = Field(ge=1)
    seed: int = Field(default=0, ge=0)

    def build(self) -> Apparatus:
        return random_apparatus(self.dim_system, self.dim_ancilla, self.n_outcomes, self.seed)


class TwoBranchApparatus(StrictModel):
    type: Literal["two_branch"]
    psi1: ComplexVectorModel

    def build(self) -> Apparatus:
        return two_branch_apparatus(self.psi1.to_array())


class TrivialApparatus(StrictModel):
    type: Literal["trivial"]
    dim: int = Field(ge=1)

    def build(self) -> Apparatus:
        return trivial_apparatus(self.dim)


class ExplicitApparatus(StrictModel):
    type: Literal["explicit"]
    dim_system: int = Field(ge=1)
    dim_ancilla: int = Field(ge=1)
    ancilla_init: ComplexMatrixModel
    joint_unitary: ComplexMatrixModel
    pointer_projectors: List[ComplexMatrixModel] = Field(min_length=1)
    outcome_values: List[float] = Field(min_length=1)

    def build(self) -> Apparatus:
        return apparatus_from_json(self.model_dump(exclude={"type"}, exclude_none=True))


ApparatusSpec = Annotated[
    Union[SpinApparatus, RandomApparatus, TwoBranchApparatus, TrivialApparatus, ExplicitApparatus],
    Field(discriminator="type"),
]


# --- experiments ---

_REQUIRED = {
    "fig3a": ("rho0", "rho1", "apparatus"),
    "fig3b": ("rho0", "rho1", "apparatus"),
    "midpoint": ("rho0", "rho1", "apparatus"),
    "dyadic": ("rho0", "rho1", "apparatus", "p", "q"),
    "dyadic_bracket": ("rho0", "rho1", "apparatus", "lam"),
    "appendix": ("rho0", "rho1", "apparatus", "xi", "lam", "eta"),
    "mixture": ("components", "apparatus"),
    "envariance": ("psi", "phases", "apparatus"),
    "spin": ("apparatus",),
    "born": ("psi1",),
    "povm": ("apparatus",),
    "sampled": ("rho0", "apparatus"),
}


class ExperimentSpec(StrictModel):
    kind: Literal[
        "fig3a", "fig3b", "midpoint", "dyadic", "dyadic_bracket", "appendix",
        "mixture", "envariance", "spin", "born", "povm", "sampled",
    ]
    label: Optional[str] = None
    apparatus: Optional[ApparatusSpec] = None
    rho0: Optional[DensitySpec] = None
    rho1: Optional[DensitySpec] = None
    meter_basis: Optional[ComplexMatrixModel] = None
    components: Optional[List[ComponentModel]] = None
    psi: Optional[BipartiteSpec] = None
    phases: Optional[List[float]] = None
    psi1: Optional[ComplexVectorModel] = None
    xi: Optional[float] = None
    lam: Optional[float] = None
    eta: Optional[float] = None
    p: Optional[int] = None
    q: Optional[int] = None
    outcome_index: int = Field(default=0, ge=0)
    trials: int = Field(default=100, ge=1)
    draws: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0, ge=0)
    tol: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def check_required(self):
        missing = [name for name in _REQUIRED[self.kind] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"kind {self.kind!r} requires {', '.join(missing)}")
        return self

    def _tol(self, default: float) -> float:
        return self.tol if self.tol is not None else default

    def run(self) -> ExperimentReport:
        """Builds the described states and apparatus and runs the experiment"""
        label = self.label or self.kind
        app = self.apparatus.build() if self.apparatus is not None else None
        rho0 = self.rho0.build() if self.rho0 is not None else None
        rho1 = self.rho1.build() if self.rho1 is not None else None

        if self.kind == "fig3a":
            return run_fig3a(rho0, rho1, app, self._tol(EXACT_TOL), label)
        if self.kind == "fig3b":
            meter = MeterMu(self.meter_basis.to_array()) if self.meter_basis is not None else None
            return run_fig3b(rho0, rho1, app, meter, self._tol(EXACT_TOL), label)
        if self.kind == "midpoint":
            return check_midpoint(rho0, rho1, app, self._tol(EXACT_TOL), label)
        if self.kind == "dyadic":
            return check_dyadic(rho0, rho1, app, self.p, self.q, tol=self._tol(LINEARITY_TOL), label=label)
        if self.kind == "dyadic_bracket":
            q = self.q if self.q is not None else 8
            return dyadic_bracket(rho0, rho1, app, self.lam, q, self._tol(LINEARITY_TOL), label)
        if self.kind == "appendix":
            return run_appendix(self.xi, self.lam, self.eta, rho0, rho1, app,
                                tol=self._tol(LINEARITY_TOL), label=label)
        if self.kind == "mixture":
            components = [MixtureComponent(c.probability, c.state.build()) for c in self.components]
            return check_general_mixture(components, app, self._tol(EXACT_TOL), label)
        if self.kind == "envariance":
            return check_envariance(self.psi.build(), self.phases, app, self._tol(EXACT_TOL), label)
        if self.kind == "spin":
            return spin_case_study(app, self.outcome_index, self._tol(EXACT_TOL), label)
        if self.kind == "born":
            psi1 = self.psi1.to_array()
            app = app if app is not None else two_branch_apparatus(psi1)
            return check_born(app, psi1, self.trials, self.seed, self._tol(LINEARITY_TOL), label)
        if self.kind == "povm":
            return check_povm_extraction(app, self.trials, self.seed, self._tol(LINEARITY_TOL), label)
        if self.kind == "sampled":
            return check_sampled_expectation(app, rho0, self.draws, self.seed, self._tol(N_SIGMA), label=label)
        raise ConfigError(f"Unknown experiment kind {self.kind!r}")

    def histogram(self) -> np.ndarray:
        """Outcome counts of the draws behind a ``sampled`` experiment"""
        if self.kind != "sampled":
            raise ConfigError(f"Histograms are only produced by sampled experiments, not {self.kind!r}")
        return sample_outcomes(self.apparatus.build(), self.rho0.build(), self.draws, self.seed)


def format_validation_errors(error) -> List[str]:
    """One 'field.path: message' line per pydantic error"""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return lines
