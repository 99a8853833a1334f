import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np
import yaml

from apparatus import Apparatus, random_apparatus, spin_meter
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
    check_sampled_histogram,
    run_appendix,
    run_fig3b,
    spin_case_study,
)
from linalg import random_density, random_state_vector
from progress_tracker import ProgressTracker
from reconstruction import two_branch_apparatus
from states import DensityMatrix, random_bipartite, random_mixture
from utils import derive_seed, format_execution_time

APPENDIX_TRIPLES = ((0.0, 1.0 / np.sqrt(2.0), 1.0), (0.25, 0.5, 0.75), (0.1, 0.37, 0.9))
MIXTURE_SIZES = (1, 3, 5)
DYADIC_LEVEL = 6
POVM_STATES = 50
BORN_STATES = 100
SAMPLE_DRAWS = 100_000
MAX_OUTCOMES = 4
MAX_ENVIRONMENT = 4


class Suite(Enum):
    ENVARIANCE = "envariance"
    LINEARITY = "linearity"
    MIDPOINT = "midpoint"
    DYADIC = "dyadic"
    APPENDIX = "appendix"
    MIXTURES = "mixtures"
    POVM = "povm"
    BORN = "born"
    SPIN = "spin"
    SAMPLING = "sampling"
    ALL = "all"


class ReportFormat(Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


SUITE_TOLERANCES = {
    Suite.ENVARIANCE: EXACT_TOL,
    Suite.LINEARITY: EXACT_TOL,
    Suite.MIDPOINT: EXACT_TOL,
    Suite.DYADIC: LINEARITY_TOL,
    Suite.APPENDIX: LINEARITY_TOL,
    Suite.MIXTURES: EXACT_TOL,
    Suite.POVM: LINEARITY_TOL,
    Suite.BORN: LINEARITY_TOL,
    Suite.SPIN: EXACT_TOL,
}


@dataclass
class SuiteConfig:
    suite: Suite = Suite.ALL
    seed: int = 0
    trials: int = 1
    tol: Optional[float] = None  # None keeps each suite's own tolerance
    dim_system: int = 3
    dim_ancilla: int = 2
    output: Optional[str] = None
    format: ReportFormat = ReportFormat.JSON
    workers: int = 1

    def __post_init__(self):
        try:
            self.suite = Suite(self.suite)
            self.format = ReportFormat(self.format)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.tol is not None and self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.dim_system < 2:
            raise ConfigError(f"dim_system must be at least 2, got {self.dim_system}")
        if self.dim_ancilla < 1:
            raise ConfigError(f"dim_ancilla must be at least 1, got {self.dim_ancilla}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")

    def suites(self) -> List[Suite]:
        if self.suite is Suite.ALL:
            return [s for s in Suite if s is not Suite.ALL]
        return [self.suite]

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["suite"] = self.suite.value
        data["format"] = self.format.value
        return data


def load_config_file(path: str) -> Dict:
    """Reads suite defaults from a YAML file"""
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a mapping, got {type(data).__name__}")
    known = set(SuiteConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown config keys in {path}: {', '.join(unknown)}")
    return data


class SuiteRunner:
    """Runs verification suites as independent seeded trials and merges them in trial order"""

    def __init__(self, config: SuiteConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.progress_tracker = ProgressTracker()
        self._trials: Dict[Suite, Callable[[np.random.Generator, int, float], ExperimentReport]] = {
            Suite.ENVARIANCE: self._envariance_trial,
            Suite.LINEARITY: self._linearity_trial,
            Suite.MIDPOINT: self._midpoint_trial,
            Suite.DYADIC: self._dyadic_trial,
            Suite.APPENDIX: self._appendix_trial,
            Suite.MIXTURES: self._mixture_trial,
            Suite.POVM: self._povm_trial,
            Suite.BORN: self._born_trial,
            Suite.SPIN: self._spin_trial,
            Suite.SAMPLING: self._sampling_trial,
        }

    def run(self) -> List[Dict]:
        self.progress_tracker.reset()
        reports = []
        for suite in self.config.suites():
            reports.extend(self.run_suite(suite))
        return reports

    def run_suite(self, suite: Suite) -> List[Dict]:
        self.logger.info(f"Starting suite {suite.value} with {self.config.trials} trials")
        self.progress_tracker.update(suite.value, "running")
        start = time.perf_counter()

        indices = range(self.config.trials)
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                reports = list(executor.map(lambda i: self._run_trial(suite, i), indices))
        else:
            reports = [self._run_trial(suite, i) for i in indices]

        progress = self.progress_tracker.get(suite.value)
        elapsed = format_execution_time(time.perf_counter() - start)
        self.progress_tracker.update(suite.value, "completed")
        self.logger.info(
            f"Finished suite {suite.value}: {progress.get('passed', 0)} passed, "
            f"{progress.get('failed', 0)} failed in {elapsed}"
        )
        return reports

    def _run_trial(self, suite: Suite, index: int) -> Dict:
        rng = np.random.default_rng(derive_seed(self.config.seed, suite.value, index))
        if suite is Suite.SAMPLING:
            tol = N_SIGMA  # sampling tolerances are counted in standard errors
        else:
            tol = self.config.tol if self.config.tol is not None else SUITE_TOLERANCES[suite]
        report = self._trials[suite](rng, index, tol)
        self.progress_tracker.record(suite.value, report.passed, report.residual)
        if not report.passed:
            self.logger.warning(
                f"Check {report.label} failed: residual {report.residual:.3e} > tolerance {report.tolerance:.3e}"
            )
        data = report.to_dict()
        data["suite"] = suite.value
        data["index"] = index
        return data

    def get_progress(self, suite: Optional[Suite] = None):
        if suite:
            return self.progress_tracker.get(suite.value)
        return self.progress_tracker.all()

    def _dims(self, rng: np.random.Generator):
        dim_s = int(rng.integers(2, self.config.dim_system + 1))
        dim_a = int(rng.integers(1, self.config.dim_ancilla + 1))
        return dim_s, dim_a

    def _apparatus(self, rng: np.random.Generator, dim_s: int, dim_a: int) -> Apparatus:
        n_outcomes = int(rng.integers(1, min(MAX_OUTCOMES, dim_s * dim_a) + 1))
        return random_apparatus(dim_s, dim_a, n_outcomes, rng)

    def _random_pair(self, rng: np.random.Generator, dim_s: int):
        rhos = []
        for _ in range(2):
            rank = int(rng.integers(1, dim_s + 1))
            rhos.append(DensityMatrix(random_density(dim_s, rank, rng)))
        return rhos

    def _envariance_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        dim_e = int(rng.integers(1, MAX_ENVIRONMENT + 1))
        psi = random_bipartite(dim_s, dim_e, rng)
        app = self._apparatus(rng, dim_s, dim_a)
        rank = min(dim_s, dim_e)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=rank).tolist()
        return check_envariance(psi, phases, app, tol, label=f"envariance-{index}")

    def _linearity_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        rho0, rho1 = self._random_pair(rng, dim_s)
        app = self._apparatus(rng, dim_s, dim_a)
        return run_fig3b(rho0, rho1, app, tol=tol, label=f"linearity-{index}")

    def _midpoint_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        rho0, rho1 = self._random_pair(rng, dim_s)
        app = self._apparatus(rng, dim_s, dim_a)
        return check_midpoint(rho0, rho1, app, tol, label=f"midpoint-{index}")

    def _dyadic_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        rho0, rho1 = self._random_pair(rng, dim_s)
        app = self._apparatus(rng, dim_s, dim_a)
        # trial 0 is the worked lambda = 1/4 expansion, the rest sweep p/2^6
        if index == 0:
            p, q = 1, 2
        else:
            p, q = (index - 1) % (2 ** DYADIC_LEVEL + 1), DYADIC_LEVEL
        return check_dyadic(rho0, rho1, app, p, q, tol=tol, label=f"dyadic-{index}")

    def _appendix_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        rho0, rho1 = self._random_pair(rng, dim_s)
        app = self._apparatus(rng, dim_s, dim_a)
        xi, lam, eta = APPENDIX_TRIPLES[index % len(APPENDIX_TRIPLES)]
        return run_appendix(xi, lam, eta, rho0, rho1, app, tol=tol, label=f"appendix-{index}")

    def _mixture_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        components = random_mixture(dim_s, MIXTURE_SIZES[index % len(MIXTURE_SIZES)], rng)
        app = self._apparatus(rng, dim_s, dim_a)
        return check_general_mixture(components, app, tol, label=f"mixtures-{index}")

    def _povm_trial(self, rng, index, tol) -> ExperimentReport:
        dim_s, dim_a = self._dims(rng)
        app = self._apparatus(rng, dim_s, dim_a)
        return check_povm_extraction(app, POVM_STATES, rng, tol, label=f"povm-{index}")

    def _born_trial(self, rng, index, tol) -> ExperimentReport:
        psi1 = random_state_vector(2, rng)
        return check_born(two_branch_apparatus(psi1), psi1, BORN_STATES, rng, tol, label=f"born-{index}")

    def _spin_trial(self, rng, index, tol) -> ExperimentReport:
        dim_a = int(rng.integers(1, self.config.dim_ancilla + 1))
        app = self._apparatus(rng, 2, dim_a)
        outcome = int(rng.integers(0, app.n_outcomes))
        return spin_case_study(app, outcome, tol, label=f"spin-{index}")

    def _sampling_trial(self, rng, index, tol) -> ExperimentReport:
        seed = int(rng.integers(0, 2 ** 63))
        workers = self.config.workers
        if index == 0:
            rho = DensityMatrix(np.eye(2) / 2.0)
            return check_sampled_histogram(spin_meter("z"), rho, SAMPLE_DRAWS, seed, tol, workers,
                                           label=f"sampling-{index}")
        dim_s, dim_a = self._dims(rng)
        rho0, _ = self._random_pair(rng, dim_s)
        app = self._apparatus(rng, dim_s, dim_a)
        return check_sampled_expectation(app, rho0, SAMPLE_DRAWS, seed, tol, workers,
                                         label=f"sampling-{index}")
