# Copyright 2023 The abc_smoothing developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""
Replicated experiments: one dataset, one truth, and the grid of
(method, N, replicate) cells, each run on its own derived random stream.

The cells are independent, so they run on a process pool of `get_env().workers`
processes; records are sorted before they are returned, which makes every output
a pure function of the configuration.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from abc_smoothing.abc.calibration import (
    CalibrationResult,
    EpsilonCalibration,
    calibrate_epsilon,
)
from abc_smoothing.abc.kernels import KernelShape
from abc_smoothing.engines.results import ChainStatus, SmoothingStatus
from abc_smoothing.environment import Environment, get_env
from abc_smoothing.exceptions import ABCSOracleError, ABCSValueError
from abc_smoothing.harness.config import (
    ABC_METHODS,
    PMMH_METHODS,
    ExperimentConfig,
)
from abc_smoothing.model.benchmark import NonlinearGrowthModel
from abc_smoothing.model.benchmark import DEFAULT_THETA as BENCHMARK_THETA
from abc_smoothing.model.functional import AdditiveFunctional, build_functional
from abc_smoothing.model.hmm import HmmModel, ThetaVector, Trajectory, simulate
from abc_smoothing.model.linear_gaussian import DEFAULT_THETA as LG_THETA
from abc_smoothing.model.linear_gaussian import LinearGaussianModel
from abc_smoothing.model.oracles import (
    grid_oracle,
    kalman_functional_expectation,
    kalman_rts,
)
from abc_smoothing.pmmh.chain import PmmhChainState
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.utils import derive_seed


LOGGER = logging.getLogger(__name__)


def l1_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    """
    The dimension-averaged L1 distance `(1/d) sum_k |estimate_k - truth_k|`.

    >>> l1_error(np.array([1.0, -1.0]), np.zeros(2))
    1.0
    >>> round(l1_error(np.array([0.1, -0.1, 0.2, 0.0]), np.zeros(4)), 12)
    0.1
    """
    estimate = np.atleast_1d(np.asarray(estimate, dtype=float))
    truth = np.atleast_1d(np.asarray(truth, dtype=float))
    if estimate.shape != truth.shape:
        raise ABCSValueError(
            f"estimate has shape {estimate.shape}, truth has shape {truth.shape}"
        )
    return float(np.mean(np.abs(estimate - truth)))


@dataclass(frozen=True)
class Truth:
    """The reference value of the smoothed functional; `se` is set for reference runs."""

    value: np.ndarray
    source: str
    se: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ErrorRecord:
    """
    The outcome of one cell. A degenerate cell has no estimate and a `nan` error.
    `abc_error` and `smc_error` split the error of an ABC cell when the exact
    auxiliary-model oracle exists.
    """

    method: str
    n_particles: int
    epsilon: Optional[float]
    replicate: int
    estimate: Optional[np.ndarray]
    truth: np.ndarray
    error: float
    walltime_ms: float
    degenerate: bool
    abc_error: Optional[float] = None
    smc_error: Optional[float] = None

    @property
    def cell(self) -> Tuple[str, int, int]:
        return (self.method, self.n_particles, self.replicate)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    n_particles: int
    epsilon: Optional[float]
    replicates: int
    mean_error: float
    se_error: float
    degenerate_count: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    observations: np.ndarray
    truth: Truth
    records: List[ErrorRecord]
    summaries: List[SummaryRow]
    epsilons: Dict[Tuple[str, int], Optional[float]] = field(default_factory=dict)
    calibrations: Dict[Tuple[str, int], CalibrationResult] = field(default_factory=dict)
    chains: Dict[Tuple[str, int, int], List[PmmhChainState]] = field(default_factory=dict)


def build_model(config: ExperimentConfig) -> HmmModel:
    """The model of `config`, with `model.theta.*` entries overriding the default parameters."""
    if config.model_id == "benchmark":
        theta = ThetaVector({**BENCHMARK_THETA, **config.theta})
        return NonlinearGrowthModel(config.dim, theta)
    theta = ThetaVector({**LG_THETA, **config.theta})
    return LinearGaussianModel(
        config.lg_a,
        config.lg_c,
        theta,
        config.dim,
        config.initial_mean,
        config.initial_var,
    )


def simulate_data(config: ExperimentConfig) -> Trajectory:
    """The single dataset of the experiment, drawn from the model at its configured `theta`."""
    seed = config.data_seed
    if seed is None:
        seed = derive_seed(config.seed, "data")
    return simulate(build_model(config), config.horizon, seed)


def _mean_and_se(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = np.mean(values, axis=0)
    if len(values) < 2:
        return mean, np.full_like(mean, math.nan)
    return mean, np.std(values, axis=0, ddof=1) / math.sqrt(len(values))


def _reference_run(
    config: ExperimentConfig,
    model: HmmModel,
    observations: np.ndarray,
    functional: AdditiveFunctional,
    env: Environment,
) -> Truth:
    estimates = []
    for r in range(config.reference_replicates):
        seed = derive_seed(config.seed, "reference", config.reference_n, r)
        if config.uses_pmmh:
            sampler = env.factory.Sampler(
                name="pmmh_exact", params=_pmmh_params(config, forward_smoothing=False)
            )
            chain_res = sampler.sample(
                model,
                observations,
                functional,
                config.reference_n,
                config.pmmh_iterations,
                config.pmmh_burn_in,
                stream=seed,
                theta0=_theta0(config, model),
            )
            completed = chain_res.status == ChainStatus.COMPLETED
            if completed:
                estimates.append(chain_res.path_estimate)
        else:
            smoother = env.factory.Smoother(name="smc_exact", params=_smc_params(config))
            smooth_res = smoother.smooth(
                model, observations, functional, config.reference_n, stream=seed
            )
            completed = smooth_res.status == SmoothingStatus.COMPLETED
            if completed:
                estimates.append(smooth_res.estimate)
        if not completed:
            LOGGER.warning("reference replicate %d degenerated and is skipped", r)
    if len(estimates) == 0:
        raise ABCSOracleError("every reference replicate degenerated")
    value, se = _mean_and_se(np.stack([np.atleast_1d(e) for e in estimates]))
    LOGGER.info("reference truth %s (se %s) over %d replicates", value, se, len(estimates))
    return Truth(value=value, source="reference_run", se=se)


def compute_truth(
    config: ExperimentConfig,
    observations: Optional[np.ndarray] = None,
    env: Optional[Environment] = None,
) -> Truth:
    """
    Returns the reference value of `E[V_n | y_{0:n}]` for the experiment: exact for
    the `kalman` and `grid` sources, a replicated long run of the exact method for
    `reference_run`.
    """
    env = get_env(env)
    model = build_model(config)
    if observations is None:
        observations = simulate_data(config).observations
    functional = build_functional(config.functional_id, config.horizon, config.dim)
    if config.truth == "kalman":
        assert isinstance(model, LinearGaussianModel)
        value = kalman_functional_expectation(kalman_rts(model, observations), functional)
        return Truth(value=value, source="kalman")
    if config.truth == "grid":
        res = grid_oracle(
            model, observations, functional, stream=derive_seed(config.seed, "grid")
        )
        return Truth(value=res.expectation, source="grid")
    return _reference_run(config, model, observations, functional, env)


def _smc_params(config: ExperimentConfig) -> Dict[str, object]:
    return {"resampling": config.resampling, "threshold": config.threshold}


def _pmmh_params(config: ExperimentConfig, forward_smoothing: bool) -> Dict[str, object]:
    return {
        "prior_shape": config.prior_shape,
        "prior_scale": config.prior_scale,
        "proposal_scale": config.proposal_scale,
        "resampling": config.resampling,
        "threshold": config.threshold,
        "forward_smoothing": forward_smoothing,
    }


def _theta0(config: ExperimentConfig, model: HmmModel) -> ThetaVector:
    return ThetaVector({**model.theta, **config.theta0})


def particle_numbers(config: ExperimentConfig, method: str) -> Tuple[int, ...]:
    """The particle numbers run for `method`; path-only PMMH chains use `path_n_grid`."""
    if (
        method in PMMH_METHODS
        and not config.pmmh_forward_smoothing
        and len(config.path_n_grid) > 0
    ):
        return config.path_n_grid
    return config.n_grid


def resolve_epsilon(
    config: ExperimentConfig,
    method: str,
    n_particles: int,
    observations: np.ndarray,
) -> Tuple[Optional[float], Optional[CalibrationResult]]:
    """
    The tolerance of `method` at `n_particles`: the configured one, or the result of
    the calibration walk over `epsilon_grid` for ABC methods.
    """
    if method not in ABC_METHODS:
        return None, None
    if config.epsilon is not None:
        return config.epsilon, None
    calibration = EpsilonCalibration(
        config.epsilon_grid,
        config.calibration_trials,
        KernelShape(config.kernel),
        rejection=method == "rsmc_abc",
        policy=ResamplePolicy.from_name(config.resampling, config.threshold),
    )
    res = calibrate_epsilon(
        build_model(config),
        observations,
        n_particles,
        calibration,
        derive_seed(config.seed, "calibrate", method, n_particles),
    )
    return res.epsilon, res


@dataclass(frozen=True)
class _Cell:
    method: str
    n_particles: int
    epsilon: Optional[float]
    replicate: int
    seed: int


def _run_cell(
    args: Tuple[ExperimentConfig, np.ndarray, Truth, Optional[np.ndarray], _Cell, bool]
) -> Tuple[ErrorRecord, Optional[List[PmmhChainState]]]:
    config, observations, truth, abc_truth, cell, keep_chain = args
    # models and functionals hold callables; they are rebuilt in every worker
    model = build_model(config)
    functional = build_functional(config.functional_id, config.horizon, config.dim)
    factory = get_env().factory
    params: Dict[str, object]
    if cell.method in PMMH_METHODS:
        params = _pmmh_params(config, config.pmmh_forward_smoothing)
    else:
        params = _smc_params(config)
    if cell.epsilon is not None:
        params.update({"epsilon": cell.epsilon, "kernel": config.kernel})
    start = time.perf_counter()
    chain = None
    estimate: Optional[np.ndarray]
    if cell.method in PMMH_METHODS:
        sampler = factory.Sampler(name=cell.method, params=params)
        chain_res = sampler.sample(
            model,
            observations,
            functional,
            cell.n_particles,
            config.pmmh_iterations,
            config.pmmh_burn_in,
            stream=cell.seed,
            theta0=_theta0(config, model),
        )
        if chain_res.status == ChainStatus.COMPLETED:
            if config.pmmh_forward_smoothing:
                estimate = chain_res.fos_estimate
            else:
                estimate = chain_res.path_estimate
        else:
            estimate = None
        if keep_chain:
            chain = chain_res.chain
    else:
        smoother = factory.Smoother(name=cell.method, params=params)
        smooth_res = smoother.smooth(
            model, observations, functional, cell.n_particles, stream=cell.seed
        )
        estimate = smooth_res.estimate
    walltime_ms = (time.perf_counter() - start) * 1000.0 if config.walltime else 0.0
    if estimate is None:
        LOGGER.warning(
            "cell %s N=%d replicate %d degenerated", cell.method, cell.n_particles, cell.replicate
        )
        error = math.nan
        abc_error = smc_error = None
    else:
        error = l1_error(estimate, truth.value)
        abc_error = smc_error = None
        if abc_truth is not None:
            abc_error = l1_error(abc_truth, truth.value)
            smc_error = l1_error(estimate, abc_truth)
    record = ErrorRecord(
        method=cell.method,
        n_particles=cell.n_particles,
        epsilon=cell.epsilon,
        replicate=cell.replicate,
        estimate=None if estimate is None else np.atleast_1d(estimate),
        truth=truth.value,
        error=error,
        walltime_ms=walltime_ms,
        degenerate=estimate is None,
        abc_error=abc_error,
        smc_error=smc_error,
    )
    return record, chain


def auxiliary_truth(
    config: ExperimentConfig,
    method: str,
    epsilon: Optional[float],
    observations: np.ndarray,
) -> Optional[np.ndarray]:
    """
    The exact smoothed value under the ABC auxiliary model, available for
    linear-Gaussian models with a Gaussian kernel: the kernel only inflates the
    observation variance by `epsilon^2`.
    """
    if (
        epsilon is None
        or method not in ("smc_abc", "rsmc_abc")
        or config.truth != "kalman"
        or KernelShape(config.kernel) != KernelShape.GAUSSIAN
    ):
        return None
    model = build_model(config)
    assert isinstance(model, LinearGaussianModel)
    functional = build_functional(config.functional_id, config.horizon, config.dim)
    auxiliary = model.inflate_observation_variance(epsilon)
    return kalman_functional_expectation(kalman_rts(auxiliary, observations), functional)


def summarize(records: Sequence[ErrorRecord]) -> List[SummaryRow]:
    """Mean and standard error of the error of every (method, N, epsilon) cell, degenerate replicates excluded."""
    groups: Dict[Tuple[str, int, Optional[float]], List[ErrorRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.n_particles, r.epsilon), []).append(r)
    rows = []
    for (method, n_particles, epsilon), group in groups.items():
        errors = np.array([r.error for r in group if not r.degenerate])
        if len(errors) == 0:
            mean = se = math.nan
        else:
            m, s = _mean_and_se(errors[:, None])
            mean, se = float(m[0]), float(s[0])
        rows.append(
            SummaryRow(
                method=method,
                n_particles=n_particles,
                epsilon=epsilon,
                replicates=len(errors),
                mean_error=mean,
                se_error=se,
                degenerate_count=sum(1 for r in group if r.degenerate),
            )
        )
    return sorted(rows, key=lambda row: (row.method, row.n_particles))


def _map(func, tasks: List, workers: int) -> List:
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(func, tasks)


def run_experiment(
    config: ExperimentConfig,
    observations: Optional[np.ndarray] = None,
    truth: Optional[Truth] = None,
    keep_chains: bool = False,
    env: Optional[Environment] = None,
) -> ExperimentResult:
    """
    Runs every (method, N, replicate) cell of `config` and returns the sorted
    records with their per-cell summaries.

    :param observations: the dataset; simulated from `config` when omitted.
    :param truth: the reference value; computed with :func:`compute_truth` when omitted.
    :param keep_chains: keep the PMMH chains of every cell in the result.
    :raises ABCSCalibrationError: if the tolerance of an ABC method cannot be calibrated.
    """
    env = get_env(env)
    if observations is None:
        observations = simulate_data(config).observations
    observations = np.asarray(observations, dtype=float)
    if observations.ndim == 1:
        observations = observations[:, None]
    if truth is None:
        truth = compute_truth(config, observations, env)
    epsilons: Dict[Tuple[str, int], Optional[float]] = {}
    calibrations: Dict[Tuple[str, int], CalibrationResult] = {}
    tasks = []
    for method in config.methods:
        for n_particles in particle_numbers(config, method):
            epsilon, calibration = resolve_epsilon(config, method, n_particles, observations)
            epsilons[(method, n_particles)] = epsilon
            if calibration is not None:
                calibrations[(method, n_particles)] = calibration
                LOGGER.info("%s N=%d calibrated epsilon %g", method, n_particles, epsilon)
            abc_truth = auxiliary_truth(config, method, epsilon, observations)
            for rep in range(config.replicates):
                cell = _Cell(
                    method,
                    n_particles,
                    epsilon,
                    rep,
                    derive_seed(config.seed, method, n_particles, epsilon, rep),
                )
                tasks.append((config, observations, truth, abc_truth, cell, keep_chains))
    LOGGER.info("running %d cells on %d workers", len(tasks), env.workers)
    outcomes = _map(_run_cell, tasks, env.workers)
    records = sorted((rec for rec, _ in outcomes), key=lambda r: r.cell)
    chains = {rec.cell: chain for rec, chain in outcomes if chain is not None}
    return ExperimentResult(
        config=config,
        observations=observations,
        truth=truth,
        records=records,
        summaries=summarize(records),
        epsilons=epsilons,
        calibrations=calibrations,
        chains=chains,
    )


def time_sweep(
    config: ExperimentConfig,
    horizons: Sequence[int],
    env: Optional[Environment] = None,
) -> Dict[int, ExperimentResult]:
    """
    Runs the experiment at every horizon of `horizons` on the prefixes of one
    dataset simulated up to the largest horizon.
    """
    if len(horizons) == 0:
        raise ABCSValueError("time_sweep needs at least one horizon")
    longest = config.replace(horizon=max(horizons))
    data = simulate_data(longest).observations
    res = {}
    for n in sorted(horizons):
        LOGGER.info("time sweep: horizon %d", n)
        res[n] = run_experiment(config.replace(horizon=n), data[: n + 1], env=env)
    return res


def growth_slope(
    sweep: Dict[int, ExperimentResult], method: str, n_particles: int
) -> Tuple[float, float]:
    """
    Least-squares slope of the mean error of `(method, n_particles)` against the
    horizon, with its standard error.
    """
    horizons, means = [], []
    for n, result in sorted(sweep.items()):
        for row in result.summaries:
            if row.method == method and row.n_particles == n_particles:
                horizons.append(n)
                means.append(row.mean_error)
    if len(horizons) < 3:
        raise ABCSValueError("a growth slope needs at least three horizons")
    fit = stats.linregress(horizons, means)
    return float(fit.slope), float(fit.stderr)
