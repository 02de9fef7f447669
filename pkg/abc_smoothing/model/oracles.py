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
Exact oracles used as ground truth: the Kalman filter with the Rauch-Tung-Striebel
smoother for linear-Gaussian models, and dense grid quadrature of the joint
smoothing density for small one-dimensional instances.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from abc_smoothing.exceptions import (
    ABCSGridAccuracyError,
    ABCSOracleError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.model.functional import AdditiveFunctional, FunctionalKind
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.model.linear_gaussian import LinearGaussianModel, LinearGaussianSpec
from abc_smoothing.utils import Stream, as_stream


LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class KalmanResult:
    """
    Output of :func:`kalman_rts`. Means have shape `(n+1, d)`, covariances
    `(n+1, d, d)`; `smoothed_cross_covs[p-1]` is `Cov(X_{p-1}, X_p | y_{0:n})`.
    """

    filtered_means: np.ndarray
    filtered_covs: np.ndarray
    smoothed_means: np.ndarray
    smoothed_covs: np.ndarray
    smoothed_cross_covs: np.ndarray
    log_likelihood: float


def kalman_rts(
    lg_model: Union[LinearGaussianModel, LinearGaussianSpec],
    observations: np.ndarray,
) -> KalmanResult:
    """
    Runs the Kalman filter and the RTS smoother on `y_{0:n}`.

    :param lg_model: a `LinearGaussianModel` or its matrix form.
    :param observations: array of shape `(n+1, dim_y)` (a 1-d array is read as scalar data).
    :return: exact filtering and smoothing moments and the exact log marginal likelihood.
    """
    spec = lg_model.state_space() if isinstance(lg_model, LinearGaussianModel) else lg_model
    spec.validate()
    A, C, Q, R = spec.transition, spec.emission, spec.state_cov, spec.obs_cov
    y = np.asarray(observations, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[1] != C.shape[0]:
        raise ABCSValueError(
            f"observations have dimension {y.shape[1]}, model expects {C.shape[0]}"
        )
    T, d = y.shape[0], A.shape[0]
    m_pred = np.empty((T, d))
    P_pred = np.empty((T, d, d))
    m_f = np.empty((T, d))
    P_f = np.empty((T, d, d))
    log_lik = 0.0
    for t in range(T):
        if t == 0:
            m_pred[t] = spec.initial_mean
            P_pred[t] = spec.initial_cov
        else:
            m_pred[t] = A @ m_f[t - 1]
            P_pred[t] = A @ P_f[t - 1] @ A.T + Q
        S = C @ P_pred[t] @ C.T + R
        resid = y[t] - C @ m_pred[t]
        gain = np.linalg.solve(S, C @ P_pred[t]).T
        m_f[t] = m_pred[t] + gain @ resid
        P_f[t] = P_pred[t] - gain @ S @ gain.T
        _, logdet = np.linalg.slogdet(S)
        log_lik += -0.5 * (
            len(resid) * np.log(2.0 * np.pi) + logdet + resid @ np.linalg.solve(S, resid)
        )
    m_s = m_f.copy()
    P_s = P_f.copy()
    cross = np.zeros((max(T - 1, 0), d, d))
    for t in range(T - 2, -1, -1):
        # pinv keeps noise-free chains (singular predictive covariance) well defined
        J = P_f[t] @ A.T @ np.linalg.pinv(P_pred[t + 1])
        m_s[t] = m_f[t] + J @ (m_s[t + 1] - m_pred[t + 1])
        P_s[t] = P_f[t] + J @ (P_s[t + 1] - P_pred[t + 1]) @ J.T
        cross[t] = J @ P_s[t + 1]
    return KalmanResult(
        filtered_means=m_f,
        filtered_covs=P_f,
        smoothed_means=m_s,
        smoothed_covs=P_s,
        smoothed_cross_covs=cross,
        log_likelihood=float(log_lik),
    )


def kalman_functional_expectation(
    result: KalmanResult, functional: AdditiveFunctional
) -> np.ndarray:
    """Returns the exact smoothed expectation of a LINEAR, LAG_PRODUCT or CONSTANT functional."""
    coeffs = functional.coefficients
    n = result.smoothed_means.shape[0] - 1
    if functional.horizon != n:
        raise ABCSValueError(
            f"functional horizon {functional.horizon} differs from data horizon {n}"
        )
    if functional.kind == FunctionalKind.LINEAR:
        return np.einsum("p,pk->k", coeffs, result.smoothed_means)
    if functional.kind == FunctionalKind.LAG_PRODUCT:
        m = result.smoothed_means
        second = np.einsum("pkk->pk", result.smoothed_cross_covs) + m[:-1] * m[1:]
        return np.einsum("p,pk->k", coeffs[1:], second)
    if functional.kind == FunctionalKind.CONSTANT:
        return np.array([float(np.sum(coeffs))])
    raise ABCSOracleError(
        f"the Kalman oracle cannot evaluate functional {functional.name!r}"
    )


@dataclass(frozen=True)
class GridSpec:
    """
    Lattice used by :func:`grid_oracle`.

    Either `lattices` gives one explicit increasing lattice per time index, or the
    lattice at time `t` spans `half_width` pilot standard deviations around the
    pilot filtering mean with `points` equally spaced nodes.
    """

    points: int = 2001
    half_width: float = 8.0
    pilot_particles: int = 2000
    min_std: float = 0.5
    lattices: Optional[Sequence[np.ndarray]] = None

    def refined(self) -> "GridSpec":
        """Returns the spec with every lattice spacing halved."""
        if self.lattices is not None:
            finer = []
            for lat in self.lattices:
                lat = np.asarray(lat, dtype=float)
                if len(lat) < 2:
                    finer.append(lat)
                    continue
                mid = 0.5 * (lat[:-1] + lat[1:])
                finer.append(np.sort(np.concatenate([lat, mid])))
            return GridSpec(
                self.points, self.half_width, self.pilot_particles, self.min_std, finer
            )
        return GridSpec(
            2 * self.points - 1, self.half_width, self.pilot_particles, self.min_std
        )


@dataclass(frozen=True)
class GridOracleResult:
    expectation: np.ndarray
    log_likelihood: float
    refinement_change: float


def _trapezoid_log_weights(lattice: np.ndarray) -> np.ndarray:
    if len(lattice) == 1:
        return np.zeros(1)
    w = np.empty(len(lattice))
    dx = np.diff(lattice)
    w[0] = dx[0] / 2.0
    w[-1] = dx[-1] / 2.0
    w[1:-1] = (dx[:-1] + dx[1:]) / 2.0
    return np.log(w)


def _pilot_lattices(
    model: HmmModel, y: np.ndarray, grid: GridSpec, stream: Stream
) -> List[np.ndarray]:
    # imported here: the smc package depends on the model package
    from abc_smoothing.smc import ResamplePolicy, smc_init, smc_step

    rng = as_stream(stream)
    policy = ResamplePolicy.ess_threshold(0.5)
    cloud = smc_init(model, y[0], grid.pilot_particles, rng)
    lattices = []
    for t in range(len(y)):
        if t > 0:
            cloud = smc_step(cloud, model, y[t], policy, rng)
        if t == 0 and model.initial_point is not None:
            lattices.append(np.asarray(model.initial_point, dtype=float))
            continue
        w = cloud.normalized_weights()
        x = cloud.particles[:, 0]
        mean = float(np.sum(w * x))
        std = max(float(np.sqrt(np.sum(w * (x - mean) ** 2))), grid.min_std)
        lattices.append(
            np.linspace(
                mean - grid.half_width * std, mean + grid.half_width * std, grid.points
            )
        )
    return lattices


def _grid_expectation(
    model: HmmModel,
    y: np.ndarray,
    functional: AdditiveFunctional,
    lattices: Sequence[np.ndarray],
):
    T = len(y)
    nodes = [np.asarray(lat, dtype=float).reshape(-1, 1) for lat in lattices]
    log_w = [_trapezoid_log_weights(lat[:, 0]) for lat in nodes]
    log_g = [
        model.log_obs_density(nodes[t], y[t][None, :], t) + log_w[t] for t in range(T)
    ]
    if model.initial_point is not None and len(nodes[0]) == 1:
        log_prior0 = np.zeros(1)
    else:
        log_prior0 = model.log_initial_density(nodes[0])
    def log_f(t: int) -> np.ndarray:
        # recomputed per pass: refined lattices make the T transition matrices large
        return model.log_transition_density(
            nodes[t - 1][:, None, :], nodes[t][None, :, :], t
        )

    log_alpha = [log_prior0 + log_g[0]]
    for t in range(1, T):
        log_alpha.append(
            logsumexp(log_alpha[t - 1][:, None] + log_f(t), axis=0) + log_g[t]
        )
    log_lik = float(logsumexp(log_alpha[-1]))
    log_beta = [np.zeros(len(nodes[t])) for t in range(T)]
    for t in range(T - 1, 0, -1):
        log_beta[t - 1] = logsumexp(log_f(t) + (log_g[t] + log_beta[t])[None, :], axis=1)

    marginal0 = np.exp(log_alpha[0] + log_beta[0] - log_lik)
    total = np.sum(marginal0[:, None] * functional.initial_values(nodes[0]), axis=0)
    for t in range(1, T):
        log_pair = (
            log_alpha[t - 1][:, None]
            + log_f(t)
            + (log_g[t] + log_beta[t])[None, :]
            - log_lik
        )
        values = functional.increment(t, nodes[t - 1][:, None, :], nodes[t][None, :, :])
        total = total + np.einsum(
            "ij,ijk->k",
            np.exp(log_pair),
            np.broadcast_to(values, log_pair.shape + (functional.output_dim,)),
        )
    return total, log_lik


def grid_oracle(
    model: HmmModel,
    observations: np.ndarray,
    functional: AdditiveFunctional,
    grid: Optional[GridSpec] = None,
    stream: Stream = 0,
    check_convergence: bool = True,
    tolerance: float = 1e-4,
) -> GridOracleResult:
    """
    Computes `E[V_n | y_{0:n}]` and `log p(y_{0:n})` by dense quadrature of the joint
    smoothing density (forward-backward recursions on a lattice).

    :param model: a model with `dim_x = dim_y = 1` and an available observation density.
    :param observations: `y_{0:n}` with `n <= 4`.
    :param functional: the additive functional to integrate, horizon `n`.
    :param grid: the lattice specification; defaults to a pilot-run lattice.
    :param stream: seed of the pilot particle run.
    :param check_convergence: if `True`, recomputes on a 2x refined lattice and
        raises `ABCSGridAccuracyError` when the answers differ by more than `tolerance`.
    """
    if model.dim_x != 1 or model.dim_y != 1:
        raise ABCSUsageError("grid_oracle handles one-dimensional models only")
    if not model.has_obs_density:
        raise ABCSUsageError("grid_oracle needs the observation density")
    y = np.asarray(observations, dtype=float).reshape(-1, 1)
    if len(y) - 1 > 4:
        raise ABCSUsageError(f"grid_oracle handles horizons n <= 4, got {len(y) - 1}")
    if functional.horizon != len(y) - 1:
        raise ABCSValueError(
            f"functional horizon {functional.horizon} differs from data horizon {len(y) - 1}"
        )
    grid = GridSpec() if grid is None else grid
    lattices = grid.lattices
    if lattices is None:
        lattices = _pilot_lattices(model, y, grid, stream)
    value, log_lik = _grid_expectation(model, y, functional, lattices)
    change = 0.0
    if check_convergence:
        refined = GridSpec(
            grid.points, grid.half_width, grid.pilot_particles, grid.min_std, lattices
        ).refined()
        fine_value, fine_log_lik = _grid_expectation(
            model, y, functional, refined.lattices
        )
        change = float(
            max(np.max(np.abs(fine_value - value)), abs(fine_log_lik - log_lik))
        )
        LOGGER.debug("grid oracle refinement change %.3e", change)
        if change >= tolerance:
            raise ABCSGridAccuracyError(
                f"grid refinement changed the answer by {change:.3e} >= {tolerance:.1e}"
            )
        value, log_lik = fine_value, fine_log_lik
    return GridOracleResult(
        expectation=value, log_likelihood=log_lik, refinement_change=change
    )
