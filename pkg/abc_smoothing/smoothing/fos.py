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
Forward-only smoothing of additive functionals.

Every particle `x_n^i` carries the value

    V_n(x_n^i) = sum_j Wbar_{n-1}^j f(x_{n-1}^j, x_n^i) (V_{n-1}(x_{n-1}^j) + v_n(x_{n-1}^j, x_n^i))
                 / sum_j Wbar_{n-1}^j f(x_{n-1}^j, x_n^i)

with `V_0 = v_0`, and the smoothed expectation of the functional is
`sum_i Wbar_n^i V_n(x_n^i)`. `Wbar_{n-1}` are the normalized weights of the cloud
at time `n-1` before any resampling. One update costs `N^2` transition density
evaluations; no backward pass is needed.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from abc_smoothing.exceptions import (
    ABCSDegenerateBackwardKernelError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.model.functional import AdditiveFunctional
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.smc.cloud import ParticleCloud
from abc_smoothing.smc.estimates import NormalizingConstant, path_estimate
from abc_smoothing.smc.filters import ParticleFilter
from abc_smoothing.smc.resampling import log_sum


LOGGER = logging.getLogger(__name__)

ROW_CHUNK = 256


@dataclass(frozen=True)
class FosStats:
    """The values `V_n(x_n^i)`, shape `(N, output_dim)`, at time `time`."""

    values: np.ndarray
    time: int
    functional: AdditiveFunctional

    @property
    def size(self) -> int:
        return self.values.shape[0]


def fos_init(functional: AdditiveFunctional, cloud0: ParticleCloud) -> FosStats:
    """Returns `V_0(x_0^i) = v_0(x_0^i)`."""
    if cloud0.time != 0:
        raise ABCSUsageError(f"fos_init needs the cloud of time 0, got time {cloud0.time}")
    return FosStats(functional.initial_values(cloud0.particles), 0, functional)


def _backward_rows(
    log_w_prev: np.ndarray,
    x_prev: np.ndarray,
    x_rows: np.ndarray,
    model: HmmModel,
    n: int,
) -> np.ndarray:
    """Returns the backward kernel rows for `x_rows`, normalized, shape `(c, N)`."""
    log_k = log_w_prev[None, :] + model.log_transition_density(
        x_prev[None, :, :], x_rows[:, None, :], n
    )
    log_k = np.where(np.isnan(log_k), -np.inf, log_k)
    shift = np.max(log_k, axis=1)
    if not np.all(np.isfinite(shift)):
        raise ABCSDegenerateBackwardKernelError(
            f"the backward kernel of time {n} has zero mass for "
            f"{int(np.sum(~np.isfinite(shift)))} particles",
            n,
        )
    k = np.exp(log_k - shift[:, None])
    return k / np.sum(k, axis=1, keepdims=True)


def fos_update(
    prev_stats: FosStats,
    prev_cloud: ParticleCloud,
    new_cloud: ParticleCloud,
    model: HmmModel,
    chunk: int = ROW_CHUNK,
) -> FosStats:
    """
    Returns `V_n` at the particles of `new_cloud` from `V_{n-1}` at the particles of
    `prev_cloud`. Rows are processed in chunks of `chunk` particles.

    :raises ABCSDegenerateBackwardKernelError: if some row of the backward kernel
        underflows to zero.
    """
    if prev_stats.time != prev_cloud.time or prev_stats.size != prev_cloud.size:
        raise ABCSValueError("prev_stats and prev_cloud must share time and size")
    if new_cloud.time != prev_cloud.time + 1:
        raise ABCSUsageError(
            f"fos_update goes from time {prev_cloud.time} to {prev_cloud.time + 1}, "
            f"got a cloud of time {new_cloud.time}"
        )
    n = new_cloud.time
    functional = prev_stats.functional
    term = functional.term(n)
    log_w_prev = prev_cloud.log_weights - log_sum(prev_cloud.log_weights)
    x_prev = prev_cloud.particles
    values_prev = prev_stats.values
    out = np.empty((new_cloud.size, values_prev.shape[1]))
    for start in range(0, new_cloud.size, chunk):
        x_rows = new_cloud.particles[start : start + chunk]
        k = _backward_rows(log_w_prev, x_prev, x_rows, model, n)
        if term.pairwise:
            inc = functional.increment(n, x_prev[None, :, :], x_rows[:, None, :])
            inc = np.broadcast_to(inc, k.shape + (values_prev.shape[1],))
            out[start : start + chunk] = k @ values_prev + np.einsum(
                "cj,cjk->ck", k, inc
            )
        else:
            inc = functional.increment(n, x_rows, x_rows)
            out[start : start + chunk] = k @ values_prev + inc
    return FosStats(out, n, functional)


def fos_estimate(stats: FosStats, cloud: ParticleCloud) -> np.ndarray:
    """Returns `sum_i Wbar_n^i V_n(x_n^i)`, shape `(output_dim,)`."""
    if stats.size != cloud.size:
        raise ABCSValueError(
            f"stats hold {stats.size} values, cloud holds {cloud.size} particles"
        )
    if stats.time != cloud.time:
        raise ABCSValueError(
            f"stats are at time {stats.time}, cloud is at time {cloud.time}"
        )
    return cloud.normalized_weights() @ stats.values


@dataclass
class SmootherRun:
    """One sampler pass with its smoothing by-products."""

    clouds: List[ParticleCloud]
    stats: Optional[FosStats]
    log_z: NormalizingConstant

    @property
    def last(self) -> ParticleCloud:
        return self.clouds[-1]

    @property
    def fos_estimate(self) -> np.ndarray:
        if self.stats is None:
            raise ABCSUsageError("this run did not carry forward-only smoothing")
        return fos_estimate(self.stats, self.last)

    def path_estimate(self, functional: AdditiveFunctional) -> np.ndarray:
        if len(self.clouds) != functional.horizon + 1:
            raise ABCSUsageError("the path estimate needs every cloud of the run")
        return path_estimate(self.clouds, functional)


def run_forward_smoother(
    sampler: ParticleFilter,
    observations: np.ndarray,
    functional: Optional[AdditiveFunctional],
    n_particles: int,
    stream: np.random.Generator,
    keep_clouds: bool = True,
) -> SmootherRun:
    """
    Runs `sampler` over `observations` and, when `functional` is given, the
    forward-only smoothing recursion alongside it.
    """
    observations = np.asarray(observations, dtype=float)
    if observations.ndim == 1:
        observations = observations[:, None]
    if functional is not None and functional.horizon != len(observations) - 1:
        raise ABCSValueError(
            f"functional has horizon {functional.horizon}, data has {len(observations) - 1}"
        )
    clouds: List[ParticleCloud] = []
    stats: Optional[FosStats] = None
    prev: Optional[ParticleCloud] = None
    log_means: List[float] = []
    for cloud in sampler.clouds(observations, n_particles, stream):
        if functional is not None:
            if prev is None:
                stats = fos_init(functional, cloud)
            else:
                assert stats is not None
                stats = fos_update(stats, prev, cloud, sampler.model)
        log_means.append(cloud.log_step_weight_mean)
        if keep_clouds:
            clouds.append(cloud)
        prev = cloud
    assert prev is not None
    if not keep_clouds:
        clouds = [prev]
    LOGGER.debug(
        "%s pass over %d observations with N=%d done",
        sampler.name,
        len(observations),
        n_particles,
    )
    log_z = NormalizingConstant(float(np.sum(log_means)))
    return SmootherRun(clouds, stats, log_z)
