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
SMC steps for the ABC auxiliary model: every particle carries a pseudo-observation
`u_n^i` drawn from the observation sampler, and its potential is
`phi((u_n^i - y_n) / epsilon)`. Only the observation sampler of the model is used.

`rsmc_step` is the rejection kernel: particles whose pseudo-observation was
accepted at time `n-1` keep their own parent, the rejected ones draw a parent
uniformly among the accepted ones.
"""

import numpy as np

from abc_smoothing.abc.kernels import AbcKernel
from abc_smoothing.exceptions import (
    ABCSDegenerateWeightsError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.smc.cloud import ParticleCloud, ResamplePolicy
from abc_smoothing.smc.steps import as_observation, select_parents, weighted_cloud


def _weigh(
    model: HmmModel,
    kernel: AbcKernel,
    time_index: int,
    x: np.ndarray,
    ancestors: np.ndarray,
    base: np.ndarray,
    y: np.ndarray,
    stream: np.random.Generator,
    resampled: bool,
) -> ParticleCloud:
    u = model.sample_observation(x, time_index, stream)
    return weighted_cloud(
        time_index,
        x,
        ancestors,
        base,
        kernel.log_potential(u, y),
        pseudo_obs=u,
        resampled=resampled,
    )


def abc_smc_init(
    model: HmmModel,
    y0: np.ndarray,
    kernel: AbcKernel,
    n_particles: int,
    stream: np.random.Generator,
) -> ParticleCloud:
    """Samples `x_0^{1:N}` and `u_0^{1:N}` and weights them by `G_0(u_0^i)`."""
    if n_particles < 1:
        raise ABCSValueError(f"the number of particles must be >= 1, got {n_particles}")
    y0 = as_observation(model, y0)
    x0 = model.sample_initial(n_particles, stream)
    return _weigh(
        model,
        kernel,
        0,
        x0,
        np.arange(n_particles, dtype=np.int64),
        np.zeros(n_particles),
        y0,
        stream,
        False,
    )


def abc_smc_step(
    prev: ParticleCloud,
    model: HmmModel,
    y_n: np.ndarray,
    kernel: AbcKernel,
    policy: ResamplePolicy,
    stream: np.random.Generator,
) -> ParticleCloud:
    """
    One SMC step on the auxiliary model: resample per `policy`, propagate through
    the transition, draw `u_n^i` and weight by `G_n(u_n^i)`.

    Raises `ABCSDegenerateWeightsError` when no pseudo-observation gets a positive weight.
    """
    y_n = as_observation(model, y_n)
    n = prev.time + 1
    ancestors, base, resampled = select_parents(prev, policy, stream)
    x = model.sample_transition(prev.particles[ancestors], n, stream)
    return _weigh(model, kernel, n, x, ancestors, base, y_n, stream, resampled)


def rejection_parents(
    accepted: np.ndarray, stream: np.random.Generator, time_index: int
) -> np.ndarray:
    """
    Returns the parent indices of the rejection kernel for the 0/1 acceptance
    pattern `accepted` of time `time_index`.
    """
    accepted = np.asarray(accepted, dtype=bool)
    survivors = np.flatnonzero(accepted)
    if len(survivors) == 0:
        raise ABCSDegenerateWeightsError(
            f"no pseudo-observation was accepted at time {time_index}", time_index
        )
    parents = np.arange(len(accepted), dtype=np.int64)
    rejected = np.flatnonzero(~accepted)
    if len(rejected) > 0:
        parents[rejected] = survivors[
            stream.integers(0, len(survivors), size=len(rejected))
        ]
    return parents


def rsmc_step(
    prev: ParticleCloud,
    model: HmmModel,
    y_n: np.ndarray,
    kernel: AbcKernel,
    stream: np.random.Generator,
) -> ParticleCloud:
    """
    One step of the rejection SMC kernel.

    The clouds of this sampler hold `log G_n` as their log weights, so the step
    factor of the normalizing constant is the mean potential at time `n`.
    """
    if not kernel.is_indicator:
        raise ABCSUsageError(
            f"the rejection kernel needs an indicator potential, got {kernel.shape.value}"
        )
    y_n = as_observation(model, y_n)
    n = prev.time + 1
    accepted = np.isfinite(prev.log_weights)
    ancestors = rejection_parents(accepted, stream, prev.time)
    x = model.sample_transition(prev.particles[ancestors], n, stream)
    return _weigh(
        model,
        kernel,
        n,
        x,
        ancestors,
        np.zeros(prev.size),
        y_n,
        stream,
        not bool(np.all(accepted)),
    )
