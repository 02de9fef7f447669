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
Bootstrap SMC steps: the hidden state dynamics are the proposal, so the
incremental weight of a particle is its observation potential.

The helpers `select_parents` and `weighted_cloud` hold the bookkeeping shared by
the exact and the ABC samplers: the resampling decision, the weight reset, the
weight accumulation and the per-step factor of the normalizing constant, which
is `sum_i W_n^i / sum_i W_{n-1}^i` with `W_{n-1}` read after any reset.
"""

from typing import Optional, Tuple

import numpy as np

from abc_smoothing.exceptions import ABCSUsageError, ABCSValueError
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.smc.cloud import ParticleCloud, ResamplePolicy
from abc_smoothing.smc.resampling import (
    check_degenerate,
    log_sum,
    multinomial_resample,
)


def select_parents(
    prev: ParticleCloud, policy: ResamplePolicy, stream: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray, bool]:
    """
    Applies `policy` to the cloud at time `n-1`.

    :return: the ancestor indices, the log weights carried into time `n`
        (zeros after resampling) and whether resampling happened.
    """
    if policy.should_resample(prev.log_weights):
        ancestors = multinomial_resample(prev.log_weights, stream, prev.time)
        return ancestors, np.zeros(prev.size), True
    return np.arange(prev.size, dtype=np.int64), prev.log_weights.copy(), False


def weighted_cloud(
    time_index: int,
    particles: np.ndarray,
    ancestors: np.ndarray,
    base_log_weights: np.ndarray,
    log_potentials: np.ndarray,
    pseudo_obs: Optional[np.ndarray] = None,
    resampled: bool = False,
) -> ParticleCloud:
    """Multiplies the carried weights by the incremental potentials and records the step factor."""
    log_potentials = np.where(np.isnan(log_potentials), -np.inf, log_potentials)
    log_weights = base_log_weights + log_potentials
    check_degenerate(log_weights, time_index)
    return ParticleCloud(
        time=time_index,
        particles=particles,
        log_weights=log_weights,
        ancestors=ancestors,
        log_step_weight_mean=log_sum(log_weights) - log_sum(base_log_weights),
        pseudo_obs=pseudo_obs,
        resampled=resampled,
    )


def _check_exact(model: HmmModel):
    if not model.has_obs_density:
        raise ABCSUsageError(
            f"exact SMC needs the observation density of model {model.name}; "
            "use the ABC samplers for likelihood-free models"
        )


def as_observation(model: HmmModel, y: np.ndarray) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (model.dim_y,):
        raise ABCSValueError(
            f"observation has shape {y.shape}, model expects ({model.dim_y},)"
        )
    return y


def smc_init(
    model: HmmModel, y0: np.ndarray, n_particles: int, stream: np.random.Generator
) -> ParticleCloud:
    """
    Samples `x_0^{1:N}` from the initial law and weights them by `g(x_0^i, y_0)`.

    Resampling is not applied at time 0; the policy is first applied to these
    weights before the first propagation.
    """
    _check_exact(model)
    if n_particles < 1:
        raise ABCSValueError(f"the number of particles must be >= 1, got {n_particles}")
    y0 = as_observation(model, y0)
    x0 = model.sample_initial(n_particles, stream)
    return weighted_cloud(
        0,
        x0,
        np.arange(n_particles, dtype=np.int64),
        np.zeros(n_particles),
        model.log_obs_density(x0, y0, 0),
    )


def smc_step(
    prev: ParticleCloud,
    model: HmmModel,
    y_n: np.ndarray,
    policy: ResamplePolicy,
    stream: np.random.Generator,
) -> ParticleCloud:
    """
    One bootstrap SMC step from time `n-1` to `n`: resample per `policy`, propagate
    through the transition and weight by `g(x_n^i, y_n)`.

    Raises `ABCSDegenerateWeightsError` when every new weight is zero.
    """
    _check_exact(model)
    y_n = as_observation(model, y_n)
    n = prev.time + 1
    ancestors, base, resampled = select_parents(prev, policy, stream)
    x = model.sample_transition(prev.particles[ancestors], n, stream)
    return weighted_cloud(
        n, x, ancestors, base, model.log_obs_density(x, y_n, n), resampled=resampled
    )
