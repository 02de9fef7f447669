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
"""This module defines the `ParticleCloud` and the `ResamplePolicy`."""

from dataclasses import dataclass
from enum import Enum, auto
from typing import Optional

import numpy as np

from abc_smoothing.exceptions import ABCSValueError
from abc_smoothing.smc.resampling import ess, normalized_weights


class ResampleMode(Enum):
    """
    Enum representing when a `ResamplePolicy` resamples:
    EVERY_STEP     -> before every propagation
    ESS_THRESHOLD  -> when the effective sample size drops below threshold * N
    NEVER          -> never; weights accumulate over time
    """

    EVERY_STEP = auto()
    ESS_THRESHOLD = auto()
    NEVER = auto()


@dataclass(frozen=True)
class ResamplePolicy:
    mode: ResampleMode = ResampleMode.ESS_THRESHOLD
    threshold: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.threshold <= 1.0):
            raise ABCSValueError(
                f"resampling threshold must lie in (0, 1], got {self.threshold}"
            )

    @staticmethod
    def every_step() -> "ResamplePolicy":
        return ResamplePolicy(ResampleMode.EVERY_STEP)

    @staticmethod
    def ess_threshold(threshold: float = 0.5) -> "ResamplePolicy":
        return ResamplePolicy(ResampleMode.ESS_THRESHOLD, threshold)

    @staticmethod
    def never() -> "ResamplePolicy":
        return ResamplePolicy(ResampleMode.NEVER)

    @staticmethod
    def from_name(name: str, threshold: float = 0.5) -> "ResamplePolicy":
        """
        Returns the policy named `every_step`, `ess_threshold` or `never`.

        >>> ResamplePolicy.from_name("ess_threshold", 0.3).threshold
        0.3
        """
        try:
            mode = ResampleMode[name.upper()]
        except KeyError:
            raise ABCSValueError(
                f"unknown resampling policy {name!r}; known: "
                f"{[m.name.lower() for m in ResampleMode]}"
            )
        return ResamplePolicy(mode, threshold)

    def should_resample(self, log_weights: np.ndarray) -> bool:
        if self.mode == ResampleMode.EVERY_STEP:
            return True
        if self.mode == ResampleMode.NEVER:
            return False
        return ess(log_weights) < self.threshold * len(log_weights)


@dataclass(frozen=True)
class ParticleCloud:
    """
    The particle system at time `n`.

    `log_weights` are the unnormalized log weights `log W_n^i`; `ancestors[i]` is the
    index, in the cloud at time `n-1`, of the parent of particle `i` (the identity at
    time 0); `log_step_weight_mean` is the log of this step's factor of the
    normalizing-constant estimate. `pseudo_obs` holds the pseudo-observations of
    the ABC samplers and is `None` for exact-likelihood clouds.
    """

    time: int
    particles: np.ndarray
    log_weights: np.ndarray
    ancestors: np.ndarray
    log_step_weight_mean: float
    pseudo_obs: Optional[np.ndarray] = None
    resampled: bool = False

    def __post_init__(self):
        n_particles = self.particles.shape[0]
        if n_particles < 1:
            raise ABCSValueError("a particle cloud needs at least one particle")
        if self.log_weights.shape != (n_particles,):
            raise ABCSValueError(
                f"log_weights has shape {self.log_weights.shape}, expected ({n_particles},)"
            )
        if self.ancestors.shape != (n_particles,):
            raise ABCSValueError(
                f"ancestors has shape {self.ancestors.shape}, expected ({n_particles},)"
            )
        if self.pseudo_obs is not None and self.pseudo_obs.shape[0] != n_particles:
            raise ABCSValueError("pseudo_obs must hold one observation per particle")

    @property
    def size(self) -> int:
        return self.particles.shape[0]

    @property
    def step_weight_mean(self) -> float:
        return float(np.exp(self.log_step_weight_mean))

    def normalized_weights(self) -> np.ndarray:
        """Returns the normalized weights, computed with log-sum-exp."""
        return normalized_weights(self.log_weights, self.time)

    def ess(self) -> float:
        return ess(self.log_weights, self.time)

    def weighted_mean(self) -> np.ndarray:
        """Returns the filtering mean estimate `sum_i W_n^i x_n^i`."""
        return self.normalized_weights() @ self.particles
