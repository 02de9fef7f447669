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
This module defines the `ParticleFilter` interface: an initial step and a
propagation step over one model, driven through a sequence of observations.

The engines, the calibration and the PMMH chain only see this interface, so the
exact, ABC and rejection samplers are interchangeable for them.
"""

from typing import Iterator, List, Optional

import numpy as np

from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.smc.cloud import ParticleCloud, ResamplePolicy
from abc_smoothing.smc.steps import smc_init, smc_step


class ParticleFilter:
    """Base class of the SMC samplers."""

    def __init__(self, model: HmmModel):
        self._model = model

    @property
    def name(self) -> str:
        raise NotImplementedError

    @property
    def model(self) -> HmmModel:
        return self._model

    def with_model(self, model: HmmModel) -> "ParticleFilter":
        """Returns the same sampler over another model (used when `theta` moves)."""
        raise NotImplementedError

    def init(
        self, y0: np.ndarray, n_particles: int, stream: np.random.Generator
    ) -> ParticleCloud:
        raise NotImplementedError

    def step(
        self, prev: ParticleCloud, y_n: np.ndarray, stream: np.random.Generator
    ) -> ParticleCloud:
        raise NotImplementedError

    def clouds(
        self,
        observations: np.ndarray,
        n_particles: int,
        stream: np.random.Generator,
    ) -> Iterator[ParticleCloud]:
        """Yields the clouds of times `0, ..., n` for the observations `y_{0:n}`."""
        cloud = self.init(observations[0], n_particles, stream)
        yield cloud
        for y_n in observations[1:]:
            cloud = self.step(cloud, y_n, stream)
            yield cloud

    def run(
        self,
        observations: np.ndarray,
        n_particles: int,
        stream: np.random.Generator,
        keep: bool = True,
    ) -> List[ParticleCloud]:
        """
        Runs the sampler to the end of `observations`.

        :return: every cloud if `keep` is `True`, otherwise only the last one.
        """
        res: List[ParticleCloud] = []
        for cloud in self.clouds(observations, n_particles, stream):
            if keep or not res:
                res.append(cloud)
            else:
                res[0] = cloud
        return res


class BootstrapFilter(ParticleFilter):
    """The bootstrap particle filter with the exact observation density."""

    def __init__(self, model: HmmModel, policy: Optional[ResamplePolicy] = None):
        ParticleFilter.__init__(self, model)
        self._policy = policy if policy is not None else ResamplePolicy()

    @property
    def name(self) -> str:
        return "bootstrap"

    @property
    def policy(self) -> ResamplePolicy:
        return self._policy

    def with_model(self, model: HmmModel) -> "BootstrapFilter":
        return BootstrapFilter(model, self._policy)

    def init(self, y0, n_particles, stream):
        return smc_init(self._model, y0, n_particles, stream)

    def step(self, prev, y_n, stream):
        return smc_step(prev, self._model, y_n, self._policy, stream)
