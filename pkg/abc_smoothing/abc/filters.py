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

from typing import Optional

from abc_smoothing.abc.kernels import AbcKernel
from abc_smoothing.abc.steps import abc_smc_init, abc_smc_step, rsmc_step
from abc_smoothing.exceptions import ABCSUsageError
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.smc.filters import ParticleFilter


class AbcFilter(ParticleFilter):
    """SMC on the ABC auxiliary model with a resampling policy."""

    def __init__(
        self,
        model: HmmModel,
        kernel: AbcKernel,
        policy: Optional[ResamplePolicy] = None,
    ):
        ParticleFilter.__init__(self, model)
        self._kernel = kernel
        self._policy = policy if policy is not None else ResamplePolicy()

    @property
    def name(self) -> str:
        return "abc"

    @property
    def kernel(self) -> AbcKernel:
        return self._kernel

    @property
    def policy(self) -> ResamplePolicy:
        return self._policy

    def with_model(self, model: HmmModel) -> "AbcFilter":
        return AbcFilter(model, self._kernel, self._policy)

    def with_kernel(self, kernel: AbcKernel) -> "AbcFilter":
        return AbcFilter(self._model, kernel, self._policy)

    def init(self, y0, n_particles, stream):
        return abc_smc_init(self._model, y0, self._kernel, n_particles, stream)

    def step(self, prev, y_n, stream):
        return abc_smc_step(prev, self._model, y_n, self._kernel, self._policy, stream)


class RejectionAbcFilter(ParticleFilter):
    """SMC on the ABC auxiliary model with the rejection kernel; indicator potentials only."""

    def __init__(self, model: HmmModel, kernel: AbcKernel):
        ParticleFilter.__init__(self, model)
        if not kernel.is_indicator:
            raise ABCSUsageError(
                f"rejection SMC is defined for indicator kernels only, got {kernel.shape.value}"
            )
        self._kernel = kernel

    @property
    def name(self) -> str:
        return "rsmc"

    @property
    def kernel(self) -> AbcKernel:
        return self._kernel

    def with_model(self, model: HmmModel) -> "RejectionAbcFilter":
        return RejectionAbcFilter(model, self._kernel)

    def with_kernel(self, kernel: AbcKernel) -> "RejectionAbcFilter":
        return RejectionAbcFilter(self._model, kernel)

    def init(self, y0, n_particles, stream):
        return abc_smc_init(self._model, y0, self._kernel, n_particles, stream)

    def step(self, prev, y_n, stream):
        return rsmc_step(prev, self._model, y_n, self._kernel, stream)
