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
The smoothing engines: `smc_exact`, `smc_abc` and `rsmc_abc`.

Each engine builds a sampler for the model it receives and runs the forward-only
smoothing recursion alongside it; the path-space estimate over the terminal
genealogy is reported too when the engine keeps the clouds.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from abc_smoothing.abc.calibration import EpsilonCalibration, calibrate_epsilon
from abc_smoothing.abc.filters import AbcFilter, RejectionAbcFilter
from abc_smoothing.abc.kernels import AbcKernel, KernelShape
from abc_smoothing.engines.engine import Engine
from abc_smoothing.engines.mixins.smoother import SmootherMixin
from abc_smoothing.engines.results import (
    LogLevel,
    LogMessage,
    SmoothingResult,
    SmoothingStatus,
)
from abc_smoothing.exceptions import (
    ABCSDegenerateBackwardKernelError,
    ABCSDegenerateWeightsError,
    ABCSUsageError,
)
from abc_smoothing.model.functional import AdditiveFunctional
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.model.model_kind import ModelKind, density_kind
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.smc.filters import BootstrapFilter, ParticleFilter
from abc_smoothing.smoothing.fos import run_forward_smoother


LOGGER = logging.getLogger(__name__)


class ParticleSmoother(Engine, SmootherMixin):
    """
    Base class of the smoothing engines.

    :param resampling: the resampling policy name, `ess_threshold`, `every_step` or `never`.
    :param threshold: the ESS fraction below which `ess_threshold` resamples.
    :param forward_smoothing: when `False` the estimate is the path-space one.
    :param keep_clouds: keep every cloud to also report the path-space estimate.
    """

    def __init__(
        self,
        resampling: str = "ess_threshold",
        threshold: float = 0.5,
        forward_smoothing: bool = True,
        keep_clouds: bool = True,
        **kwargs,
    ):
        Engine.__init__(self)
        self._policy = ResamplePolicy.from_name(resampling, threshold)
        self._forward_smoothing = forward_smoothing
        self._keep_clouds = keep_clouds or not forward_smoothing

    @property
    def policy(self) -> ResamplePolicy:
        return self._policy

    @staticmethod
    def supported_kind() -> ModelKind:
        return density_kind

    def _make_sampler(
        self,
        model: HmmModel,
        observations: np.ndarray,
        n_particles: int,
        stream: np.random.Generator,
        log_messages: List[LogMessage],
    ) -> Tuple[ParticleFilter, Optional[float]]:
        raise NotImplementedError

    def _smooth(
        self,
        model: HmmModel,
        observations: np.ndarray,
        functional: AdditiveFunctional,
        n_particles: int,
        stream: np.random.Generator,
    ) -> SmoothingResult:
        log_messages: List[LogMessage] = []
        sampler, epsilon = self._make_sampler(
            model, observations, n_particles, stream, log_messages
        )
        try:
            run = run_forward_smoother(
                sampler,
                observations,
                functional if self._forward_smoothing else None,
                n_particles,
                stream,
                keep_clouds=self._keep_clouds,
            )
        except (ABCSDegenerateWeightsError, ABCSDegenerateBackwardKernelError) as e:
            LOGGER.warning("%s degenerated: %s", self.name, e)
            log_messages.append(LogMessage(LogLevel.WARNING, str(e)))
            return SmoothingResult(
                SmoothingStatus.DEGENERATE,
                None,
                self.name,
                epsilon=epsilon,
                failing_time=e.time_index,
                log_messages=log_messages,
            )
        path_estimate = run.path_estimate(functional) if self._keep_clouds else None
        estimate = run.fos_estimate if self._forward_smoothing else path_estimate
        return SmoothingResult(
            SmoothingStatus.COMPLETED,
            estimate,
            self.name,
            path_estimate=path_estimate,
            log_z=run.log_z.log_value,
            ess=run.last.ess(),
            epsilon=epsilon,
            log_messages=log_messages,
        )


class ExactSmcSmoother(ParticleSmoother):
    """SMC with the exact observation density and forward-only smoothing."""

    @property
    def name(self) -> str:
        return "smc_exact"

    @staticmethod
    def supports(model_kind: ModelKind) -> bool:
        return model_kind <= ExactSmcSmoother.supported_kind() and model_kind.has_obs_density()

    def _make_sampler(self, model, observations, n_particles, stream, log_messages):
        return BootstrapFilter(model, self._policy), None


class AbcSmoother(ParticleSmoother):
    """
    Base of the ABC smoothing engines. The tolerance is `epsilon` when given,
    otherwise it is calibrated on `calibration_grid` before the run.
    """

    def __init__(
        self,
        epsilon: Optional[float] = None,
        kernel: str = KernelShape.INDICATOR_L1.value,
        calibration_grid: Optional[Sequence[float]] = None,
        calibration_trials: int = 3,
        **kwargs,
    ):
        ParticleSmoother.__init__(self, **kwargs)
        if epsilon is None and calibration_grid is None:
            raise ABCSUsageError(f"{self.name} needs an epsilon or a calibration grid")
        self._epsilon = epsilon
        self._shape = KernelShape(kernel)
        self._calibration = (
            EpsilonCalibration(
                tuple(calibration_grid),
                calibration_trials,
                self._shape,
                rejection=self._rejection(),
                policy=self._policy,
            )
            if calibration_grid is not None
            else None
        )

    @staticmethod
    def supports(model_kind: ModelKind) -> bool:
        return model_kind <= AbcSmoother.supported_kind() and model_kind.has_obs_sampler()

    def _rejection(self) -> bool:
        return False

    def _filter(self, model: HmmModel, kernel: AbcKernel) -> ParticleFilter:
        raise NotImplementedError

    def _make_sampler(self, model, observations, n_particles, stream, log_messages):
        epsilon = self._epsilon
        if epsilon is None:
            assert self._calibration is not None
            res = calibrate_epsilon(model, observations, n_particles, self._calibration, stream)
            epsilon = res.epsilon
            log_messages.append(
                LogMessage(LogLevel.INFO, f"calibrated epsilon={epsilon:g} for N={n_particles}")
            )
        return self._filter(model, AbcKernel(epsilon, self._shape)), epsilon


class AbcSmcSmoother(AbcSmoother):
    """SMC on the ABC auxiliary model with a resampling policy."""

    @property
    def name(self) -> str:
        return "smc_abc"

    def _filter(self, model, kernel):
        return AbcFilter(model, kernel, self._policy)


class RsmcAbcSmoother(AbcSmoother):
    """SMC on the ABC auxiliary model with the rejection kernel; indicator potentials only."""

    def __init__(self, **kwargs):
        kernel = kwargs.pop("kernel", KernelShape.INDICATOR_L1.value)
        if KernelShape(kernel) != KernelShape.INDICATOR_L1:
            raise ABCSUsageError("rsmc_abc is defined for the indicator kernel only")
        AbcSmoother.__init__(self, kernel=kernel, **kwargs)

    @property
    def name(self) -> str:
        return "rsmc_abc"

    def _rejection(self) -> bool:
        return True

    def _filter(self, model, kernel):
        return RejectionAbcFilter(model, kernel)
