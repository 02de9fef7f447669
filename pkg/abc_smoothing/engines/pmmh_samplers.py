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
"""The PMMH engines: `pmmh_exact` and `pmmh_abc`."""

import logging
from typing import List, Mapping, Optional, Union

import numpy as np

from abc_smoothing.abc.kernels import AbcKernel, KernelShape
from abc_smoothing.engines.engine import Engine
from abc_smoothing.engines.mixins.sampler import SamplerMixin
from abc_smoothing.engines.results import ChainResult, ChainStatus, LogLevel, LogMessage
from abc_smoothing.exceptions import ABCSChainInitializationError, ABCSUsageError
from abc_smoothing.model.functional import AdditiveFunctional
from abc_smoothing.model.hmm import HmmModel, ThetaVector
from abc_smoothing.model.model_kind import ModelKind, density_kind
from abc_smoothing.pmmh.chain import (
    EXACT,
    PmmhSetup,
    acceptance_rate,
    pmmh_fos_estimate,
    pmmh_path_estimate,
    run_chain,
)
from abc_smoothing.pmmh.priors import PriorSpec, ProposalSpec
from abc_smoothing.smc.cloud import ResamplePolicy


LOGGER = logging.getLogger(__name__)

DEFAULT_PROPOSAL_SCALE = 0.2


class PmmhSampler(Engine, SamplerMixin):
    """
    Base class of the PMMH engines.

    :param prior: the prior; defaults to inverse-gamma `(prior_shape, prior_scale)`
        on every component of `theta`.
    :param proposal_scales: per-parameter random-walk scales on the log variances;
        a missing parameter gets `proposal_scale`.
    :param resampling: the resampling policy name of every SMC pass.
    :param forward_smoothing: when `False` the chain only tracks the selected paths.
    """

    def __init__(
        self,
        prior: Optional[PriorSpec] = None,
        prior_shape: float = 2.0,
        prior_scale: float = 2.0,
        proposal_scales: Optional[Mapping[str, float]] = None,
        proposal_scale: float = DEFAULT_PROPOSAL_SCALE,
        resampling: str = "ess_threshold",
        threshold: float = 0.5,
        forward_smoothing: bool = True,
        **kwargs,
    ):
        Engine.__init__(self)
        self._forward_smoothing = forward_smoothing
        self._prior = prior
        self._prior_shape = prior_shape
        self._prior_scale = prior_scale
        self._proposal_scales = dict(proposal_scales or {})
        self._proposal_scale = proposal_scale
        self._policy = ResamplePolicy.from_name(resampling, threshold)

    @staticmethod
    def supported_kind() -> ModelKind:
        return density_kind

    def _mode(self) -> Union[str, AbcKernel]:
        raise NotImplementedError

    def _setup(
        self,
        model: HmmModel,
        observations: np.ndarray,
        functional: Optional[AdditiveFunctional],
        n_particles: int,
        theta0: ThetaVector,
    ) -> PmmhSetup:
        prior = self._prior
        if prior is None:
            prior = PriorSpec.inverse_gamma(theta0.names, self._prior_shape, self._prior_scale)
        scales = {
            name: self._proposal_scales.get(name, self._proposal_scale)
            for name in theta0.names
        }
        return PmmhSetup(
            model=model,
            prior=prior,
            proposal=ProposalSpec(scales),
            observations=observations,
            n_particles=n_particles,
            mode=self._mode(),
            functional=functional,
            policy=self._policy,
            forward_smoothing=self._forward_smoothing,
        )

    def _sample(
        self,
        model,
        observations,
        functional,
        n_particles,
        n_iterations,
        burn_in,
        stream,
        theta0,
    ) -> ChainResult:
        setup = self._setup(model, observations, functional, n_particles, theta0)
        log_messages: List[LogMessage] = []
        epsilon = setup.mode.epsilon if isinstance(setup.mode, AbcKernel) else None
        try:
            chain = run_chain(setup, theta0, n_iterations, stream)
        except ABCSChainInitializationError as e:
            LOGGER.warning("%s could not start: %s", self.name, e)
            log_messages.append(LogMessage(LogLevel.ERROR, str(e)))
            return ChainResult(
                ChainStatus.INIT_FAILED,
                [],
                self.name,
                epsilon=epsilon,
                log_messages=log_messages,
            )
        rate = acceptance_rate(chain)
        log_messages.append(LogMessage(LogLevel.INFO, f"acceptance rate {rate:.3f}"))
        fos = path = None
        if functional is not None:
            if self._forward_smoothing:
                fos = pmmh_fos_estimate(chain, burn_in)
            path = pmmh_path_estimate(chain, burn_in)
        return ChainResult(
            ChainStatus.COMPLETED,
            chain,
            self.name,
            fos_estimate=fos,
            path_estimate=path,
            acceptance_rate=rate,
            epsilon=epsilon,
            log_messages=log_messages,
        )


class ExactPmmhSampler(PmmhSampler):
    """PMMH with exact-likelihood SMC passes."""

    @property
    def name(self) -> str:
        return "pmmh_exact"

    @staticmethod
    def supports(model_kind: ModelKind) -> bool:
        return model_kind <= ExactPmmhSampler.supported_kind() and model_kind.has_obs_density()

    def _mode(self):
        return EXACT


class AbcPmmhSampler(PmmhSampler):
    """PMMH on the ABC auxiliary model with a fixed tolerance."""

    def __init__(
        self,
        epsilon: Optional[float] = None,
        kernel: str = KernelShape.INDICATOR_L1.value,
        **kwargs,
    ):
        PmmhSampler.__init__(self, **kwargs)
        if epsilon is None:
            raise ABCSUsageError("pmmh_abc needs a calibrated epsilon")
        self._kernel = AbcKernel(epsilon, KernelShape(kernel))

    @property
    def name(self) -> str:
        return "pmmh_abc"

    @staticmethod
    def supports(model_kind: ModelKind) -> bool:
        return model_kind <= AbcPmmhSampler.supported_kind() and model_kind.has_obs_sampler()

    def _mode(self):
        return self._kernel
