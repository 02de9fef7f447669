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
from warnings import warn

import numpy as np

import abc_smoothing as abcs
from abc_smoothing.exceptions import ABCSUnsupportedModelKindError, ABCSValueError
from abc_smoothing.utils import Stream, as_stream


class SamplerMixin:
    """Base class that must be extended by an :class:`~abc_smoothing.engines.Engine` that is also a `Sampler`."""

    @staticmethod
    def is_sampler() -> bool:
        return True

    def sample(
        self,
        model: "abcs.model.HmmModel",
        observations: np.ndarray,
        functional: Optional["abcs.model.AdditiveFunctional"],
        n_particles: int,
        n_iterations: int,
        burn_in: int = 0,
        stream: Stream = None,
        theta0: Optional["abcs.model.ThetaVector"] = None,
    ) -> "abcs.engines.results.ChainResult":
        """
        Runs a PMMH chain over the static parameters of `model`.

        :param model: the model family; its current `theta` is the default start.
        :param observations: the data `y_{0:n}`.
        :param functional: when given, every iteration also smooths it.
        :param n_particles: the number of particles of every SMC pass.
        :param n_iterations: the number of Metropolis-Hastings moves.
        :param burn_in: the number of leading states dropped from the estimates.
        :param stream: a seed or a `numpy.random.Generator`.
        :param theta0: the initial parameters, defaults to `model.theta`.
        """
        assert isinstance(self, abcs.engines.engine.Engine)
        model_kind = model.kind
        if not self.skip_checks and not self.supports(model_kind):
            msg = f"{self.name} cannot run on this kind of model!\n{model_kind}"
            if self.error_on_failed_checks:
                raise ABCSUnsupportedModelKindError(msg)
            else:
                warn(msg)
        if burn_in < 0 or burn_in > n_iterations:
            raise ABCSValueError(f"burn_in must lie in [0, {n_iterations}], got {burn_in}")
        observations = np.asarray(observations, dtype=float)
        if observations.ndim == 1:
            observations = observations[:, None]
        return self._sample(
            model,
            observations,
            functional,
            n_particles,
            n_iterations,
            burn_in,
            as_stream(stream),
            theta0 if theta0 is not None else model.theta,
        )

    def _sample(
        self,
        model: "abcs.model.HmmModel",
        observations: np.ndarray,
        functional: Optional["abcs.model.AdditiveFunctional"],
        n_particles: int,
        n_iterations: int,
        burn_in: int,
        stream: np.random.Generator,
        theta0: "abcs.model.ThetaVector",
    ) -> "abcs.engines.results.ChainResult":
        """Method called by the SamplerMixin.sample method."""
        raise NotImplementedError
