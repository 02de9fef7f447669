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

from warnings import warn

import numpy as np

import abc_smoothing as abcs
from abc_smoothing.exceptions import ABCSUnsupportedModelKindError, ABCSValueError
from abc_smoothing.utils import Stream, as_stream


class SmootherMixin:
    """Base class that must be extended by an :class:`~abc_smoothing.engines.Engine` that is also a `Smoother`."""

    @staticmethod
    def is_smoother() -> bool:
        return True

    def smooth(
        self,
        model: "abcs.model.HmmModel",
        observations: np.ndarray,
        functional: "abcs.model.AdditiveFunctional",
        n_particles: int,
        stream: Stream = None,
    ) -> "abcs.engines.results.SmoothingResult":
        """
        Estimates the smoothed expectation of `functional` given `observations`.

        :param model: the model whose latent path is smoothed.
        :param observations: the data `y_{0:n}`, shape `(n+1, dim_y)`.
        :param functional: the additive functional, with horizon `n`.
        :param n_particles: the number of particles `N`.
        :param stream: a seed or a `numpy.random.Generator`.
        :return: the `SmoothingResult`; a degenerate run gives a result with status
            `DEGENERATE` instead of an exception.
        """
        assert isinstance(self, abcs.engines.engine.Engine)
        model_kind = model.kind
        if not self.skip_checks and not self.supports(model_kind):
            msg = f"{self.name} cannot run on this kind of model!\n{model_kind}"
            if self.error_on_failed_checks:
                raise ABCSUnsupportedModelKindError(msg)
            else:
                warn(msg)
        observations = np.asarray(observations, dtype=float)
        if observations.ndim == 1:
            observations = observations[:, None]
        if functional.horizon != len(observations) - 1:
            raise ABCSValueError(
                f"functional has horizon {functional.horizon}, data has horizon {len(observations) - 1}"
            )
        return self._smooth(model, observations, functional, n_particles, as_stream(stream))

    def _smooth(
        self,
        model: "abcs.model.HmmModel",
        observations: np.ndarray,
        functional: "abcs.model.AdditiveFunctional",
        n_particles: int,
        stream: np.random.Generator,
    ) -> "abcs.engines.results.SmoothingResult":
        """Method called by the SmootherMixin.smooth method."""
        raise NotImplementedError
