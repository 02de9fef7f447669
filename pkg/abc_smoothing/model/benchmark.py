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
The nonlinear growth benchmark:

    X_n = X_{n-1}/2 + 25 X_{n-1}/(1 + X_{n-1}^2) + 8 cos(1.2 n) + zeta_X,   n >= 1
    Y_n = X_n^2 / 20 + zeta_Y,                                              n >= 0

with `X_0 = 0_d`, `zeta_X ~ N(0, sigma_x2 I_d)` and `zeta_Y ~ N(0, sigma_y2 I_d)`.
For `d > 1` the scalar maps apply componentwise.
"""

from typing import Optional

import numpy as np

from abc_smoothing.exceptions import ABCSValueError
from abc_smoothing.model.hmm import HmmModel, ThetaVector


DEFAULT_THETA = ThetaVector({"sigma_x2": 10.0, "sigma_y2": 1.0})


def ngm_transition_mean(x: np.ndarray, n: int) -> np.ndarray:
    """
    Returns `x/2 + 25x/(1+x^2) + 8cos(1.2n)`, componentwise.

    The forcing uses the destination index: the first transition has `n = 1`.

    >>> float(ngm_transition_mean(np.zeros(1), 1)[0])  # doctest: +ELLIPSIS
    2.8988...
    """
    if n < 1:
        raise ABCSValueError(f"transition time index must be >= 1, got {n}")
    x = np.asarray(x, dtype=float)
    return x / 2.0 + 25.0 * x / (1.0 + x * x) + 8.0 * np.cos(1.2 * n)


def isotropic_gaussian_logpdf(
    x: np.ndarray, mean: np.ndarray, variance: float
) -> np.ndarray:
    """Log density of `N(mean, variance I_d)` at `x`, summed over the last axis."""
    diff = np.asarray(x, dtype=float) - mean
    d = diff.shape[-1]
    return -0.5 * d * np.log(2.0 * np.pi * variance) - 0.5 * np.sum(
        diff * diff, axis=-1
    ) / variance


class NonlinearGrowthModel(HmmModel):
    """The nonlinear growth benchmark model in dimension `dim`."""

    def __init__(self, dim: int = 1, theta: Optional[ThetaVector] = None):
        theta = DEFAULT_THETA if theta is None else theta
        HmmModel.__init__(self, dim, dim, theta)
        self._sigma_x2 = theta["sigma_x2"]
        self._sigma_y2 = theta["sigma_y2"]

    @property
    def name(self) -> str:
        return "benchmark"

    @property
    def initial_point(self) -> Optional[np.ndarray]:
        return np.zeros(self.dim_x)

    def with_theta(self, theta: ThetaVector) -> "NonlinearGrowthModel":
        res = NonlinearGrowthModel(self.dim_x, theta)
        res._obs_density_available = self._obs_density_available
        return res

    def sample_initial(self, n_particles: int, stream: np.random.Generator) -> np.ndarray:
        return np.zeros((n_particles, self.dim_x))

    def log_initial_density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        at_origin = np.all(x == 0.0, axis=-1)
        return np.where(at_origin, 0.0, -np.inf)

    def sample_transition(
        self, x_prev: np.ndarray, n: int, stream: np.random.Generator
    ) -> np.ndarray:
        mean = ngm_transition_mean(x_prev, n)
        return mean + np.sqrt(self._sigma_x2) * stream.standard_normal(mean.shape)

    def log_transition_density(
        self, x_prev: np.ndarray, x: np.ndarray, n: int
    ) -> np.ndarray:
        return isotropic_gaussian_logpdf(x, ngm_transition_mean(x_prev, n), self._sigma_x2)

    def observation_mean(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x * x / 20.0

    def sample_observation(
        self, x: np.ndarray, n: int, stream: np.random.Generator
    ) -> np.ndarray:
        mean = self.observation_mean(x)
        return mean + np.sqrt(self._sigma_y2) * stream.standard_normal(mean.shape)

    def _log_obs_density(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        return isotropic_gaussian_logpdf(y, self.observation_mean(x), self._sigma_y2)
