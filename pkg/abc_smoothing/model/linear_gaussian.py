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
The linear-Gaussian reference model

    X_n = a X_{n-1} + xi_n,     xi_n ~ N(0, sigma_x2 I_d)
    Y_n = c X_n + zeta_n,       zeta_n ~ N(0, sigma_y2 I_d)

with `X_0 ~ N(initial_mean, initial_var I_d)`, or `X_0 = initial_mean` when
`initial_var` is zero. Its smoother is known exactly through the Kalman/RTS
recursions, see :func:`abc_smoothing.model.kalman_rts`.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from abc_smoothing.exceptions import ABCSInvalidModelError
from abc_smoothing.model.benchmark import isotropic_gaussian_logpdf
from abc_smoothing.model.hmm import HmmModel, ThetaVector


DEFAULT_THETA = ThetaVector({"sigma_x2": 1.0, "sigma_y2": 1.0})


@dataclass(frozen=True)
class LinearGaussianSpec:
    """
    Matrix form of a linear-Gaussian state-space model, consumed by the Kalman oracle.

    `state_cov` may be singular (noise-free dynamics); `obs_cov` must be positive definite.
    """

    transition: np.ndarray
    emission: np.ndarray
    state_cov: np.ndarray
    obs_cov: np.ndarray
    initial_mean: np.ndarray
    initial_cov: np.ndarray

    @staticmethod
    def scalar(
        a: float,
        c: float,
        q: float,
        r: float,
        m0: float = 0.0,
        p0: float = 1.0,
    ) -> "LinearGaussianSpec":
        return LinearGaussianSpec(
            transition=np.array([[a]], dtype=float),
            emission=np.array([[c]], dtype=float),
            state_cov=np.array([[q]], dtype=float),
            obs_cov=np.array([[r]], dtype=float),
            initial_mean=np.array([m0], dtype=float),
            initial_cov=np.array([[p0]], dtype=float),
        )

    def validate(self):
        for name in ("state_cov", "initial_cov"):
            cov = getattr(self, name)
            if np.any(np.linalg.eigvalsh(0.5 * (cov + cov.T)) < -1e-12):
                raise ABCSInvalidModelError(f"{name} must be positive semi-definite")
        if np.any(np.linalg.eigvalsh(0.5 * (self.obs_cov + self.obs_cov.T)) <= 0):
            raise ABCSInvalidModelError("obs_cov must be positive definite")


class LinearGaussianModel(HmmModel):
    """
    Isotropic linear-Gaussian model in dimension `dim` with scalar coefficients `a`, `c`.

    The defaults (`a = 0.9`, `c = 1`, unit variances) give a stable, ergodic chain.
    """

    def __init__(
        self,
        a: float = 0.9,
        c: float = 1.0,
        theta: Optional[ThetaVector] = None,
        dim: int = 1,
        initial_mean: float = 0.0,
        initial_var: float = 1.0,
    ):
        theta = DEFAULT_THETA if theta is None else theta
        HmmModel.__init__(self, dim, dim, theta)
        if initial_var < 0:
            raise ABCSInvalidModelError(
                f"initial variance must be non-negative, got {initial_var}"
            )
        self._a = float(a)
        self._c = float(c)
        self._q = theta["sigma_x2"]
        self._r = theta["sigma_y2"]
        self._m0 = float(initial_mean)
        self._p0 = float(initial_var)

    @property
    def name(self) -> str:
        return "linear_gaussian"

    @property
    def a(self) -> float:
        return self._a

    @property
    def c(self) -> float:
        return self._c

    @property
    def initial_point(self) -> Optional[np.ndarray]:
        if self._p0 == 0.0:
            return np.full(self.dim_x, self._m0)
        return None

    def _dynamics_feature(self) -> str:
        return "LINEAR_GAUSSIAN"

    def with_theta(self, theta: ThetaVector) -> "LinearGaussianModel":
        res = LinearGaussianModel(
            self._a, self._c, theta, self.dim_x, self._m0, self._p0
        )
        res._obs_density_available = self._obs_density_available
        return res

    def inflate_observation_variance(self, epsilon: float) -> "LinearGaussianModel":
        """
        Returns the auxiliary model obtained by convolving the observation density
        with a `N(0, epsilon^2 I)` ABC kernel: the observation variance becomes
        `sigma_y2 + epsilon^2`.
        """
        theta = self.theta.replace(sigma_y2=self._r + float(epsilon) ** 2)
        return self.with_theta(theta)

    def state_space(self) -> LinearGaussianSpec:
        eye = np.eye(self.dim_x)
        return LinearGaussianSpec(
            transition=self._a * eye,
            emission=self._c * eye,
            state_cov=self._q * eye,
            obs_cov=self._r * eye,
            initial_mean=np.full(self.dim_x, self._m0),
            initial_cov=self._p0 * eye,
        )

    def sample_initial(self, n_particles: int, stream: np.random.Generator) -> np.ndarray:
        shape = (n_particles, self.dim_x)
        if self._p0 == 0.0:
            return np.full(shape, self._m0)
        return self._m0 + np.sqrt(self._p0) * stream.standard_normal(shape)

    def log_initial_density(self, x: np.ndarray) -> np.ndarray:
        if self._p0 == 0.0:
            at_mean = np.all(np.asarray(x) == self._m0, axis=-1)
            return np.where(at_mean, 0.0, -np.inf)
        return isotropic_gaussian_logpdf(x, self._m0, self._p0)

    def sample_transition(
        self, x_prev: np.ndarray, n: int, stream: np.random.Generator
    ) -> np.ndarray:
        mean = self._a * np.asarray(x_prev, dtype=float)
        return mean + np.sqrt(self._q) * stream.standard_normal(mean.shape)

    def log_transition_density(
        self, x_prev: np.ndarray, x: np.ndarray, n: int
    ) -> np.ndarray:
        return isotropic_gaussian_logpdf(x, self._a * np.asarray(x_prev), self._q)

    def sample_observation(
        self, x: np.ndarray, n: int, stream: np.random.Generator
    ) -> np.ndarray:
        mean = self._c * np.asarray(x, dtype=float)
        return mean + np.sqrt(self._r) * stream.standard_normal(mean.shape)

    def _log_obs_density(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        return isotropic_gaussian_logpdf(y, self._c * np.asarray(x), self._r)
