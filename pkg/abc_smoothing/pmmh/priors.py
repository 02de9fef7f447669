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
"""This module defines the prior and the proposal of the PMMH chain over `theta`."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import stats

from abc_smoothing.exceptions import ABCSInvalidModelError, ABCSValueError
from abc_smoothing.model.hmm import ThetaVector


@dataclass(frozen=True)
class PriorSpec:
    """
    Independent priors on the components of `theta`.

    `components` maps every parameter name to the `(shape, scale)` of an
    inverse-gamma law; `log_density_fn`, when given, replaces the product of
    inverse-gamma densities. An empty spec is the flat prior.
    """

    components: Mapping[str, Tuple[float, float]] = field(default_factory=dict)
    log_density_fn: Optional[Callable[[ThetaVector], float]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        for name, (a, b) in self.components.items():
            if a <= 0 or b <= 0:
                raise ABCSValueError(
                    f"inverse-gamma prior of {name} needs positive shape and scale, got ({a}, {b})"
                )

    @staticmethod
    def inverse_gamma(
        names: Tuple[str, ...], shape: float = 2.0, scale: float = 2.0
    ) -> "PriorSpec":
        return PriorSpec({name: (shape, scale) for name in names})

    @staticmethod
    def flat() -> "PriorSpec":
        return PriorSpec()

    @staticmethod
    def from_log_density(fn: Callable[[ThetaVector], float]) -> "PriorSpec":
        return PriorSpec(log_density_fn=fn)

    def log_density(self, theta: ThetaVector) -> float:
        if self.log_density_fn is not None:
            return float(self.log_density_fn(theta))
        res = 0.0
        for name, (a, b) in self.components.items():
            res += float(stats.invgamma.logpdf(theta[name], a, scale=b))
        return res

    def sample(self, names: Tuple[str, ...], stream: np.random.Generator) -> ThetaVector:
        values: Dict[str, float] = {}
        for name in names:
            if name not in self.components:
                raise ABCSValueError(f"no sampling law for parameter {name}")
            a, b = self.components[name]
            values[name] = float(stats.invgamma.rvs(a, scale=b, random_state=stream))
        return ThetaVector(values)


@dataclass(frozen=True)
class ProposalSpec:
    """
    Gaussian random walk on `theta`, per-parameter standard deviations `scales`.

    With `log_transform` the walk acts on the log of each variance; it is symmetric
    there, and `log_q_ratio` returns the Jacobian `sum(log theta' - log theta)`. A
    zero scale keeps its parameter fixed.
    """

    scales: Mapping[str, float]
    log_transform: bool = True

    def __post_init__(self):
        for name, s in self.scales.items():
            if s < 0 or not np.isfinite(s):
                raise ABCSValueError(f"proposal scale of {name} must be finite and >= 0, got {s}")

    @property
    def symmetric(self) -> bool:
        """`True` when `q(theta, theta') = q(theta', theta)` in the `theta` space."""
        return not self.log_transform

    def _scale_array(self, names: Tuple[str, ...]) -> np.ndarray:
        return np.array([self.scales.get(name, 0.0) for name in names])

    def propose(
        self, theta: ThetaVector, stream: np.random.Generator
    ) -> Optional[ThetaVector]:
        """Returns `theta'`, or `None` when it leaves the parameter domain."""
        names = theta.names
        scales = self._scale_array(names)
        current = theta.as_array()
        noise = stream.standard_normal(len(names))
        if self.log_transform:
            moved = np.exp(np.log(current) + scales * noise)
        else:
            moved = current + scales * noise
        values = np.where(scales > 0, moved, current)
        try:
            return ThetaVector.from_array(names, values)
        except ABCSInvalidModelError:
            return None

    def log_q_ratio(self, theta_prop: ThetaVector, theta_cur: ThetaVector) -> float:
        """Returns `log q(theta', theta) - log q(theta, theta')`."""
        if not self.log_transform:
            return 0.0
        return float(np.sum(np.log(theta_prop.as_array()) - np.log(theta_cur.as_array())))
