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
This module defines the `AbcKernel`, the potential `phi((u - y) / epsilon)` that
compares a pseudo-observation `u` with the datum `y`.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from abc_smoothing.exceptions import ABCSValueError


class KernelShape(Enum):
    """
    INDICATOR_L1 -> 1{|u - y|_1 / epsilon < 1}, the L1 norm over the whole vector
    GAUSSIAN     -> the density of N(y, epsilon^2 I) at u
    """

    INDICATOR_L1 = "indicator_l1"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class AbcKernel:
    """
    An ABC potential with tolerance `epsilon`.

    When `normalized` is `True` the kernel integrates to one in `u`; by default the
    gaussian kernel is normalized and the indicator kernel is used as a 0/1 potential.
    """

    epsilon: float
    shape: KernelShape = KernelShape.INDICATOR_L1
    normalized: Optional[bool] = None

    def __post_init__(self):
        if isinstance(self.shape, str):
            try:
                object.__setattr__(self, "shape", KernelShape(self.shape))
            except ValueError:
                raise ABCSValueError(
                    f"unknown kernel shape {self.shape!r}; known: "
                    f"{[s.value for s in KernelShape]}"
                )
        if not (self.epsilon > 0):
            raise ABCSValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.normalized is None:
            object.__setattr__(
                self, "normalized", self.shape == KernelShape.GAUSSIAN
            )

    @staticmethod
    def indicator(epsilon: float, normalized: bool = False) -> "AbcKernel":
        return AbcKernel(epsilon, KernelShape.INDICATOR_L1, normalized)

    @staticmethod
    def gaussian(epsilon: float, normalized: bool = True) -> "AbcKernel":
        return AbcKernel(epsilon, KernelShape.GAUSSIAN, normalized)

    @property
    def is_indicator(self) -> bool:
        return self.shape == KernelShape.INDICATOR_L1

    def with_epsilon(self, epsilon: float) -> "AbcKernel":
        return AbcKernel(epsilon, self.shape, self.normalized)

    def _log_constant(self, dim: int) -> float:
        if not self.normalized:
            return 0.0
        if self.shape == KernelShape.GAUSSIAN:
            return -0.5 * dim * math.log(2.0 * math.pi * self.epsilon**2)
        # the L1 ball of radius epsilon in R^d has volume (2 epsilon)^d / d!
        return math.lgamma(dim + 1) - dim * math.log(2.0 * self.epsilon)

    def log_potential(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Returns `log phi((u - y) / epsilon)` for every row of `u`, `-inf` outside the
        indicator ball.
        """
        u = np.asarray(u, dtype=float)
        y = np.asarray(y, dtype=float)
        if u.shape[-1:] != y.shape[-1:]:
            raise ABCSValueError(
                f"pseudo-observation has dimension {u.shape[-1:]}, datum has {y.shape[-1:]}"
            )
        dim = y.shape[-1]
        diff = u - y
        if self.shape == KernelShape.GAUSSIAN:
            res = -0.5 * np.sum(diff * diff, axis=-1) / self.epsilon**2
        else:
            inside = np.sum(np.abs(diff), axis=-1) / self.epsilon < 1.0
            res = np.where(inside, 0.0, -np.inf)
        return res + self._log_constant(dim)

    def weight(self, u: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.exp(self.log_potential(u, y))


def kernel_weight(kernel: AbcKernel, u: np.ndarray, y: np.ndarray) -> float:
    """
    Returns the potential of a single pseudo-observation.

    >>> kernel_weight(AbcKernel.indicator(1.0), [0.5], [0.0])
    1.0
    >>> kernel_weight(AbcKernel.indicator(1.0), [1.5], [0.0])
    0.0
    >>> round(kernel_weight(AbcKernel.gaussian(2.0), [3.0], [3.0]), 5)
    0.19947
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if u.shape != y.shape:
        raise ABCSValueError(f"u has shape {u.shape}, y has shape {y.shape}")
    return float(kernel.weight(u, y))
