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
"""Estimates read off a run of SMC clouds: the normalizing constant and path-space averages."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from abc_smoothing.exceptions import ABCSUsageError, ABCSValueError
from abc_smoothing.model.functional import AdditiveFunctional
from abc_smoothing.smc.cloud import ParticleCloud


@dataclass(frozen=True)
class NormalizingConstant:
    """`log Z` estimate; `degenerate` is set when some step factor was zero."""

    log_value: float
    degenerate: bool = False


def normalizing_constant(step_weight_means: Sequence[float]) -> NormalizingConstant:
    """
    Returns `log Z_p = sum_n log(step_weight_means[n])`, one factor per time step.

    >>> normalizing_constant([0.5, 0.25]).log_value == float(np.log(0.125))
    True
    """
    means = np.asarray(step_weight_means, dtype=float)
    if np.any(means < 0) or np.any(~np.isfinite(means)):
        raise ABCSValueError("step weight means must be finite and non-negative")
    if np.any(means == 0):
        return NormalizingConstant(-np.inf, True)
    return NormalizingConstant(float(np.sum(np.log(means))))


def log_normalizing_constant(clouds: Sequence[ParticleCloud]) -> NormalizingConstant:
    """Returns `log Z` from the log step factors stored in the clouds of one run."""
    log_means = np.array([c.log_step_weight_mean for c in clouds], dtype=float)
    if np.any(np.isneginf(log_means)):
        return NormalizingConstant(-np.inf, True)
    return NormalizingConstant(float(np.sum(log_means)))


class Genealogy:
    """
    The ancestor arrays of a run; `ancestry()[q, i]` is the index at time `q` of the
    ancestor of terminal particle `i`, following `b_q^i = a_{q+1}^{b_{q+1}^i}`.
    """

    def __init__(self, ancestors: Sequence[np.ndarray]):
        self._ancestors = [np.asarray(a, dtype=np.int64) for a in ancestors]
        if len(self._ancestors) == 0:
            raise ABCSUsageError("a genealogy needs at least one time step")

    @staticmethod
    def from_clouds(clouds: Sequence[ParticleCloud]) -> "Genealogy":
        for t, cloud in enumerate(clouds):
            if cloud.time != t:
                raise ABCSUsageError(
                    f"the genealogy needs the clouds of every time 0..n, got time {cloud.time} at position {t}"
                )
        return Genealogy([c.ancestors for c in clouds])

    @property
    def horizon(self) -> int:
        return len(self._ancestors) - 1

    def ancestry(self) -> np.ndarray:
        n = self.horizon
        size = len(self._ancestors[-1])
        b = np.empty((n + 1, size), dtype=np.int64)
        b[n] = np.arange(size)
        for q in range(n - 1, -1, -1):
            b[q] = self._ancestors[q + 1][b[q + 1]]
        return b

    def paths(self, clouds: Sequence[ParticleCloud]) -> np.ndarray:
        """Returns the ancestral paths of the terminal particles, shape `(N, n+1, dim_x)`."""
        b = self.ancestry()
        return np.stack([clouds[q].particles[b[q]] for q in range(len(b))], axis=1)

    def path(self, clouds: Sequence[ParticleCloud], index: int) -> np.ndarray:
        """Returns the ancestral path of terminal particle `index`, shape `(n+1, dim_x)`."""
        b = self.ancestry()
        return np.stack([clouds[q].particles[b[q, index]] for q in range(len(b))])


def path_estimate(
    clouds: Sequence[ParticleCloud], functional: AdditiveFunctional
) -> np.ndarray:
    """
    The path-space estimate `sum_i Wbar_n^i V_n(x_{0:n}^{b^i})` over the ancestral
    lines of the terminal cloud. Needs every cloud of the run.
    """
    if len(clouds) != functional.horizon + 1:
        raise ABCSUsageError(
            f"path_estimate needs {functional.horizon + 1} clouds, got {len(clouds)}"
        )
    genealogy = Genealogy.from_clouds(clouds)
    values = functional.evaluate_paths(genealogy.paths(clouds))
    return clouds[-1].normalized_weights() @ values
