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
Tolerance calibration: the smallest `epsilon` of a descending grid for which
preliminary ABC runs keep a non-zero weight at every time step.
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from abc_smoothing.abc.filters import AbcFilter, RejectionAbcFilter
from abc_smoothing.abc.kernels import AbcKernel, KernelShape
from abc_smoothing.exceptions import (
    ABCSCalibrationError,
    ABCSDegenerateWeightsError,
    ABCSValueError,
)
from abc_smoothing.model.hmm import HmmModel
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.smc.filters import ParticleFilter
from abc_smoothing.utils import Stream, as_stream, derive_seed


LOGGER = logging.getLogger(__name__)


class CalibrationTrial(NamedTuple):
    epsilon: float
    trial: int
    success: bool
    first_failing_time: Optional[int]


@dataclass(frozen=True)
class EpsilonCalibration:
    """
    A strictly decreasing grid of candidate tolerances and the number of trial runs
    each candidate must survive.
    """

    grid: Tuple[float, ...]
    trials: int = 3
    shape: KernelShape = KernelShape.INDICATOR_L1
    rejection: bool = False
    policy: ResamplePolicy = field(default_factory=ResamplePolicy)

    def __post_init__(self):
        grid = tuple(float(e) for e in self.grid)
        object.__setattr__(self, "grid", grid)
        if isinstance(self.shape, str):
            object.__setattr__(self, "shape", KernelShape(self.shape))
        if len(grid) == 0:
            raise ABCSValueError("the calibration grid is empty")
        if any(e <= 0 for e in grid):
            raise ABCSValueError("calibration tolerances must be positive")
        if any(a <= b for a, b in zip(grid, grid[1:])):
            raise ABCSValueError(f"the calibration grid must be strictly decreasing, got {grid}")
        if self.trials < 1:
            raise ABCSValueError(f"at least one trial is needed, got {self.trials}")

    @staticmethod
    def powers_of_two(high: int, low: int, **kwargs) -> "EpsilonCalibration":
        """The grid `2^high, 2^(high-1), ..., 2^low`."""
        return EpsilonCalibration(
            tuple(2.0**k for k in range(high, low - 1, -1)), **kwargs
        )


@dataclass(frozen=True)
class CalibrationResult:
    epsilon: float
    trial_log: List[CalibrationTrial]


def _trial(
    sampler: ParticleFilter, observations: np.ndarray, n_particles: int, seed: int
) -> Optional[int]:
    """Runs one preliminary pass; returns the first failing time index or `None`."""
    rng = as_stream(seed)
    try:
        for _ in sampler.clouds(observations, n_particles, rng):
            pass
    except ABCSDegenerateWeightsError as e:
        return e.time_index
    return None


def calibrate_epsilon(
    model: HmmModel,
    observations: np.ndarray,
    n_particles: int,
    calibration: EpsilonCalibration,
    stream: Stream,
) -> CalibrationResult:
    """
    Walks the grid from its largest value downward and returns the last tolerance
    for which every trial completed all time steps. The walk stops at the first
    tolerance with a failing trial.

    :raises ABCSCalibrationError: if even the largest tolerance degenerates.
    """
    observations = np.asarray(observations, dtype=float)
    if observations.ndim == 1:
        observations = observations[:, None]
    base_seed = int(as_stream(stream).integers(0, 2**63 - 1))
    trial_log: List[CalibrationTrial] = []
    chosen: Optional[float] = None
    for eps in calibration.grid:
        kernel = AbcKernel(eps, calibration.shape)
        if calibration.rejection:
            sampler = RejectionAbcFilter(model, kernel)
        else:
            sampler = AbcFilter(model, kernel, calibration.policy)
        all_ok = True
        for trial in range(calibration.trials):
            failing = _trial(
                sampler,
                observations,
                n_particles,
                derive_seed(base_seed, "calibrate", eps, trial),
            )
            ok = failing is None
            trial_log.append(CalibrationTrial(eps, trial, ok, failing))
            LOGGER.info(
                "calibration epsilon=%g trial=%d success=%s first_failing_time=%s",
                eps,
                trial,
                ok,
                failing,
            )
            if not ok:
                all_ok = False
                break
        if not all_ok:
            break
        chosen = eps
    if chosen is None:
        raise ABCSCalibrationError(
            f"every trial degenerates already at epsilon={calibration.grid[0]}",
            [tuple(t) for t in trial_log],
        )
    LOGGER.info("calibrated epsilon=%g with N=%d", chosen, n_particles)
    return CalibrationResult(chosen, trial_log)
