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
"""This module contains all custom exceptions."""

from typing import List, Optional, Tuple


class ABCSException(Exception):
    """Base class for all custom exceptions of the abc_smoothing (ABCS) library."""

    pass


class ABCSInvalidModelError(ABCSException):
    pass


class ABCSValueError(ABCSException, ValueError):
    pass


class ABCSUsageError(ABCSException):
    pass


class ABCSChainInitializationError(ABCSUsageError):
    """Raised when the SMC pass at the initial parameters of a PMMH chain degenerates."""

    pass


class ABCSConfigError(ABCSException):
    pass


class ABCSOracleError(ABCSException):
    pass


class ABCSGridAccuracyError(ABCSOracleError):
    pass


class ABCSNoSuitableEngineAvailableException(ABCSException):
    pass


class ABCSUnsupportedModelKindError(ABCSException):
    pass


class ABCSDegenerateWeightsError(ABCSException):
    """Raised when every particle weight of a cloud is zero."""

    def __init__(self, message: str, time_index: Optional[int] = None):
        super().__init__(message)
        self.time_index = time_index


class ABCSDegenerateBackwardKernelError(ABCSException):
    """Raised when a row of the forward-smoothing backward kernel has zero mass."""

    def __init__(self, message: str, time_index: Optional[int] = None):
        super().__init__(message)
        self.time_index = time_index


class ABCSCalibrationError(ABCSException):
    """
    Raised when no tolerance of a calibration grid survives its trial runs.

    The `trial_log` holds `(epsilon, trial, success, first_failing_time)` tuples.
    """

    def __init__(
        self,
        message: str,
        trial_log: Optional[List[Tuple[float, int, bool, Optional[int]]]] = None,
    ):
        super().__init__(message)
        self.trial_log = list(trial_log) if trial_log is not None else []
