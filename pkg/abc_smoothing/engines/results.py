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
"""This module defines the results returned by the engines."""

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import List, Optional

import numpy as np

from abc_smoothing.exceptions import ABCSUsageError
from abc_smoothing.pmmh.chain import PmmhChainState


class SmoothingStatus(Enum):
    """
    Enum representing the possible values in the `status` field of a :class:`~abc_smoothing.engines.SmoothingResult`:
    COMPLETED   -> The sampler reached the last observation; the estimates are set.
    DEGENERATE  -> Every weight (or a backward kernel row) vanished at some time; no estimate.
    """

    COMPLETED = auto()
    DEGENERATE = auto()


class ChainStatus(Enum):
    """
    Enum representing the possible values in the `status` field of a :class:`~abc_smoothing.engines.ChainResult`:
    COMPLETED    -> The chain ran all its iterations.
    INIT_FAILED  -> The SMC pass at the initial parameters degenerated; the chain is empty.
    """

    COMPLETED = auto()
    INIT_FAILED = auto()


class LogLevel(Enum):
    """
    Enum representing the 4 possible values in the verbosity level of a :class:`~abc_smoothing.engines.LogMessage`:
    DEBUG, INFO, WARNING and ERROR
    """

    DEBUG = auto()
    INFO = auto()
    WARNING = auto()
    ERROR = auto()


@dataclass
class LogMessage:
    """A message and its `LogLevel`."""

    level: LogLevel
    message: str


@dataclass
class Result:
    """This class represents the base class for results given by the engines to the user."""

    def is_definitive_result(self, *args) -> bool:
        raise NotImplementedError


@dataclass
class SmoothingResult(Result):
    """Class that represents the result of a smooth call."""

    status: SmoothingStatus
    estimate: Optional[np.ndarray]
    engine_name: str
    path_estimate: Optional[np.ndarray] = None
    log_z: Optional[float] = None
    ess: Optional[float] = None
    epsilon: Optional[float] = None
    failing_time: Optional[int] = None
    log_messages: Optional[List[LogMessage]] = field(default=None)

    def __post_init__(self):
        if self.status == SmoothingStatus.COMPLETED and self.estimate is None:
            raise ABCSUsageError(f"The Result status is {self.status} but no estimate is set.")
        if self.status == SmoothingStatus.DEGENERATE and self.estimate is not None:
            raise ABCSUsageError(
                f"The Result status is {self.status} but the estimate is {self.estimate}."
            )

    def is_definitive_result(self, *args) -> bool:
        return self.status == SmoothingStatus.COMPLETED


@dataclass
class ChainResult(Result):
    """Class that represents the result of a sample call."""

    status: ChainStatus
    chain: List[PmmhChainState]
    engine_name: str
    fos_estimate: Optional[np.ndarray] = None
    path_estimate: Optional[np.ndarray] = None
    acceptance_rate: float = 0.0
    epsilon: Optional[float] = None
    log_messages: Optional[List[LogMessage]] = field(default=None)

    def is_definitive_result(self, *args) -> bool:
        return self.status == ChainStatus.COMPLETED
