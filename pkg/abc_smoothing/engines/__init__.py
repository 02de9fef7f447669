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

from abc_smoothing.engines.engine import Engine
from abc_smoothing.engines.factory import Factory
from abc_smoothing.engines.mixins import SamplerMixin, SmootherMixin
from abc_smoothing.engines.results import (
    ChainResult,
    ChainStatus,
    LogLevel,
    LogMessage,
    Result,
    SmoothingResult,
    SmoothingStatus,
)
from abc_smoothing.engines.particle_smoothers import (
    AbcSmcSmoother,
    ExactSmcSmoother,
    RsmcAbcSmoother,
)
from abc_smoothing.engines.pmmh_samplers import AbcPmmhSampler, ExactPmmhSampler

__all__ = [
    "Engine",
    "Factory",
    "SamplerMixin",
    "SmootherMixin",
    "ChainResult",
    "ChainStatus",
    "LogLevel",
    "LogMessage",
    "Result",
    "SmoothingResult",
    "SmoothingStatus",
    "AbcSmcSmoother",
    "ExactSmcSmoother",
    "RsmcAbcSmoother",
    "AbcPmmhSampler",
    "ExactPmmhSampler",
]
