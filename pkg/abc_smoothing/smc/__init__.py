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

from abc_smoothing.smc.resampling import (
    ess,
    log_mean,
    log_sum,
    multinomial_resample,
    normalized_weights,
)
from abc_smoothing.smc.cloud import ParticleCloud, ResampleMode, ResamplePolicy
from abc_smoothing.smc.steps import select_parents, smc_init, smc_step, weighted_cloud
from abc_smoothing.smc.estimates import (
    Genealogy,
    NormalizingConstant,
    log_normalizing_constant,
    normalizing_constant,
    path_estimate,
)
from abc_smoothing.smc.filters import BootstrapFilter, ParticleFilter
