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

from abc_smoothing.pmmh.priors import PriorSpec, ProposalSpec
from abc_smoothing.pmmh.chain import (
    EXACT,
    PmmhChainState,
    PmmhSetup,
    acceptance_rate,
    acceptance_ratio,
    pmmh_fos_estimate,
    pmmh_init,
    pmmh_path_estimate,
    pmmh_step,
    posterior_mean,
    run_chain,
)
