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

from abc_smoothing.model.model_kind import ModelKind, density_kind, simulator_only_kind
from abc_smoothing.model.hmm import HmmModel, ThetaVector, Trajectory, simulate
from abc_smoothing.model.benchmark import NonlinearGrowthModel, ngm_transition_mean
from abc_smoothing.model.linear_gaussian import LinearGaussianModel, LinearGaussianSpec
from abc_smoothing.model.functional import (
    AdditiveFunctional,
    FunctionalKind,
    FunctionalTerm,
    build_functional,
    constant,
    from_terms,
    lag_autocovariance,
    mean_state,
)
from abc_smoothing.model.oracles import (
    GridOracleResult,
    GridSpec,
    KalmanResult,
    grid_oracle,
    kalman_functional_expectation,
    kalman_rts,
)
