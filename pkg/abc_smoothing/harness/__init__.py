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

from abc_smoothing.harness.config import (
    ConfigGrammar,
    ConfigReader,
    ExperimentConfig,
    load_config,
    preset_entries,
)
from abc_smoothing.harness.experiment import (
    ErrorRecord,
    ExperimentResult,
    SummaryRow,
    Truth,
    build_model,
    compute_truth,
    growth_slope,
    l1_error,
    run_experiment,
    simulate_data,
    summarize,
    time_sweep,
)
