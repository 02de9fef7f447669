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
"""
Smoothing and static-parameter estimation for hidden Markov models with
possibly intractable observation densities, through the ABC auxiliary model,
forward-only SMC smoothing and particle marginal Metropolis-Hastings.
"""

from typing import Tuple, Union

from abc_smoothing.environment import Environment, get_env


VERSION: Tuple[Union[int, str], ...] = (0, 1, 0)
__version__ = ".".join(str(x) for x in VERSION)
