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
"""Provides the most used functions in a nicely wrapped API.
This module uses the global environment, so that engines can be obtained
without the need to specify an environment.
"""

from typing import Any, Dict, Optional

from abc_smoothing.engines import Engine
from abc_smoothing.environment import get_env
from abc_smoothing.model import *
from abc_smoothing.model.model_kind import ModelKind


def Smoother(
    *,
    name: Optional[str] = None,
    params: Optional[Dict[str, Any]] = None,
    model_kind: ModelKind = ModelKind(),
) -> Engine:
    """
    Returns a smoothing engine. There are two ways to call this method:
    - using 'name' (the name of a specific engine) and 'params' (engine dependent options).
      e.g. Smoother(name='smc_abc', params={'epsilon': 0.5})
    - using 'model_kind'.
      e.g. Smoother(model_kind=model.kind)
    """
    return get_env().factory.Smoother(name=name, params=params, model_kind=model_kind)


def Sampler(
    *,
    name: Optional[str] = None,
    params: Optional[Dict[str, Any]] = None,
    model_kind: ModelKind = ModelKind(),
) -> Engine:
    """
    Returns a PMMH engine, by 'name' and 'params' or by 'model_kind'.
      e.g. Sampler(name='pmmh_exact', params={'proposal_scale': 0.1})
    """
    return get_env().factory.Sampler(name=name, params=params, model_kind=model_kind)
