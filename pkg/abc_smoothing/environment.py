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
This module defines the `Environment` class.
The `Environment` holds the objects shared throughout the library: the engine
:func:`Factory <abc_smoothing.Environment.factory>` and the runtime settings
(worker count for replicated experiments).
"""

import os
from typing import Optional
import abc_smoothing
from abc_smoothing.exceptions import ABCSConfigError


WORKERS_ENV_VAR = "ABC_SMOOTHING_WORKERS"


class Environment:
    """
    Represents the environment in the `abc_smoothing` library.

    The `Environment` owns the engine `Factory` and the worker limit used by the
    harness when it runs the cells of an experiment concurrently.
    """

    def __init__(self):
        import abc_smoothing.engines

        self._factory = abc_smoothing.engines.Factory(self)
        self._workers = _workers_from_env()

    @property
    def factory(self) -> "abc_smoothing.engines.Factory":
        """Returns the environment's `Factory`."""
        return self._factory

    @property
    def workers(self) -> int:
        """
        Returns the maximum number of concurrent experiment cells.

        Defaults to 1; overridden by the `ABC_SMOOTHING_WORKERS` environment variable.
        """
        return self._workers

    @workers.setter
    def workers(self, new_value: int):
        if new_value < 1:
            raise ABCSConfigError(f"workers must be >= 1, got {new_value}")
        self._workers = new_value


def _workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ABCSConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}")
    if value < 1:
        raise ABCSConfigError(f"{WORKERS_ENV_VAR} must be >= 1, got {value}")
    return value


GLOBAL_ENVIRONMENT: Optional[Environment] = None


def get_env(env: Optional[Environment] = None) -> Environment:
    """
    Returns the given env if it is not `None`, returns the `GLOBAL_ENVIRONMENT` otherwise.

    :param env: The environment to return.
    :return: The given `environment` if it is not `None`, the `GLOBAL_ENVIRONMENT` otherwise.
    """
    global GLOBAL_ENVIRONMENT
    if env is None:
        if GLOBAL_ENVIRONMENT is None:
            GLOBAL_ENVIRONMENT = Environment()
        return GLOBAL_ENVIRONMENT
    else:
        return env
