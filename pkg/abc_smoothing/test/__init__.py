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

import os
import unittest
from functools import wraps
from importlib.util import find_spec

from abc_smoothing.environment import get_env


LONG_TESTS_ENV_VAR = "ABC_SMOOTHING_LONG_TESTS"


class _SkipDecorator:
    """Base of the decorators below; `skipped()` is evaluated when the test is decorated."""

    def skipped(self) -> bool:
        raise NotImplementedError

    def reason(self) -> str:
        raise NotImplementedError

    def __call__(self, test_fun):
        @unittest.skipIf(self.skipped(), self.reason())
        @wraps(test_fun)
        def wrapper(*args, **kwargs):
            return test_fun(*args, **kwargs)

        return wrapper


class skipIfEngineNotAvailable(_SkipDecorator):
    """Skips a test when the global factory has no engine with the given name."""

    def __init__(self, engine: str):
        self.engine = engine

    def skipped(self) -> bool:
        return self.engine not in get_env().factory.engines

    def reason(self) -> str:
        return f"engine {self.engine} is not registered"


class skipIfModuleNotInstalled(_SkipDecorator):
    """Skips a test that needs an optional package, e.g. matplotlib."""

    def __init__(self, module_name: str):
        self.module_name = module_name

    def skipped(self) -> bool:
        try:
            return find_spec(self.module_name) is None
        except ModuleNotFoundError:
            return True

    def reason(self) -> str:
        return f"{self.module_name} is not installed"


class skipIfNotLongRun(_SkipDecorator):
    """Skips a replicated Monte Carlo test unless ABC_SMOOTHING_LONG_TESTS=1."""

    def skipped(self) -> bool:
        return os.environ.get(LONG_TESTS_ENV_VAR, "") != "1"

    def reason(self) -> str:
        return f"long Monte Carlo test, set {LONG_TESTS_ENV_VAR}=1 to run it"


TestCase = unittest.TestCase
main = unittest.main
