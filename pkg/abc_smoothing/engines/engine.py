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
The `Engine` base class.

An engine is a smoothing or PMMH method packaged behind a uniform interface: the
`Factory` instantiates it by name or by the `ModelKind` it supports, and the
`SmootherMixin` / `SamplerMixin` give it its `smooth` or `sample` operation.
"""

from abc_smoothing.model.model_kind import ModelKind


OPERATION_MODES = ["smoother", "sampler"]


def _mode_flag(value: bool):
    return staticmethod(lambda: value)


class EngineMeta(type):
    """Sets `is_smoother()` and `is_sampler()` from the mixins an engine class inherits."""

    def __new__(cls, name, bases, dct):
        obj = type.__new__(cls, name, bases, dct)
        for mode in OPERATION_MODES:
            flag = "is_" + mode
            inherited = any(getattr(base, flag, lambda: False)() for base in bases)
            if inherited:
                setattr(obj, flag, _mode_flag(True))
            elif not hasattr(obj, flag):
                setattr(obj, flag, _mode_flag(False))
        return obj


class Engine(metaclass=EngineMeta):
    """
    Base of every engine.

    Subclasses give a `name`, the `ModelKind` they run on and their operation,
    through one of the mixins in `abc_smoothing.engines.mixins`.
    """

    def __init__(self, **kwargs):
        self._skip_checks = False
        self._error_on_failed_checks = True

    @property
    def name(self) -> str:
        """The name the engine is registered under in the `Factory`."""
        raise NotImplementedError

    @property
    def skip_checks(self) -> bool:
        """
        When `True` the engine runs without comparing the model's
        :func:`kind <abc_smoothing.model.HmmModel.kind>` to `supported_kind()`.
        Defaults to `False`.
        """
        return self._skip_checks

    @skip_checks.setter
    def skip_checks(self, new_value: bool):
        self._skip_checks = new_value

    @property
    def error_on_failed_checks(self) -> bool:
        """
        Whether an unsupported model raises (`True`, the default) or only warns.
        The `Factory` turns it off for engines requested by name.
        """
        return self._error_on_failed_checks

    @error_on_failed_checks.setter
    def error_on_failed_checks(self, new_value: bool):
        self._error_on_failed_checks = new_value

    @staticmethod
    def supported_kind() -> ModelKind:
        """The union of the model features this engine can handle."""
        raise NotImplementedError

    @staticmethod
    def supports(model_kind: ModelKind) -> bool:
        """`True` if the engine can run on models of kind `model_kind`."""
        raise NotImplementedError

    def destroy(self):
        """Releases the engine; engines here hold no external resources."""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.destroy()
