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

import importlib
import sys
from typing import IO, Any, Dict, List, Optional, Tuple, Type

import abc_smoothing as abcs
from abc_smoothing.exceptions import (
    ABCSConfigError,
    ABCSNoSuitableEngineAvailableException,
)
from abc_smoothing.model.model_kind import ModelKind


DEFAULT_ENGINES = {
    "smc_exact": ("abc_smoothing.engines.particle_smoothers", "ExactSmcSmoother"),
    "smc_abc": ("abc_smoothing.engines.particle_smoothers", "AbcSmcSmoother"),
    "rsmc_abc": ("abc_smoothing.engines.particle_smoothers", "RsmcAbcSmoother"),
    "pmmh_exact": ("abc_smoothing.engines.pmmh_samplers", "ExactPmmhSampler"),
    "pmmh_abc": ("abc_smoothing.engines.pmmh_samplers", "AbcPmmhSampler"),
}

DEFAULT_ENGINES_PREFERENCE_LIST = [
    "smc_exact",
    "smc_abc",
    "rsmc_abc",
    "pmmh_exact",
    "pmmh_abc",
]


def format_table(header: List[str], rows: List[List[str]]) -> str:
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]

    def line(cells: List[str]) -> str:
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    header_line = line(header)
    rule = "-" * len(header_line)
    out = [rule, header_line, "=" * len(header_line)]
    for row in rows:
        out += [line(row), rule]
    return "\n".join(out)


class Factory:
    """
    Class that manages the :class:`Engines <abc_smoothing.engines.Engine>` classes
    and hands out `Smoother` and `Sampler` instances.
    """

    def __init__(self, env: "abcs.environment.Environment"):
        self._env = env
        self._engines: Dict[str, Type["abcs.engines.engine.Engine"]] = {}
        self._engines_info: List[Tuple[str, str, str]] = []
        for name, (module_name, class_name) in DEFAULT_ENGINES.items():
            self._add_engine(name, module_name, class_name)
        self._preference_list = [
            name for name in DEFAULT_ENGINES_PREFERENCE_LIST if name in self._engines
        ]

    # Engines registered from a file are re-imported by name in worker processes.
    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_engines"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._engines = {}
        engines_info = list(self._engines_info)
        self._engines_info = []
        for name, module_name, class_name in engines_info:
            self._add_engine(name, module_name, class_name)

    @property
    def engines(self) -> List[str]:
        """Returns the list of the available engine names."""
        return list(self._engines.keys())

    def engine(self, name: str) -> Type["abcs.engines.engine.Engine"]:
        """Returns the `Engine` class registered as `name`."""
        if name not in self._engines:
            raise ABCSNoSuitableEngineAvailableException(
                f"no engine named {name!r}; available: {self.engines}"
            )
        return self._engines[name]

    @property
    def preference_list(self) -> List[str]:
        return self._preference_list

    @preference_list.setter
    def preference_list(self, preference_list: List[str]):
        self._preference_list = preference_list

    @property
    def environment(self) -> "abcs.environment.Environment":
        return self._env

    def add_engine(self, name: str, module_name: str, class_name: str):
        """
        Adds an :class:`Engine <abc_smoothing.engines.Engine>` class to the factory,
        given its module and class names.
        """
        self._add_engine(name, module_name, class_name)
        if name not in self._preference_list:
            self._preference_list.append(name)

    def configure_from_file(self, config_filename: str):
        """
        Registers the engines declared in an experiment configuration file, as in

            engine.my_smoother.module_name = my_package.engines
            engine.my_smoother.class_name = MySmoother
            engine.preference_list = my_smoother smc_exact
        """
        from abc_smoothing.harness.config import ConfigReader

        entries = ConfigReader().parse_file(config_filename)
        declared: Dict[str, Dict[str, str]] = {}
        for key, value in entries.items():
            parts = key.split(".")
            if parts[0] != "engine" or len(parts) != 3:
                continue
            declared.setdefault(parts[1], {})[parts[2]] = str(value)
        for name, fields in declared.items():
            if "module_name" not in fields or "class_name" not in fields:
                raise ABCSConfigError(
                    f"engine {name!r} needs both module_name and class_name"
                )
            try:
                self.add_engine(name, fields["module_name"], fields["class_name"])
            except (ImportError, AttributeError) as e:
                raise ABCSConfigError(f"cannot load engine {name!r}: {e}") from e
        prefs = entries.get("engine.preference_list")
        if prefs is not None:
            names = prefs.split() if isinstance(prefs, str) else [str(p) for p in prefs]
            self.preference_list = [e for e in names if e in self._engines]

    def _add_engine(self, name: str, module_name: str, class_name: str):
        module = importlib.import_module(module_name)
        EngineImpl = getattr(module, class_name)
        self._engines[name] = EngineImpl
        self._engines_info.append((name, module_name, class_name))

    def _get_engine_class(
        self,
        engine_kind: str,
        name: Optional[str] = None,
        model_kind: ModelKind = ModelKind(),
    ) -> Type["abcs.engines.engine.Engine"]:
        if name is not None:
            EngineClass = self.engine(name)
            if not getattr(EngineClass, "is_" + engine_kind)():
                raise ABCSNoSuitableEngineAvailableException(
                    f"engine {name!r} is not a {engine_kind}"
                )
            return EngineClass
        model_features = sorted(model_kind.features)
        rows = []
        for name in self._preference_list:
            EngineClass = self._engines[name]
            if getattr(EngineClass, "is_" + engine_kind)():
                if EngineClass.supports(model_kind):
                    return EngineClass
                rows.append(
                    [name]
                    + [str(EngineClass.supports(ModelKind([f]))) for f in model_features]
                )
        if len(rows) > 0:
            header = ["Engine"] + model_features
            msg = f"No available engine supports all the model features:\n{format_table(header, rows)}"
        else:
            msg = f"No available {engine_kind} engine"
        raise ABCSNoSuitableEngineAvailableException(msg)

    def _get_engine(
        self,
        engine_kind: str,
        name: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
        model_kind: ModelKind = ModelKind(),
    ) -> "abcs.engines.engine.Engine":
        EngineClass = self._get_engine_class(engine_kind, name, model_kind)
        res = EngineClass(**(params or {}))
        if name is not None:
            res.error_on_failed_checks = False
        return res

    def Smoother(
        self,
        *,
        name: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
        model_kind: ModelKind = ModelKind(),
    ) -> "abcs.engines.engine.Engine":
        """
        Returns a smoothing engine. There are two ways to call this method:
        - using `model_kind`: the first engine of the preference list supporting it,
          e.g. Smoother(model_kind=model.kind)
        - using `name` and eventually some engine dependent `params`,
          e.g. Smoother(name='smc_abc', params={'epsilon': 0.5})
        """
        return self._get_engine("smoother", name, params, model_kind)

    def Sampler(
        self,
        *,
        name: Optional[str] = None,
        params: Optional[Dict[str, Any]] = None,
        model_kind: ModelKind = ModelKind(),
    ) -> "abcs.engines.engine.Engine":
        """Returns a PMMH engine, chosen as in :func:`Smoother`."""
        return self._get_engine("sampler", name, params, model_kind)

    def print_engines_info(self, stream: IO[str] = sys.stdout):
        stream.write("These are the engines currently available:\n")
        for name, EngineClass in self._engines.items():
            modes = [om for om in ("smoother", "sampler") if getattr(EngineClass, "is_" + om)()]
            stream.write(f"{name}: {', '.join(modes)}\n{EngineClass.supported_kind()}\n\n")
