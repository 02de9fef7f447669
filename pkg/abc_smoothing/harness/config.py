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
Experiment configuration files.

A configuration is a flat list of `key = value` lines with dotted keys::

    # one-dimensional benchmark
    model.id = benchmark
    model.theta.sigma_x2 = 10
    smc.n_grid = 100 200 300
    experiment.method = smc_exact smc_abc

A value made of several whitespace separated tokens is a list; numbers become
`int` or `float`, `true`/`false` become booleans and `null` becomes `None`.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import pyparsing

assert (
    pyparsing.__version__ >= "3.0.0"
), f"abc_smoothing needs a pyparsing version >= 3. Current version detected: {pyparsing.__version__}, please update it."
from pyparsing import Combine, Group, OneOrMore, Regex, Suppress, Word, ZeroOrMore
from pyparsing import alphanums, alphas, printables, python_style_comment
from pyparsing.results import ParseResults

from abc_smoothing.exceptions import ABCSConfigError
from abc_smoothing.model.functional import FUNCTIONALS


ConfigValue = Union[int, float, bool, str, None, List[Any]]

SMOOTHING_METHODS = ("smc_exact", "smc_abc", "rsmc_abc")
PMMH_METHODS = ("pmmh_exact", "pmmh_abc")
ABC_METHODS = ("smc_abc", "rsmc_abc", "pmmh_abc")
MODELS = ("benchmark", "linear_gaussian")
TRUTH_SOURCES = ("kalman", "grid", "reference_run")


def _number(tokens: ParseResults) -> Union[int, float]:
    text = tokens[0]
    if any(c in text for c in ".eE"):
        return float(text)
    return int(text)


class ConfigGrammar:
    def __init__(self):
        ident = Word(alphas + "_", alphanums + "_")
        key = Combine(ident + ZeroOrMore("." + ident))
        number = Regex(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![^\s#])")
        number.set_parse_action(_number)
        word = Word(printables, exclude_chars="=#")
        # a value token never starts the next assignment
        value = ~(key + "=") + (number | word)
        assignment = Group(key + Suppress("=") + Group(OneOrMore(value)))
        config = ZeroOrMore(assignment)
        config.ignore(python_style_comment)
        self._config = config

    @property
    def config(self):
        return self._config


def _word(token: Any) -> ConfigValue:
    if not isinstance(token, str):
        return token
    lowered = token.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("null", "none"):
        return None
    return token


class ConfigReader:
    """Parse an experiment configuration file or string into a `dict` of dotted keys."""

    def __init__(self):
        self._grammar = ConfigGrammar()

    def parse_file(self, filename: str) -> Dict[str, ConfigValue]:
        try:
            res = self._grammar.config.parse_file(filename, parse_all=True)
        except OSError as e:
            raise ABCSConfigError(f"cannot read configuration file {filename}: {e}") from e
        except pyparsing.ParseBaseException as e:
            raise ABCSConfigError(
                f"{filename}:{e.lineno}:{e.col}: malformed configuration line {e.line!r}"
            ) from e
        return self._entries(res)

    def parse_string(self, text: str) -> Dict[str, ConfigValue]:
        try:
            res = self._grammar.config.parse_string(text, parse_all=True)
        except pyparsing.ParseBaseException as e:
            raise ABCSConfigError(
                f"line {e.lineno}:{e.col}: malformed configuration line {e.line!r}"
            ) from e
        return self._entries(res)

    def _entries(self, res: ParseResults) -> Dict[str, ConfigValue]:
        entries: Dict[str, ConfigValue] = {}
        for assignment in res:
            key = assignment[0]
            values = [_word(v) for v in assignment[1]]
            if key in entries:
                raise ABCSConfigError(f"key {key!r} is set twice")
            entries[key] = values[0] if len(values) == 1 else values
        return entries


PRESETS: Dict[str, str] = {
    "desk": """
        experiment.method = smc_exact smc_abc
        experiment.replicates = 20
        experiment.seed = 2012
        experiment.walltime = false
        model.id = benchmark
        model.dim = 1
        model.horizon = 100
        functional.id = mean_state
        smc.n_grid = 100 200 300 400 500 600 700 800 900 1000
        abc.epsilon_grid = 8 4 2 1 0.5 0.25 0.125 0.0625
        truth.source = reference_run
        truth.reference_n = 1000
        truth.reference_replicates = 20
        pmmh.iterations = 5000
        pmmh.burn_in = 1000
    """,
    "full_smoothing": """
        experiment.replicates = 50
        truth.reference_n = 5000
        truth.reference_replicates = 50
    """,
    "full_pmmh": """
        experiment.method = pmmh_exact pmmh_abc
        experiment.replicates = 50
        smc.n_grid = 100 200 300 400 500
        pmmh.iterations = 50000
        pmmh.burn_in = 10000
        truth.reference_n = 20000
        truth.reference_replicates = 50
    """,
    "full_pmmh_matched_cost": """
        experiment.method = pmmh_exact pmmh_abc
        experiment.replicates = 50
        smc.n_grid = 100 200 300 400 500
        pmmh.iterations = 50000
        pmmh.burn_in = 10000
        pmmh.forward_smoothing = false
        pmmh.path_n_grid = 4427 17139 39020 68258 107007
        truth.reference_n = 20000
        truth.reference_replicates = 50
    """,
}


def preset_entries(name: str) -> Dict[str, ConfigValue]:
    """Returns the entries of a preset; every preset other than `desk` extends `desk`."""
    if name not in PRESETS:
        raise ABCSConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    reader = ConfigReader()
    entries = reader.parse_string(PRESETS["desk"])
    if name != "desk":
        entries.update(reader.parse_string(PRESETS[name]))
    return entries


def _fail(key: str, value: Any, expected: str) -> ABCSConfigError:
    return ABCSConfigError(f"{key} must be {expected}, got {value!r}")


def _as_int(key: str, value: ConfigValue) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(key, value, "an integer")
    return value


def _as_float(key: str, value: ConfigValue) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(key, value, "a number")
    return float(value)


def _as_optional_float(key: str, value: ConfigValue) -> Optional[float]:
    return None if value is None else _as_float(key, value)


def _as_optional_int(key: str, value: ConfigValue) -> Optional[int]:
    return None if value is None else _as_int(key, value)


def _as_bool(key: str, value: ConfigValue) -> bool:
    if not isinstance(value, bool):
        raise _fail(key, value, "true or false")
    return value


def _as_str(key: str, value: ConfigValue) -> str:
    if not isinstance(value, str):
        raise _fail(key, value, "a word")
    return value


def _listed(value: ConfigValue) -> List[Any]:
    return list(value) if isinstance(value, list) else [value]


def _as_ints(key: str, value: ConfigValue) -> Tuple[int, ...]:
    return tuple(_as_int(key, v) for v in _listed(value))


def _as_floats(key: str, value: ConfigValue) -> Tuple[float, ...]:
    return tuple(_as_float(key, v) for v in _listed(value))


def _as_strs(key: str, value: ConfigValue) -> Tuple[str, ...]:
    return tuple(_as_str(key, v) for v in _listed(value))


FIELDS: Dict[str, Tuple[str, Callable[[str, ConfigValue], Any]]] = {
    "experiment.method": ("methods", _as_strs),
    "experiment.replicates": ("replicates", _as_int),
    "experiment.seed": ("seed", _as_int),
    "experiment.data_seed": ("data_seed", _as_optional_int),
    "experiment.out": ("out", _as_str),
    "experiment.figures": ("figures", _as_bool),
    "experiment.walltime": ("walltime", _as_bool),
    "model.id": ("model_id", _as_str),
    "model.dim": ("dim", _as_int),
    "model.horizon": ("horizon", _as_int),
    "model.a": ("lg_a", _as_float),
    "model.c": ("lg_c", _as_float),
    "model.initial_mean": ("initial_mean", _as_float),
    "model.initial_var": ("initial_var", _as_float),
    "functional.id": ("functional_id", _as_str),
    "smc.n_grid": ("n_grid", _as_ints),
    "smc.resampling": ("resampling", _as_str),
    "smc.threshold": ("threshold", _as_float),
    "abc.epsilon": ("epsilon", _as_optional_float),
    "abc.epsilon_grid": ("epsilon_grid", _as_floats),
    "abc.kernel": ("kernel", _as_str),
    "abc.calibration_trials": ("calibration_trials", _as_int),
    "truth.source": ("truth", _as_str),
    "truth.reference_n": ("reference_n", _as_int),
    "truth.reference_replicates": ("reference_replicates", _as_int),
    "pmmh.iterations": ("pmmh_iterations", _as_int),
    "pmmh.burn_in": ("pmmh_burn_in", _as_int),
    "pmmh.proposal_scale": ("proposal_scale", _as_float),
    "pmmh.prior_shape": ("prior_shape", _as_float),
    "pmmh.prior_scale": ("prior_scale", _as_float),
    "pmmh.forward_smoothing": ("pmmh_forward_smoothing", _as_bool),
    "pmmh.path_n_grid": ("path_n_grid", _as_ints),
}

THETA_PREFIXES = {"model.theta.": "theta", "pmmh.theta0.": "theta0"}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A replicated experiment: one model, one dataset, one functional, and one or
    more methods run over the grid of particle numbers.

    `epsilon = None` means the ABC tolerance is calibrated on `epsilon_grid`.
    `path_n_grid`, when set, gives the particle number used at each entry of
    `n_grid` by the PMMH chains that only track the selected path.
    """

    methods: Tuple[str, ...] = ("smc_exact",)
    replicates: int = 20
    seed: int = 0
    data_seed: Optional[int] = None
    out: str = "results"
    figures: bool = True
    walltime: bool = True
    model_id: str = "benchmark"
    dim: int = 1
    horizon: int = 100
    theta: Dict[str, float] = field(default_factory=dict)
    lg_a: float = 0.9
    lg_c: float = 1.0
    initial_mean: float = 0.0
    initial_var: float = 1.0
    functional_id: str = "mean_state"
    n_grid: Tuple[int, ...] = (100,)
    resampling: str = "ess_threshold"
    threshold: float = 0.5
    epsilon: Optional[float] = None
    epsilon_grid: Tuple[float, ...] = (8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625)
    kernel: str = "indicator_l1"
    calibration_trials: int = 3
    truth: str = "reference_run"
    reference_n: int = 1000
    reference_replicates: int = 20
    pmmh_iterations: int = 5000
    pmmh_burn_in: int = 1000
    proposal_scale: float = 0.2
    prior_shape: float = 2.0
    prior_scale: float = 2.0
    pmmh_forward_smoothing: bool = True
    path_n_grid: Tuple[int, ...] = ()
    theta0: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.methods) == 0:
            raise ABCSConfigError("experiment.method needs at least one method")
        for method in self.methods:
            if method not in SMOOTHING_METHODS + PMMH_METHODS:
                raise ABCSConfigError(
                    f"unknown method {method!r}; known: {SMOOTHING_METHODS + PMMH_METHODS}"
                )
        if self.replicates < 1:
            raise ABCSConfigError(f"experiment.replicates must be >= 1, got {self.replicates}")
        if len(self.n_grid) == 0 or min(self.n_grid) < 1:
            raise ABCSConfigError(f"smc.n_grid must list positive particle numbers, got {self.n_grid}")
        if self.model_id not in MODELS:
            raise ABCSConfigError(f"unknown model {self.model_id!r}; known: {MODELS}")
        if self.dim < 1 or self.horizon < 0:
            raise ABCSConfigError(
                f"model.dim must be >= 1 and model.horizon >= 0, got {self.dim} and {self.horizon}"
            )
        if self.functional_id not in FUNCTIONALS:
            raise ABCSConfigError(
                f"unknown functional {self.functional_id!r}; known: {sorted(FUNCTIONALS)}"
            )
        if self.epsilon is None and len(self.epsilon_grid) == 0 and self.uses_abc:
            raise ABCSConfigError("ABC methods need abc.epsilon or abc.epsilon_grid")
        if "rsmc_abc" in self.methods and self.kernel != "indicator_l1":
            raise ABCSConfigError("rsmc_abc needs the indicator_l1 kernel")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ABCSConfigError(f"abc.epsilon must be positive, got {self.epsilon}")
        if self.path_n_grid and len(self.path_n_grid) != len(self.n_grid):
            raise ABCSConfigError("pmmh.path_n_grid must have one entry per smc.n_grid entry")
        if self.uses_pmmh and not 0 <= self.pmmh_burn_in < self.pmmh_iterations:
            raise ABCSConfigError(
                f"pmmh.burn_in must lie in [0, {self.pmmh_iterations}), got {self.pmmh_burn_in}"
            )
        self._check_truth()

    def _check_truth(self):
        if self.truth not in TRUTH_SOURCES:
            raise ABCSConfigError(f"unknown truth source {self.truth!r}; known: {TRUTH_SOURCES}")
        if self.truth == "reference_run":
            if self.reference_n < 1 or self.reference_replicates < 1:
                raise ABCSConfigError("truth.reference_n and truth.reference_replicates must be >= 1")
            return
        if self.uses_pmmh:
            raise ABCSConfigError(
                f"the {self.truth} truth conditions on theta; PMMH experiments need reference_run"
            )
        if self.truth == "kalman" and self.model_id != "linear_gaussian":
            raise ABCSConfigError(f"the kalman truth is not available for model {self.model_id!r}")
        if self.truth == "grid" and (self.dim != 1 or self.horizon > 4):
            raise ABCSConfigError("the grid truth needs model.dim = 1 and model.horizon <= 4")

    @property
    def uses_abc(self) -> bool:
        return any(m in ABC_METHODS for m in self.methods)

    @property
    def uses_pmmh(self) -> bool:
        return any(m in PMMH_METHODS for m in self.methods)

    @staticmethod
    def from_entries(entries: Mapping[str, ConfigValue]) -> "ExperimentConfig":
        """Builds the configuration from parsed entries; `engine.*` keys are left to the `Factory`."""
        kwargs: Dict[str, Any] = {}
        for key, value in entries.items():
            if key.startswith("engine."):
                continue
            prefix = next((p for p in THETA_PREFIXES if key.startswith(p)), None)
            if prefix is not None:
                name = key[len(prefix):]
                kwargs.setdefault(THETA_PREFIXES[prefix], {})[name] = _as_float(key, value)
                continue
            if key not in FIELDS:
                raise ABCSConfigError(f"unknown configuration key {key!r}")
            attr, convert = FIELDS[key]
            kwargs[attr] = convert(key, value)
        return ExperimentConfig(**kwargs)

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def load_config(
    filename: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, ConfigValue]] = None,
) -> ExperimentConfig:
    """
    Returns the configuration built from a preset, then the file, then `overrides`,
    each layer overriding the previous ones.
    """
    entries: Dict[str, ConfigValue] = {}
    if preset is not None:
        entries.update(preset_entries(preset))
    if filename is not None:
        entries.update(ConfigReader().parse_file(filename))
    if overrides is not None:
        entries.update(overrides)
    return ExperimentConfig.from_entries(entries)
