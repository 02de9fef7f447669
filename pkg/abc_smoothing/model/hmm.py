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
This module defines the `HmmModel` interface, the static parameter container
`ThetaVector`, the simulated `Trajectory` and the `simulate` operation.

All model methods are vectorized: states are arrays whose last axis has length
`dim_x`, observations arrays whose last axis has length `dim_y`, and densities
broadcast over the leading axes.
"""

import copy
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from abc_smoothing.exceptions import (
    ABCSInvalidModelError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.model.model_kind import ModelKind
from abc_smoothing.utils import Stream, as_stream


class ThetaVector(Mapping[str, float]):
    """
    An immutable, ordered mapping from static parameter names to values.

    Every component is a variance, so every component must be strictly positive.
    """

    def __init__(self, values: Mapping[str, float]):
        self._values: Dict[str, float] = {}
        for name, value in values.items():
            value = float(value)
            if not np.isfinite(value) or value <= 0:
                raise ABCSInvalidModelError(
                    f"static parameter {name} must be a positive finite variance, got {value}"
                )
            self._values[name] = value

    def __getitem__(self, name: str) -> float:
        return self._values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        items = ", ".join(f"{k}={v!r}" for k, v in self._values.items())
        return f"ThetaVector({items})"

    def __eq__(self, oth: object) -> bool:
        if isinstance(oth, ThetaVector):
            return self._values == oth._values
        return False

    def __hash__(self) -> int:
        return hash(tuple(self._values.items()))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self._values)

    def as_array(self) -> np.ndarray:
        """Returns the components as a float array, in insertion order."""
        return np.array(list(self._values.values()), dtype=float)

    def replace(self, **updates: float) -> "ThetaVector":
        """Returns a new `ThetaVector` with the given components replaced."""
        for name in updates:
            if name not in self._values:
                raise ABCSValueError(f"unknown static parameter {name}")
        values = dict(self._values)
        values.update(updates)
        return ThetaVector(values)

    @staticmethod
    def from_array(names: Tuple[str, ...], values: np.ndarray) -> "ThetaVector":
        return ThetaVector(dict(zip(names, (float(v) for v in values))))


class HmmModel:
    """
    Represents a hidden Markov model: a Markov chain `X_n` on `R^dim_x` observed
    through conditionally independent `Y_n` on `R^dim_y`.

    Subclasses provide the initial law, the transition sampler and density, the
    observation sampler and, optionally, the observation density. Every sampler
    draws from the `numpy.random.Generator` it receives, so the same stream state
    gives the same draws.
    """

    def __init__(self, dim_x: int, dim_y: int, theta: ThetaVector):
        if dim_x < 1 or dim_y < 1:
            raise ABCSInvalidModelError(
                f"dimensions must be positive, got dim_x={dim_x}, dim_y={dim_y}"
            )
        self._dim_x = int(dim_x)
        self._dim_y = int(dim_y)
        self._theta = theta
        self._obs_density_available = True

    @property
    def name(self) -> str:
        raise NotImplementedError

    @property
    def dim_x(self) -> int:
        return self._dim_x

    @property
    def dim_y(self) -> int:
        return self._dim_y

    @property
    def theta(self) -> ThetaVector:
        return self._theta

    @property
    def has_obs_density(self) -> bool:
        """`True` if :func:`log_obs_density` can be evaluated for this model."""
        return self._obs_density_available

    @property
    def initial_point(self) -> Optional[np.ndarray]:
        """The deterministic initial state, or `None` if `X_0` has a density."""
        return None

    @property
    def kind(self) -> ModelKind:
        kind = ModelKind()
        kind.set_observation("OBS_SAMPLER")
        if self.has_obs_density:
            kind.set_observation("OBS_DENSITY")
        kind.set_dynamics(self._dynamics_feature())
        if self.initial_point is not None:
            kind.set_initial_law("POINT_INITIAL")
        else:
            kind.set_initial_law("DENSITY_INITIAL")
        return kind

    def _dynamics_feature(self) -> str:
        return "NONLINEAR"

    def with_theta(self, theta: ThetaVector) -> "HmmModel":
        """Returns the member of this model family with static parameters `theta`."""
        raise NotImplementedError

    def without_obs_density(self) -> "HmmModel":
        """
        Returns a copy of this model whose observation density is hidden, so that
        only its observation sampler can be used (the likelihood-free setting).
        """
        res = copy.copy(self)
        res._obs_density_available = False
        return res

    def sample_initial(
        self, n_particles: int, stream: np.random.Generator
    ) -> np.ndarray:
        """Draws `n_particles` initial states, shape `(n_particles, dim_x)`."""
        raise NotImplementedError

    def log_initial_density(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample_transition(
        self, x_prev: np.ndarray, n: int, stream: np.random.Generator
    ) -> np.ndarray:
        """Draws `X_n` given `X_{n-1} = x_prev` for every row of `x_prev`."""
        raise NotImplementedError

    def log_transition_density(
        self, x_prev: np.ndarray, x: np.ndarray, n: int
    ) -> np.ndarray:
        """Returns `log f(x_prev, x)` for the transition into time `n`, broadcasting."""
        raise NotImplementedError

    def transition_density(self, x_prev: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
        return np.exp(self.log_transition_density(x_prev, x, n))

    def sample_observation(
        self, x: np.ndarray, n: int, stream: np.random.Generator
    ) -> np.ndarray:
        """Draws `Y_n` given `X_n = x` for every row of `x`."""
        raise NotImplementedError

    def log_obs_density(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        """Returns `log g(x, y)`, broadcasting; raises if the density is hidden."""
        if not self.has_obs_density:
            raise ABCSUsageError(
                f"the observation density of model {self.name} is not available"
            )
        return self._log_obs_density(x, y, n)

    def _log_obs_density(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        raise NotImplementedError

    def obs_density(self, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
        return np.exp(self.log_obs_density(x, y, n))


@dataclass(frozen=True)
class Trajectory:
    """States `x_{0:n}` and observations `y_{0:n}` simulated from a model."""

    states: np.ndarray
    observations: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        if len(self.states) != len(self.observations):
            raise ABCSValueError(
                f"trajectory has {len(self.states)} states but {len(self.observations)} observations"
            )

    @property
    def horizon(self) -> int:
        return len(self.states) - 1


def simulate(model: HmmModel, horizon: int, stream: Stream) -> Trajectory:
    """
    Simulates `x_{0:n}` and `y_{0:n}` from `model`, with `n = horizon`.

    The same observation law applies at every time index, `n = 0` included.

    :param model: the model to simulate from.
    :param horizon: the final time index `n >= 0`.
    :param stream: a seed or a `numpy.random.Generator`.
    :return: the simulated `Trajectory`.
    """
    if horizon < 0:
        raise ABCSValueError(f"horizon must be non-negative, got {horizon}")
    seed = int(stream) if isinstance(stream, (int, np.integer)) else None
    rng = as_stream(stream)
    states = np.empty((horizon + 1, model.dim_x))
    observations = np.empty((horizon + 1, model.dim_y))
    x = model.sample_initial(1, rng)
    states[0] = x[0]
    observations[0] = model.sample_observation(x, 0, rng)[0]
    for n in range(1, horizon + 1):
        x = model.sample_transition(x, n, rng)
        states[n] = x[0]
        observations[n] = model.sample_observation(x, n, rng)[0]
    return Trajectory(states=states, observations=observations, seed=seed)
