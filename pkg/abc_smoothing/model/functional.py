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
This module defines additive functionals `V_n(x_{0:n}) = sum_p v_p(x_{p-1:p})`
and the builders of the functionals used by the experiments.

A term is either unary, `v_p(x_p)`, or pairwise, `v_p(x_{p-1}, x_p)`; at `p = 0`
a pairwise term receives `x_0` as both arguments. Terms are vector valued, with
`output_dim` components, and broadcast over the leading axes of their inputs.
"""

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from abc_smoothing.exceptions import ABCSConfigError, ABCSValueError


class FunctionalKind(Enum):
    """
    Enum telling the exact oracles how a functional depends on the states:
    LINEAR       -> v_p(x) = coefficients[p] * x
    LAG_PRODUCT  -> v_p(x_{p-1}, x_p) = coefficients[p] * x_{p-1} * x_p (componentwise)
    CONSTANT     -> v_p = coefficients[p]
    CUSTOM       -> anything else, only Monte Carlo and grid estimates apply
    """

    LINEAR = auto()
    LAG_PRODUCT = auto()
    CONSTANT = auto()
    CUSTOM = auto()


@dataclass(frozen=True)
class FunctionalTerm:
    """One term `v_p` of an additive functional."""

    fn: Callable[..., np.ndarray]
    pairwise: bool = False

    def __call__(self, x_prev: np.ndarray, x: np.ndarray) -> np.ndarray:
        if self.pairwise:
            return self.fn(x_prev, x)
        return self.fn(x)


@dataclass(frozen=True)
class AdditiveFunctional:
    """The additive functional `V_n = v_0 + ... + v_n` over a fixed horizon `n`."""

    terms: Tuple[FunctionalTerm, ...]
    output_dim: int
    name: str = "custom"
    kind: FunctionalKind = FunctionalKind.CUSTOM
    coefficients: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ABCSValueError("an additive functional needs at least one term")

    @property
    def horizon(self) -> int:
        return len(self.terms) - 1

    def term(self, p: int) -> FunctionalTerm:
        return self.terms[p]

    def initial_values(self, x0: np.ndarray) -> np.ndarray:
        """Returns `v_0(x_0)` for every row of `x0`, shape `(N, output_dim)`."""
        x0 = np.asarray(x0, dtype=float)
        values = self.terms[0](x0, x0)
        return np.broadcast_to(values, x0.shape[:-1] + (self.output_dim,)).astype(float)

    def increment(self, p: int, x_prev: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Returns `v_p(x_prev, x)`, broadcasting over leading axes."""
        return np.asarray(self.terms[p](x_prev, x), dtype=float)

    def evaluate_path(self, path: np.ndarray) -> np.ndarray:
        """Returns `V_n(x_{0:n})` for one path of shape `(n+1, dim_x)`."""
        return self.evaluate_paths(np.asarray(path)[None, ...])[0]

    def evaluate_paths(self, paths: np.ndarray) -> np.ndarray:
        """Returns `V_n` for every path of a `(N, n+1, dim_x)` array, shape `(N, output_dim)`."""
        paths = np.asarray(paths, dtype=float)
        if paths.shape[1] != len(self.terms):
            raise ABCSValueError(
                f"paths have {paths.shape[1]} time points, functional has {len(self.terms)} terms"
            )
        total = self.initial_values(paths[:, 0, :]).copy()
        for p in range(1, len(self.terms)):
            inc = self.increment(p, paths[:, p - 1, :], paths[:, p, :])
            total += np.broadcast_to(inc, total.shape)
        return total

    def clipped(self, bound: float) -> "AdditiveFunctional":
        """Returns the functional whose terms are clipped to `[-bound, bound]`."""

        def _clip(term: FunctionalTerm) -> FunctionalTerm:
            return FunctionalTerm(
                lambda x_prev, x: np.clip(term(x_prev, x), -bound, bound), pairwise=True
            )

        return AdditiveFunctional(
            terms=tuple(_clip(t) for t in self.terms),
            output_dim=self.output_dim,
            name=f"{self.name}_clipped",
        )


def mean_state(horizon: int, dim: int, normalized: bool = True) -> AdditiveFunctional:
    """
    The mean state functional `v_p(x_p) = x_p / (n+1)` (or `v_p(x_p) = x_p` when
    `normalized` is `False`), for `p = 0, ..., n`.
    """
    scale = 1.0 / (horizon + 1) if normalized else 1.0
    term = FunctionalTerm(lambda x: scale * x)
    return AdditiveFunctional(
        terms=(term,) * (horizon + 1),
        output_dim=dim,
        name="mean_state" if normalized else "sum_state",
        kind=FunctionalKind.LINEAR,
        coefficients=np.full(horizon + 1, scale),
    )


def lag_autocovariance(horizon: int, dim: int) -> AdditiveFunctional:
    """
    The first-order auto-covariance functional `v_p(x_{p-1:p}) = x_{p-1} x_p / (n+1)`
    for `p >= 1`, componentwise, with `v_0 = 0`.
    """
    scale = 1.0 / (horizon + 1)
    zero = FunctionalTerm(lambda x: np.zeros_like(x))
    lag = FunctionalTerm(lambda x_prev, x: scale * x_prev * x, pairwise=True)
    coefficients = np.full(horizon + 1, scale)
    coefficients[0] = 0.0
    return AdditiveFunctional(
        terms=(zero,) + (lag,) * horizon,
        output_dim=dim,
        name="lag_autocovariance",
        kind=FunctionalKind.LAG_PRODUCT,
        coefficients=coefficients,
    )


def constant(horizon: int, value: float = 1.0) -> AdditiveFunctional:
    """The constant functional `v_p = value`; its smoothed expectation is `(n+1) value`."""
    term = FunctionalTerm(lambda x: np.full(np.shape(x)[:-1] + (1,), value))
    return AdditiveFunctional(
        terms=(term,) * (horizon + 1),
        output_dim=1,
        name="constant",
        kind=FunctionalKind.CONSTANT,
        coefficients=np.full(horizon + 1, float(value)),
    )


def from_terms(
    terms: Sequence[Callable[..., np.ndarray]],
    pairwise: Sequence[bool],
    output_dim: int,
    name: str = "custom",
) -> AdditiveFunctional:
    """Builds a functional from user callables and their arity flags."""
    if len(terms) != len(pairwise):
        raise ABCSValueError("one arity flag is needed per term")
    return AdditiveFunctional(
        terms=tuple(FunctionalTerm(t, p) for t, p in zip(terms, pairwise)),
        output_dim=output_dim,
        name=name,
    )


FUNCTIONALS: Dict[str, Callable[[int, int], AdditiveFunctional]] = {
    "mean_state": lambda horizon, dim: mean_state(horizon, dim),
    "sum_state": lambda horizon, dim: mean_state(horizon, dim, normalized=False),
    "lag_autocovariance": lag_autocovariance,
    "constant": lambda horizon, dim: constant(horizon),
}


def build_functional(functional_id: str, horizon: int, dim: int) -> AdditiveFunctional:
    """Returns the named functional for the given horizon and state dimension."""
    builder = FUNCTIONALS.get(functional_id)
    if builder is None:
        raise ABCSConfigError(
            f"unknown functional {functional_id!r}; known: {sorted(FUNCTIONALS)}"
        )
    return builder(horizon, dim)
