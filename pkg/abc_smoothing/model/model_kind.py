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
"""Model features, used by the `Factory` to match engines with models."""

from typing import Iterable, List, Set


FEATURES = {
    "OBSERVATION": ["OBS_DENSITY", "OBS_SAMPLER"],
    "DYNAMICS": ["LINEAR_GAUSSIAN", "NONLINEAR"],
    "INITIAL_LAW": ["POINT_INITIAL", "DENSITY_INITIAL"],
}


def _setter(group: List[str]):
    def set_feature(self, feature: str):
        if feature not in group:
            raise ValueError(f"{feature} is not one of {group}")
        self._features.add(feature)

    return set_feature


def _unsetter(group: List[str]):
    def unset_feature(self, feature: str):
        if feature not in group:
            raise ValueError(f"{feature} is not one of {group}")
        self._features.discard(feature)

    return unset_feature


def _tester(group: List[str]):
    def has_feature(self) -> bool:
        return not self._features.isdisjoint(group)

    return has_feature


class ModelKindMeta(type):
    """Adds `set_<group>`, `unset_<group>`, `has_<group>` and `has_<feature>` to `ModelKind`."""

    def __new__(cls, name, bases, dct):
        kind_cls = type.__new__(cls, name, bases, dct)
        for group_name, group in FEATURES.items():
            suffix = group_name.lower()
            setattr(kind_cls, f"set_{suffix}", _setter(group))
            setattr(kind_cls, f"unset_{suffix}", _unsetter(group))
            setattr(kind_cls, f"has_{suffix}", _tester(group))
            for feature in group:
                setattr(kind_cls, f"has_{feature.lower()}", _tester([feature]))
        return kind_cls


class ModelKind(metaclass=ModelKindMeta):
    """
    The features of an :class:`~abc_smoothing.model.HmmModel` that decide which
    :class:`~abc_smoothing.engines.Engine` can run on it: whether the observation
    density can be evaluated, whether the dynamics are linear-Gaussian, and whether
    the initial law is a point mass.

    A model reports its features through its :func:`kind <abc_smoothing.model.HmmModel.kind>` property.
    """

    def __init__(self, features: Iterable[str] = ()):
        self._features: Set[str] = set(features)

    def __repr__(self) -> str:
        listed = ", ".join(repr(f) for f in sorted(self._features))
        return f"ModelKind([{listed}])"

    def __str__(self) -> str:
        lines = []
        for group_name, group in FEATURES.items():
            present = [f for f in group if f in self._features]
            if present:
                lines.append(f"{group_name}: {present}")
        return "\n".join(lines)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ModelKind) and self._features == other._features

    def __hash__(self) -> int:
        return hash(frozenset(self._features))

    def __le__(self, other: "ModelKind") -> bool:
        return self._features <= other._features

    @property
    def features(self) -> Set[str]:
        return self._features

    def union(self, other: "ModelKind") -> "ModelKind":
        """A new kind with the features of both."""
        return ModelKind(self._features | other._features)


simulator_only_kind = ModelKind(
    ["OBS_SAMPLER", "NONLINEAR", "LINEAR_GAUSSIAN", "POINT_INITIAL", "DENSITY_INITIAL"]
)

density_kind = simulator_only_kind.union(ModelKind(["OBS_DENSITY"]))
