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
Log-space weight reductions, the effective sample size and multinomial
resampling. Reductions sort their input first so that their result does not
depend on the particle order.
"""

from typing import Optional

import numpy as np
from scipy.special import logsumexp

from abc_smoothing.exceptions import ABCSDegenerateWeightsError


def log_sum(log_values: np.ndarray) -> float:
    """Returns `log(sum(exp(log_values)))`, `-inf` for an all `-inf` input."""
    log_values = np.asarray(log_values, dtype=float)
    if not np.any(np.isfinite(log_values)):
        return -np.inf
    return float(logsumexp(np.sort(log_values)))


def log_mean(log_values: np.ndarray) -> float:
    return log_sum(log_values) - np.log(len(log_values))


def check_degenerate(log_weights: np.ndarray, time_index: Optional[int]):
    if not np.any(np.isfinite(log_weights)):
        where = "" if time_index is None else f" at time {time_index}"
        raise ABCSDegenerateWeightsError(
            f"all {len(log_weights)} particle weights are zero{where}", time_index
        )


def normalized_weights(
    log_weights: np.ndarray, time_index: Optional[int] = None
) -> np.ndarray:
    """Returns `W_i / sum_j W_j` from log weights."""
    log_weights = np.asarray(log_weights, dtype=float)
    check_degenerate(log_weights, time_index)
    w = np.exp(log_weights - log_sum(log_weights))
    return w / np.sum(np.sort(w))


def ess(log_weights: np.ndarray, time_index: Optional[int] = None) -> float:
    """
    Returns the effective sample size `(sum_i Wbar_i^2)^-1`, in `[1, N]`.

    >>> round(ess(np.log([2.0, 1.0, 1.0])), 12)
    2.666666666667
    """
    log_weights = np.asarray(log_weights, dtype=float)
    check_degenerate(log_weights, time_index)
    value = np.exp(2.0 * log_sum(log_weights) - log_sum(2.0 * log_weights))
    return float(np.clip(value, 1.0, len(log_weights)))


def multinomial_resample(
    log_weights: np.ndarray,
    stream: np.random.Generator,
    time_index: Optional[int] = None,
) -> np.ndarray:
    """
    Draws `N` ancestor indices i.i.d. with `P(index = j) = Wbar_j`.

    The caller resets the weights of the resampled cloud to one.
    """
    w = normalized_weights(log_weights, time_index)
    cumulative = np.cumsum(w)
    cumulative /= cumulative[-1]
    u = stream.random(len(w))
    return np.searchsorted(cumulative, u, side="right").astype(np.int64)
