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
Particle marginal Metropolis-Hastings over the static parameters `theta`.

Every iteration runs a fresh SMC pass at the proposed `theta'`, uses its
normalizing-constant estimate in the acceptance ratio and samples one terminal
particle with probability `Wbar_p^k`, whose ancestral path is the path state of
the chain. When a functional is given, the forward-only smoothing recursion runs
inside the same pass and its estimate is stored with the state.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from abc_smoothing.abc.filters import AbcFilter
from abc_smoothing.abc.kernels import AbcKernel
from abc_smoothing.exceptions import (
    ABCSChainInitializationError,
    ABCSDegenerateBackwardKernelError,
    ABCSDegenerateWeightsError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.model.functional import AdditiveFunctional
from abc_smoothing.model.hmm import HmmModel, ThetaVector
from abc_smoothing.pmmh.priors import PriorSpec, ProposalSpec
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.smc.estimates import Genealogy
from abc_smoothing.smc.filters import BootstrapFilter, ParticleFilter
from abc_smoothing.smoothing.fos import run_forward_smoother


LOGGER = logging.getLogger(__name__)

EXACT = "exact"


@dataclass(frozen=True)
class PmmhChainState:
    """
    One state of the chain. `fos_value` is the forward-only smoothing estimate of
    the pass that produced the state, `path_value` is the functional evaluated on
    `selected_path`; both are `None` when the chain runs without a functional.
    """

    theta: ThetaVector
    log_z: float
    selected_index: int
    selected_path: np.ndarray
    fos_value: Optional[np.ndarray]
    path_value: Optional[np.ndarray]
    accepted: bool
    iteration: int = 0


@dataclass(frozen=True)
class PmmhSetup:
    """
    Everything a chain step needs besides its state and its stream. With
    `forward_smoothing` off, the chain only records the functional on the
    selected path.
    """

    model: HmmModel
    prior: PriorSpec
    proposal: ProposalSpec
    observations: np.ndarray
    n_particles: int
    mode: Union[str, AbcKernel] = EXACT
    functional: Optional[AdditiveFunctional] = None
    policy: ResamplePolicy = field(default_factory=ResamplePolicy)
    forward_smoothing: bool = True

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.ndim == 1:
            obs = obs[:, None]
        object.__setattr__(self, "observations", obs)
        if self.n_particles < 1:
            raise ABCSValueError(f"the number of particles must be >= 1, got {self.n_particles}")
        if not isinstance(self.mode, AbcKernel) and self.mode != EXACT:
            raise ABCSValueError(f"mode must be {EXACT!r} or an AbcKernel, got {self.mode!r}")
        if self.mode == EXACT and not self.model.has_obs_density:
            raise ABCSUsageError(
                f"exact PMMH needs the observation density of model {self.model.name}"
            )

    def sampler(self, theta: ThetaVector) -> ParticleFilter:
        model = self.model.with_theta(theta)
        if isinstance(self.mode, AbcKernel):
            return AbcFilter(model, self.mode, self.policy)
        return BootstrapFilter(model, self.policy)


def acceptance_ratio(
    logz_prop: float,
    logz_cur: float,
    theta_prop: ThetaVector,
    theta_cur: ThetaVector,
    prior: PriorSpec,
    proposal: ProposalSpec,
) -> float:
    """
    Returns `min(1, Z'/Z * pi(theta') q(theta', theta) / (pi(theta) q(theta, theta')))`,
    computed in log space.

    >>> t = ThetaVector({"s": 1.0})
    >>> acceptance_ratio(math.log(2.0), 0.0, t, t, PriorSpec.flat(), ProposalSpec({"s": 0.1}, False))
    1.0
    """
    if not math.isfinite(logz_cur):
        raise ABCSUsageError(f"the current log normalizing constant must be finite, got {logz_cur}")
    if logz_prop == -math.inf:
        return 0.0
    log_prior_prop = prior.log_density(theta_prop)
    if log_prior_prop == -math.inf:
        return 0.0
    log_r = (
        logz_prop
        - logz_cur
        + log_prior_prop
        - prior.log_density(theta_cur)
        + proposal.log_q_ratio(theta_prop, theta_cur)
    )
    if log_r >= 0:
        return 1.0
    return math.exp(log_r)


def _pass(
    setup: PmmhSetup, theta: ThetaVector, stream: np.random.Generator
) -> PmmhChainState:
    smoothing = setup.functional is not None and setup.forward_smoothing
    run = run_forward_smoother(
        setup.sampler(theta),
        setup.observations,
        setup.functional if smoothing else None,
        setup.n_particles,
        stream,
    )
    w = run.last.normalized_weights()
    k = int(stream.choice(len(w), p=w))
    path = Genealogy.from_clouds(run.clouds).path(run.clouds, k)
    fos_value = None
    path_value = None
    if smoothing:
        fos_value = run.fos_estimate
    if setup.functional is not None:
        path_value = setup.functional.evaluate_path(path)
    return PmmhChainState(
        theta=theta,
        log_z=run.log_z.log_value,
        selected_index=k,
        selected_path=path,
        fos_value=fos_value,
        path_value=path_value,
        accepted=True,
    )


def pmmh_init(
    setup: PmmhSetup, theta0: ThetaVector, stream: np.random.Generator
) -> PmmhChainState:
    """
    Runs the SMC pass at `theta0` and samples the initial path.

    :raises ABCSChainInitializationError: if that pass degenerates; `theta0` or the tolerance
        must then be changed.
    """
    try:
        return _pass(setup, theta0, stream)
    except (ABCSDegenerateWeightsError, ABCSDegenerateBackwardKernelError) as e:
        raise ABCSChainInitializationError(
            f"the SMC pass at the initial theta {theta0} degenerates ({e}); "
            "change theta0 or the tolerance"
        ) from e


def pmmh_step(
    state: PmmhChainState, setup: PmmhSetup, stream: np.random.Generator
) -> PmmhChainState:
    """
    One Metropolis-Hastings move. A rejected move returns the previous state with
    `accepted=False`; a degenerate SMC pass at `theta'` counts as `Z' = 0`.
    """
    iteration = state.iteration + 1
    rejected = dataclasses.replace(state, accepted=False, iteration=iteration)
    theta_prop = setup.proposal.propose(state.theta, stream)
    if theta_prop is None:
        LOGGER.debug("iteration %d: proposal left the parameter domain", iteration)
        return rejected
    try:
        candidate = _pass(setup, theta_prop, stream)
    except (ABCSDegenerateWeightsError, ABCSDegenerateBackwardKernelError) as e:
        LOGGER.info("iteration %d: degenerate SMC pass at %s, rejected (%s)", iteration, theta_prop, e)
        return rejected
    ratio = acceptance_ratio(
        candidate.log_z, state.log_z, theta_prop, state.theta, setup.prior, setup.proposal
    )
    if stream.random() < ratio:
        return dataclasses.replace(candidate, iteration=iteration)
    return rejected


def run_chain(
    setup: PmmhSetup,
    theta0: ThetaVector,
    n_iterations: int,
    stream: np.random.Generator,
    callback: Optional[Callable[[PmmhChainState], None]] = None,
) -> List[PmmhChainState]:
    """
    Returns the chain `[state_0, ..., state_M]` with `M = n_iterations`; `callback`
    is called on every state as it is produced.
    """
    if n_iterations < 0:
        raise ABCSValueError(f"n_iterations must be >= 0, got {n_iterations}")
    state = pmmh_init(setup, theta0, stream)
    chain = [state]
    if callback is not None:
        callback(state)
    for _ in range(n_iterations):
        state = pmmh_step(state, setup, stream)
        chain.append(state)
        if callback is not None:
            callback(state)
    LOGGER.info(
        "PMMH chain of %d iterations, acceptance rate %.3f",
        n_iterations,
        acceptance_rate(chain),
    )
    return chain


def acceptance_rate(chain: Sequence[PmmhChainState]) -> float:
    """The fraction of accepted moves; the initial state is not a move."""
    moves = chain[1:]
    if len(moves) == 0:
        return 0.0
    return sum(1 for s in moves if s.accepted) / len(moves)


def _post_burn_in(chain: Sequence[PmmhChainState], burn_in: int) -> Sequence[PmmhChainState]:
    if burn_in < 0 or burn_in >= len(chain):
        raise ABCSUsageError(
            f"burn_in must lie in [0, {len(chain)}), got {burn_in}"
        )
    return chain[burn_in:]


def pmmh_fos_estimate(chain: Sequence[PmmhChainState], burn_in: int) -> np.ndarray:
    """
    The mean of the stored forward-only smoothing estimates after `burn_in`,
    repeated values of rejected moves included.
    """
    kept = _post_burn_in(chain, burn_in)
    if any(s.fos_value is None for s in kept):
        raise ABCSUsageError("the chain carries no forward-only smoothing values")
    return np.mean(np.stack([np.atleast_1d(s.fos_value) for s in kept]), axis=0)


def pmmh_path_estimate(chain: Sequence[PmmhChainState], burn_in: int) -> np.ndarray:
    """The mean of the functional over the selected paths after `burn_in`."""
    kept = _post_burn_in(chain, burn_in)
    if any(s.path_value is None for s in kept):
        raise ABCSUsageError("the chain carries no path values")
    return np.mean(np.stack([np.atleast_1d(s.path_value) for s in kept]), axis=0)


def posterior_mean(chain: Sequence[PmmhChainState], burn_in: int) -> ThetaVector:
    kept = _post_burn_in(chain, burn_in)
    values = np.mean(np.stack([s.theta.as_array() for s in kept]), axis=0)
    return ThetaVector.from_array(chain[0].theta.names, values)
