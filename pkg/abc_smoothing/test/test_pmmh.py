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

import math

import numpy as np
from scipy import stats

from abc_smoothing.abc import AbcKernel
from abc_smoothing.exceptions import (
    ABCSChainInitializationError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.pmmh import (
    PmmhSetup,
    PriorSpec,
    ProposalSpec,
    acceptance_rate,
    acceptance_ratio,
    pmmh_fos_estimate,
    pmmh_init,
    pmmh_path_estimate,
    pmmh_step,
    posterior_mean,
    run_chain,
)
from abc_smoothing.shortcuts import *
from abc_smoothing.test import TestCase, main
from abc_smoothing.test.examples import get_example_models
from abc_smoothing.utils import as_stream


class TestPriorsAndProposals(TestCase):
    def test_inverse_gamma(self):
        prior = PriorSpec.inverse_gamma(("sigma_x2", "sigma_y2"), 2.0, 3.0)
        theta = ThetaVector({"sigma_x2": 1.5, "sigma_y2": 0.5})
        expected = stats.invgamma.logpdf(1.5, 2.0, scale=3.0) + stats.invgamma.logpdf(
            0.5, 2.0, scale=3.0
        )
        self.assertAlmostEqual(prior.log_density(theta), float(expected))
        sample = prior.sample(("sigma_x2",), as_stream(0))
        self.assertEqual(sample.names, ("sigma_x2",))
        with self.assertRaises(ABCSValueError):
            prior.sample(("sigma_z2",), as_stream(0))
        with self.assertRaises(ABCSValueError):
            PriorSpec({"sigma_x2": (0.0, 1.0)})

    def test_flat_and_custom(self):
        theta = ThetaVector({"s": 4.0})
        self.assertEqual(PriorSpec.flat().log_density(theta), 0.0)
        prior = PriorSpec.from_log_density(lambda t: -t["s"])
        self.assertEqual(prior.log_density(theta), -4.0)

    def test_log_random_walk(self):
        proposal = ProposalSpec({"sigma_x2": 0.0, "sigma_y2": 0.3})
        theta = ThetaVector({"sigma_x2": 10.0, "sigma_y2": 1.0})
        rng = as_stream(3)
        for _ in range(20):
            moved = proposal.propose(theta, rng)
            self.assertEqual(moved["sigma_x2"], 10.0)
            self.assertGreater(moved["sigma_y2"], 0.0)
        self.assertFalse(proposal.symmetric)
        prop = ThetaVector({"sigma_x2": 10.0, "sigma_y2": 2.0})
        self.assertAlmostEqual(proposal.log_q_ratio(prop, theta), math.log(2.0))

    def test_additive_walk_leaves_domain(self):
        proposal = ProposalSpec({"s": 10.0}, log_transform=False)
        self.assertTrue(proposal.symmetric)
        theta = ThetaVector({"s": 0.01})
        rng = as_stream(4)
        moves = [proposal.propose(theta, rng) for _ in range(40)]
        self.assertTrue(any(m is None for m in moves))
        self.assertTrue(any(m is not None for m in moves))
        self.assertEqual(proposal.log_q_ratio(theta, theta), 0.0)

    def test_invalid_scale(self):
        with self.assertRaises(ABCSValueError):
            ProposalSpec({"s": -0.1})
        with self.assertRaises(ABCSValueError):
            ProposalSpec({"s": math.nan})


class TestAcceptanceRatio(TestCase):
    def setUp(self):
        TestCase.setUp(self)
        self.one = ThetaVector({"s": 1.0})
        self.two = ThetaVector({"s": 2.0})
        self.additive = ProposalSpec({"s": 0.1}, log_transform=False)
        self.log_walk = ProposalSpec({"s": 0.1})

    def test_symmetric(self):
        flat = PriorSpec.flat()
        self.assertEqual(
            acceptance_ratio(math.log(2.0), 0.0, self.one, self.one, flat, self.additive), 1.0
        )
        self.assertAlmostEqual(
            acceptance_ratio(-math.log(2.0), 0.0, self.one, self.one, flat, self.additive), 0.5
        )

    def test_jacobian(self):
        flat = PriorSpec.flat()
        self.assertEqual(acceptance_ratio(0.0, 0.0, self.two, self.one, flat, self.log_walk), 1.0)
        self.assertAlmostEqual(
            acceptance_ratio(0.0, 0.0, self.one, self.two, flat, self.log_walk), 0.5
        )

    def test_prior(self):
        prior = PriorSpec.from_log_density(lambda t: -t["s"])
        self.assertAlmostEqual(
            acceptance_ratio(0.0, 0.0, self.two, self.one, prior, self.additive),
            math.exp(-1.0),
        )
        zero = PriorSpec.from_log_density(lambda t: -math.inf)
        self.assertEqual(acceptance_ratio(5.0, 0.0, self.two, self.one, zero, self.additive), 0.0)

    def test_degenerate_values(self):
        flat = PriorSpec.flat()
        self.assertEqual(
            acceptance_ratio(-math.inf, 0.0, self.two, self.one, flat, self.additive), 0.0
        )
        with self.assertRaises(ABCSUsageError):
            acceptance_ratio(0.0, -math.inf, self.two, self.one, flat, self.additive)


class TestChain(TestCase):
    def setUp(self):
        TestCase.setUp(self)
        self.models = get_example_models()
        model, observations, functional = self.models["lg_short"]
        self.model = model
        self.observations = observations
        self.functional = functional
        self.setup = PmmhSetup(
            model=model,
            prior=PriorSpec.inverse_gamma(model.theta.names),
            proposal=ProposalSpec({"sigma_x2": 0.2, "sigma_y2": 0.2}),
            observations=observations,
            n_particles=50,
            functional=functional,
        )

    def test_run_chain(self):
        seen = []
        chain = run_chain(self.setup, self.model.theta, 20, as_stream(1), callback=seen.append)
        self.assertEqual(len(chain), 21)
        self.assertEqual(len(seen), 21)
        self.assertTrue(chain[0].accepted)
        self.assertEqual(chain[0].theta, self.model.theta)
        for i, state in enumerate(chain):
            self.assertEqual(state.iteration, i)
            self.assertEqual(state.selected_path.shape, (len(self.observations), 1))
            self.assertTrue(
                np.allclose(state.path_value, self.functional.evaluate_path(state.selected_path))
            )
            if i > 0 and not state.accepted:
                previous = chain[i - 1]
                self.assertEqual(state.theta, previous.theta)
                self.assertEqual(state.log_z, previous.log_z)
                self.assertTrue(np.array_equal(state.fos_value, previous.fos_value))
        rate = acceptance_rate(chain)
        self.assertEqual(rate, sum(s.accepted for s in chain[1:]) / 20)
        self.assertTrue(0.0 <= rate <= 1.0)

        fos = pmmh_fos_estimate(chain, 5)
        expected = np.mean([s.fos_value for s in chain[5:]], axis=0)
        self.assertTrue(np.allclose(fos, expected))
        path = pmmh_path_estimate(chain, 0)
        self.assertEqual(path.shape, (1,))
        mean_theta = posterior_mean(chain, 5)
        self.assertEqual(mean_theta.names, self.model.theta.names)
        self.assertAlmostEqual(
            mean_theta["sigma_y2"], float(np.mean([s.theta["sigma_y2"] for s in chain[5:]]))
        )
        with self.assertRaises(ABCSUsageError):
            pmmh_fos_estimate(chain, 21)
        with self.assertRaises(ABCSUsageError):
            pmmh_path_estimate(chain, -1)

    def test_reproducible(self):
        first = run_chain(self.setup, self.model.theta, 10, as_stream(7))
        second = run_chain(self.setup, self.model.theta, 10, as_stream(7))
        self.assertEqual([s.theta for s in first], [s.theta for s in second])
        self.assertEqual([s.log_z for s in first], [s.log_z for s in second])

    def test_step(self):
        rng = as_stream(2)
        state = pmmh_init(self.setup, self.model.theta, rng)
        self.assertEqual(state.iteration, 0)
        following = pmmh_step(state, self.setup, rng)
        self.assertEqual(following.iteration, 1)

    def test_fixed_parameters(self):
        setup = PmmhSetup(
            model=self.model,
            prior=PriorSpec.flat(),
            proposal=ProposalSpec({"sigma_x2": 0.0, "sigma_y2": 0.0}),
            observations=self.observations,
            n_particles=100,
            functional=self.functional,
        )
        chain = run_chain(setup, self.model.theta, 200, as_stream(5))
        self.assertTrue(all(s.theta == self.model.theta for s in chain))
        exact = kalman_functional_expectation(
            kalman_rts(self.model, self.observations), self.functional
        )
        self.assertTrue(np.all(np.abs(pmmh_fos_estimate(chain, 20) - exact) < 0.2))
        self.assertTrue(np.all(np.abs(pmmh_path_estimate(chain, 20) - exact) < 0.3))

    def test_path_only(self):
        setup = PmmhSetup(
            model=self.model,
            prior=PriorSpec.inverse_gamma(self.model.theta.names),
            proposal=ProposalSpec({"sigma_x2": 0.2, "sigma_y2": 0.2}),
            observations=self.observations,
            n_particles=50,
            functional=self.functional,
            forward_smoothing=False,
        )
        chain = run_chain(setup, self.model.theta, 5, as_stream(1))
        self.assertTrue(all(s.fos_value is None for s in chain))
        self.assertTrue(all(s.path_value is not None for s in chain))
        with self.assertRaises(ABCSUsageError):
            pmmh_fos_estimate(chain, 0)
        self.assertEqual(pmmh_path_estimate(chain, 0).shape, (1,))

    def test_without_functional(self):
        setup = PmmhSetup(
            model=self.model,
            prior=PriorSpec.flat(),
            proposal=ProposalSpec({"sigma_x2": 0.1, "sigma_y2": 0.1}),
            observations=self.observations,
            n_particles=30,
        )
        chain = run_chain(setup, self.model.theta, 3, as_stream(1))
        self.assertTrue(all(s.fos_value is None and s.path_value is None for s in chain))
        with self.assertRaises(ABCSUsageError):
            pmmh_path_estimate(chain, 0)

    def test_abc_mode(self):
        setup = PmmhSetup(
            model=self.model.without_obs_density(),
            prior=PriorSpec.inverse_gamma(self.model.theta.names),
            proposal=ProposalSpec({"sigma_x2": 0.2, "sigma_y2": 0.2}),
            observations=self.observations,
            n_particles=100,
            mode=AbcKernel.indicator(4.0),
            functional=self.functional,
        )
        chain = run_chain(setup, self.model.theta, 5, as_stream(3))
        self.assertEqual(len(chain), 6)
        tiny = PmmhSetup(
            model=self.model.without_obs_density(),
            prior=PriorSpec.flat(),
            proposal=ProposalSpec({"sigma_x2": 0.2}),
            observations=self.observations,
            n_particles=20,
            mode=AbcKernel.indicator(1e-9),
        )
        with self.assertRaises(ABCSChainInitializationError):
            pmmh_init(tiny, self.model.theta, as_stream(0))

    def test_setup_errors(self):
        common = dict(
            prior=PriorSpec.flat(),
            proposal=ProposalSpec({"sigma_x2": 0.1}),
            observations=self.observations,
        )
        with self.assertRaises(ABCSUsageError):
            PmmhSetup(model=self.model.without_obs_density(), n_particles=10, **common)
        with self.assertRaises(ABCSValueError):
            PmmhSetup(model=self.model, n_particles=0, **common)
        with self.assertRaises(ABCSValueError):
            PmmhSetup(model=self.model, n_particles=10, mode="approximate", **common)
        setup = PmmhSetup(model=self.model, n_particles=10, **common)
        self.assertEqual(setup.observations.shape, (len(self.observations), 1))
        with self.assertRaises(ABCSValueError):
            run_chain(setup, self.model.theta, -1, as_stream(0))


if __name__ == "__main__":
    main()
