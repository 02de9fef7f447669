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

from abc_smoothing.exceptions import (
    ABCSDegenerateWeightsError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.shortcuts import *
from abc_smoothing.smc import (
    BootstrapFilter,
    Genealogy,
    ParticleCloud,
    ResampleMode,
    ResamplePolicy,
    ess,
    log_normalizing_constant,
    log_sum,
    multinomial_resample,
    normalizing_constant,
    normalized_weights,
    path_estimate,
    select_parents,
    smc_init,
    smc_step,
)
from abc_smoothing.smc.resampling import check_degenerate
from abc_smoothing.test import TestCase, main
from abc_smoothing.test.examples import get_example_models
from abc_smoothing.utils import as_stream


def _cloud(time, particles, log_weights, ancestors=None):
    particles = np.asarray(particles, dtype=float)
    particles = particles.reshape(len(particles), -1)
    if ancestors is None:
        ancestors = np.arange(len(log_weights))
    return ParticleCloud(
        time=time,
        particles=particles,
        log_weights=np.asarray(log_weights, dtype=float),
        ancestors=np.asarray(ancestors, dtype=np.int64),
        log_step_weight_mean=0.0,
    )


class TestResampling(TestCase):
    def test_log_sum(self):
        self.assertEqual(log_sum(np.array([-np.inf, -np.inf])), -np.inf)
        self.assertAlmostEqual(log_sum(np.log([1.0, 2.0, 3.0])), math.log(6.0))
        # large offsets do not overflow
        self.assertAlmostEqual(log_sum(np.array([1000.0, 1000.0])), 1000.0 + math.log(2.0))

    def test_normalized_weights(self):
        w = normalized_weights(np.array([0.0, math.log(3.0), -np.inf]))
        self.assertTrue(np.allclose(w, [0.25, 0.75, 0.0]))
        self.assertAlmostEqual(float(np.sum(w)), 1.0)

    def test_ess(self):
        self.assertAlmostEqual(ess(np.zeros(50)), 50.0)
        self.assertAlmostEqual(ess(np.array([0.0, -np.inf, -np.inf])), 1.0)
        value = ess(np.random.default_rng(1).normal(size=200))
        self.assertTrue(1.0 <= value <= 200.0)

    def test_degenerate(self):
        with self.assertRaises(ABCSDegenerateWeightsError) as cm:
            check_degenerate(np.full(5, -np.inf), 4)
        self.assertEqual(cm.exception.time_index, 4)
        with self.assertRaises(ABCSDegenerateWeightsError):
            normalized_weights(np.full(3, -np.inf))

    def test_multinomial_resample(self):
        log_weights = np.full(10000, -np.inf)
        log_weights[10] = 0.0
        log_weights[20] = math.log(3.0)
        indices = multinomial_resample(log_weights, as_stream(5))
        self.assertEqual(len(indices), 10000)
        self.assertEqual(set(np.unique(indices)), {10, 20})
        self.assertAlmostEqual(float(np.mean(indices == 20)), 0.75, delta=0.05)

    def test_policies(self):
        self.assertEqual(ResamplePolicy().mode, ResampleMode.ESS_THRESHOLD)
        self.assertTrue(ResamplePolicy.every_step().should_resample(np.zeros(4)))
        self.assertFalse(ResamplePolicy.never().should_resample(np.array([0.0, -50.0])))
        policy = ResamplePolicy.ess_threshold(0.5)
        self.assertFalse(policy.should_resample(np.zeros(10)))
        self.assertTrue(policy.should_resample(np.array([0.0] + [-50.0] * 9)))
        self.assertEqual(ResamplePolicy.from_name("never").mode, ResampleMode.NEVER)
        with self.assertRaises(ABCSValueError):
            ResamplePolicy.from_name("sometimes")
        with self.assertRaises(ABCSValueError):
            ResamplePolicy.ess_threshold(0.0)

    def test_select_parents(self):
        prev = _cloud(0, np.arange(4.0), np.array([0.0, -1.0, -2.0, -3.0]))
        ancestors, base, resampled = select_parents(prev, ResamplePolicy.never(), as_stream(0))
        self.assertFalse(resampled)
        self.assertTrue(np.array_equal(ancestors, np.arange(4)))
        self.assertTrue(np.array_equal(base, prev.log_weights))
        ancestors, base, resampled = select_parents(
            prev, ResamplePolicy.every_step(), as_stream(0)
        )
        self.assertTrue(resampled)
        self.assertTrue(np.array_equal(base, np.zeros(4)))
        self.assertEqual(len(ancestors), 4)


class TestParticleCloud(TestCase):
    def test_shapes(self):
        with self.assertRaises(ABCSValueError):
            _cloud(0, np.zeros(3), np.zeros(2), np.arange(2))
        cloud = _cloud(1, [[1.0], [3.0]], np.log([1.0, 3.0]))
        self.assertEqual(cloud.size, 2)
        self.assertTrue(np.allclose(cloud.weighted_mean(), [2.5]))
        self.assertAlmostEqual(cloud.step_weight_mean, 1.0)

    def test_normalizing_constant(self):
        self.assertAlmostEqual(
            normalizing_constant([0.5, 0.25]).log_value, math.log(0.125)
        )
        zero = normalizing_constant([0.5, 0.0])
        self.assertTrue(zero.degenerate)
        self.assertEqual(zero.log_value, -np.inf)
        with self.assertRaises(ABCSValueError):
            normalizing_constant([-1.0])


class TestGenealogy(TestCase):
    def test_ancestry(self):
        clouds = [
            _cloud(0, [[0.0], [1.0], [2.0]], np.zeros(3)),
            _cloud(1, [[10.0], [11.0], [12.0]], np.zeros(3), [2, 2, 0]),
            _cloud(2, [[20.0], [21.0], [22.0]], np.zeros(3), [1, 0, 0]),
        ]
        genealogy = Genealogy.from_clouds(clouds)
        self.assertEqual(genealogy.horizon, 2)
        b = genealogy.ancestry()
        self.assertTrue(np.array_equal(b[2], [0, 1, 2]))
        self.assertTrue(np.array_equal(b[1], [1, 0, 0]))
        self.assertTrue(np.array_equal(b[0], [2, 2, 2]))
        path = genealogy.path(clouds, 0)
        self.assertTrue(np.array_equal(path[:, 0], [2.0, 11.0, 20.0]))
        paths = genealogy.paths(clouds)
        self.assertEqual(paths.shape, (3, 3, 1))
        self.assertTrue(np.array_equal(paths[2, :, 0], [2.0, 10.0, 22.0]))
        estimate = path_estimate(clouds, mean_state(2, 1, normalized=False))
        self.assertAlmostEqual(float(estimate[0]), (33.0 + 33.0 + 34.0) / 3.0)

    def test_errors(self):
        with self.assertRaises(ABCSUsageError):
            Genealogy([])
        clouds = [_cloud(1, [[0.0]], np.zeros(1))]
        with self.assertRaises(ABCSUsageError):
            Genealogy.from_clouds(clouds)
        with self.assertRaises(ABCSUsageError):
            path_estimate([_cloud(0, [[0.0]], np.zeros(1))], mean_state(1, 1))


class TestBootstrapFilter(TestCase):
    def setUp(self):
        TestCase.setUp(self)
        self.models = get_example_models()

    def test_run(self):
        model, observations, _ = self.models["benchmark_d2"]
        sampler = BootstrapFilter(model)
        clouds = sampler.run(observations, 50, as_stream(3))
        self.assertEqual(len(clouds), len(observations))
        for t, cloud in enumerate(clouds):
            self.assertEqual(cloud.time, t)
            self.assertEqual(cloud.particles.shape, (50, 2))
            self.assertIsNone(cloud.pseudo_obs)
        self.assertTrue(np.array_equal(clouds[0].particles, np.zeros((50, 2))))
        last = sampler.run(observations, 50, as_stream(3), keep=False)
        self.assertEqual(len(last), 1)
        self.assertTrue(np.array_equal(last[0].particles, clouds[-1].particles))
        z = log_normalizing_constant(clouds)
        self.assertTrue(math.isfinite(z.log_value))
        self.assertFalse(z.degenerate)

    def test_reproducible(self):
        model, observations, _ = self.models["lg_short"]
        sampler = BootstrapFilter(model, ResamplePolicy.every_step())
        first = sampler.run(observations, 30, as_stream(9))
        second = sampler.run(observations, 30, as_stream(9))
        for a, b in zip(first, second):
            self.assertTrue(np.array_equal(a.particles, b.particles))
            self.assertTrue(np.array_equal(a.log_weights, b.log_weights))
            self.assertTrue(np.array_equal(a.ancestors, b.ancestors))
        for cloud in first[1:]:
            self.assertTrue(cloud.resampled)

    def test_never_resample_keeps_lines(self):
        model, observations, _ = self.models["lg_short"]
        clouds = BootstrapFilter(model, ResamplePolicy.never()).run(
            observations, 20, as_stream(1)
        )
        for cloud in clouds:
            self.assertTrue(np.array_equal(cloud.ancestors, np.arange(20)))
        # without resampling the weights are the products of all potentials
        self.assertAlmostEqual(
            log_normalizing_constant(clouds).log_value,
            log_sum(clouds[-1].log_weights) - math.log(20),
        )

    def test_log_likelihood(self):
        model, observations, _ = self.models["lg_hand"]
        clouds = BootstrapFilter(model).run(observations, 20000, as_stream(4))
        exact = kalman_rts(model, observations).log_likelihood
        self.assertAlmostEqual(log_normalizing_constant(clouds).log_value, exact, delta=0.05)

    def _check_unbiased(self, sampler, observations, exact_log_likelihood, n_particles, seed):
        rng = as_stream(seed)
        z = np.array(
            [
                math.exp(
                    log_normalizing_constant(sampler.run(observations, n_particles, rng)).log_value
                    - exact_log_likelihood
                )
                for _ in range(500)
            ]
        )
        se = float(np.std(z, ddof=1) / math.sqrt(len(z)))
        self.assertLess(abs(float(np.mean(z)) - 1.0), 3.0 * se)

    def test_normalizing_constant_unbiased(self):
        model = LinearGaussianModel()
        observations = simulate(model, 10, 31).observations
        exact = kalman_rts(model, observations).log_likelihood
        self._check_unbiased(
            BootstrapFilter(model, ResamplePolicy.every_step()), observations, exact, 500, 11
        )

    def test_normalizing_constant_unbiased_dynamic_resampling(self):
        model = LinearGaussianModel()
        observations = simulate(model, 10, 31).observations
        exact = kalman_rts(model, observations).log_likelihood
        sampler = BootstrapFilter(model, ResamplePolicy.ess_threshold(0.5))
        clouds = sampler.run(observations, 500, as_stream(12))
        self.assertFalse(all(cloud.resampled for cloud in clouds[1:]))
        self._check_unbiased(sampler, observations, exact, 500, 13)

    def test_errors(self):
        model, observations, _ = self.models["benchmark_simulator"]
        with self.assertRaises(ABCSUsageError):
            smc_init(model, observations[0], 10, as_stream(0))
        model, observations, _ = self.models["lg_short"]
        with self.assertRaises(ABCSValueError):
            smc_init(model, observations[0], 0, as_stream(0))
        with self.assertRaises(ABCSValueError):
            smc_init(model, np.zeros(2), 10, as_stream(0))
        cloud = smc_init(model, observations[0], 10, as_stream(0))
        step = smc_step(cloud, model, observations[1], ResamplePolicy(), as_stream(0))
        self.assertEqual(step.time, 1)

    def test_degenerate_step(self):
        model = LinearGaussianModel(theta=ThetaVector({"sigma_x2": 1.0, "sigma_y2": 1e-4}))
        with self.assertRaises(ABCSDegenerateWeightsError) as cm:
            BootstrapFilter(model).run(np.array([[0.0], [1e200]]), 10, as_stream(0))
        self.assertEqual(cm.exception.time_index, 1)


if __name__ == "__main__":
    main()
