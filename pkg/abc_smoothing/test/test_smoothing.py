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

from abc_smoothing.abc import AbcFilter, AbcKernel, RejectionAbcFilter
from abc_smoothing.exceptions import (
    ABCSDegenerateBackwardKernelError,
    ABCSUsageError,
    ABCSValueError,
)
from abc_smoothing.shortcuts import *
from abc_smoothing.smc import BootstrapFilter, ParticleCloud, ResamplePolicy
from abc_smoothing.smoothing import (
    fos_estimate,
    fos_init,
    fos_update,
    run_forward_smoother,
)
from abc_smoothing.test import TestCase, main, skipIfNotLongRun
from abc_smoothing.test.examples import get_example_models
from abc_smoothing.utils import as_stream


def _stats_with_chunk(clouds, functional, model, chunk):
    stats = fos_init(functional, clouds[0])
    for prev, cloud in zip(clouds, clouds[1:]):
        stats = fos_update(stats, prev, cloud, model, chunk=chunk)
    return stats


class TestForwardSmoothing(TestCase):
    def setUp(self):
        TestCase.setUp(self)
        self.models = get_example_models()

    def test_single_particle_is_path_value(self):
        for name in ("lg_short", "lg_lag", "benchmark_d2"):
            model, observations, functional = self.models[name]
            for seed in range(3):
                run = run_forward_smoother(
                    BootstrapFilter(model), observations, functional, 1, as_stream(seed)
                )
                self.assertTrue(
                    np.allclose(run.fos_estimate, run.path_estimate(functional), rtol=1e-10),
                    name,
                )

    def test_constant_functional(self):
        model, observations, _ = self.models["benchmark_d2"]
        horizon = len(observations) - 1
        run = run_forward_smoother(
            BootstrapFilter(model), observations, constant(horizon), 100, as_stream(1)
        )
        self.assertAlmostEqual(float(run.fos_estimate[0]), horizon + 1.0, places=10)

    def test_against_kalman(self):
        for name, tolerance in (("lg_short", 0.1), ("lg_lag", 0.15), ("lg_d2", 0.15)):
            model, observations, functional = self.models[name]
            exact = kalman_functional_expectation(kalman_rts(model, observations), functional)
            run = run_forward_smoother(
                BootstrapFilter(model), observations, functional, 1000, as_stream(21)
            )
            self.assertEqual(run.fos_estimate.shape, exact.shape)
            self.assertTrue(np.all(np.abs(run.fos_estimate - exact) < tolerance), name)
            self.assertTrue(
                np.all(np.abs(run.path_estimate(functional) - exact) < 2 * tolerance), name
            )

    def test_against_grid(self):
        model, observations, functional = self.models["benchmark_short"]
        truth = grid_oracle(
            model, observations, functional, GridSpec(points=801), stream=2
        ).expectation
        rng = as_stream(31)
        estimates = np.array(
            [
                run_forward_smoother(
                    BootstrapFilter(model), observations, functional, 500, rng
                ).fos_estimate[0]
                for _ in range(8)
            ]
        )
        se = float(np.std(estimates, ddof=1) / math.sqrt(len(estimates)))
        self.assertLess(abs(float(np.mean(estimates)) - float(truth[0])), 5.0 * se + 0.02)

    def test_abc_sampler(self):
        model, observations, functional = self.models["lg_short"]
        epsilon = 0.5
        exact = kalman_functional_expectation(
            kalman_rts(model.inflate_observation_variance(epsilon), observations), functional
        )
        sampler = AbcFilter(model, AbcKernel.gaussian(epsilon))
        run = run_forward_smoother(sampler, observations, functional, 1000, as_stream(4))
        self.assertTrue(np.all(np.abs(run.fos_estimate - exact) < 0.15))
        rejection = RejectionAbcFilter(model, AbcKernel.indicator(2.0))
        run = run_forward_smoother(rejection, observations, functional, 300, as_stream(4))
        self.assertTrue(np.all(np.isfinite(run.fos_estimate)))

    def test_chunking(self):
        for name in ("lg_lag", "benchmark_d2"):
            model, observations, functional = self.models[name]
            clouds = BootstrapFilter(model).run(observations, 100, as_stream(6))
            whole = _stats_with_chunk(clouds, functional, model, 1000)
            pieces = _stats_with_chunk(clouds, functional, model, 7)
            self.assertTrue(np.allclose(whole.values, pieces.values, rtol=1e-12, atol=1e-12))
            self.assertEqual(whole.time, len(observations) - 1)

    def test_without_functional(self):
        model, observations, functional = self.models["lg_short"]
        run = run_forward_smoother(
            BootstrapFilter(model), observations, None, 50, as_stream(0), keep_clouds=False
        )
        self.assertIsNone(run.stats)
        self.assertEqual(len(run.clouds), 1)
        self.assertEqual(run.last.time, len(observations) - 1)
        self.assertTrue(math.isfinite(run.log_z.log_value))
        with self.assertRaises(ABCSUsageError):
            run.fos_estimate
        with self.assertRaises(ABCSUsageError):
            run.path_estimate(functional)

    def test_errors(self):
        model, observations, functional = self.models["lg_short"]
        with self.assertRaises(ABCSValueError):
            run_forward_smoother(
                BootstrapFilter(model), observations, mean_state(2, 1), 10, as_stream(0)
            )
        clouds = BootstrapFilter(model).run(observations, 10, as_stream(0))
        with self.assertRaises(ABCSUsageError):
            fos_init(functional, clouds[1])
        stats = fos_init(functional, clouds[0])
        with self.assertRaises(ABCSUsageError):
            fos_update(stats, clouds[0], clouds[2], model)
        with self.assertRaises(ABCSValueError):
            fos_update(stats, clouds[1], clouds[2], model)
        with self.assertRaises(ABCSValueError):
            fos_estimate(stats, clouds[1])
        small = BootstrapFilter(model).run(observations, 5, as_stream(0))
        with self.assertRaises(ABCSValueError):
            fos_estimate(stats, small[0])

    def test_degenerate_backward_kernel(self):
        model = LinearGaussianModel()
        functional = mean_state(1, 1)

        def cloud(time, x):
            return ParticleCloud(
                time=time,
                particles=np.array([[x]]),
                log_weights=np.zeros(1),
                ancestors=np.zeros(1, dtype=np.int64),
                log_step_weight_mean=0.0,
            )

        stats = fos_init(functional, cloud(0, 0.0))
        with self.assertRaises(ABCSDegenerateBackwardKernelError) as cm:
            fos_update(stats, cloud(0, 0.0), cloud(1, 1e200), model)
        self.assertEqual(cm.exception.time_index, 1)

    @skipIfNotLongRun()
    def test_against_grid_replicated(self):
        model, observations, functional = self.models["benchmark_short"]
        truth = grid_oracle(
            model, observations, functional, GridSpec(points=801), stream=2
        ).expectation
        rng = as_stream(32)
        estimates = np.array(
            [
                run_forward_smoother(
                    BootstrapFilter(model, ResamplePolicy.every_step()),
                    observations,
                    functional,
                    2000,
                    rng,
                ).fos_estimate[0]
                for _ in range(50)
            ]
        )
        se = float(np.std(estimates, ddof=1) / math.sqrt(len(estimates)))
        self.assertLess(abs(float(np.mean(estimates)) - float(truth[0])), 4.0 * se)


if __name__ == "__main__":
    main()
