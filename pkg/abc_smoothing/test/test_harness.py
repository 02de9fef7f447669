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
import os
import tempfile

import numpy as np

from abc_smoothing.environment import Environment
from abc_smoothing.exceptions import ABCSUsageError, ABCSValueError
from abc_smoothing.harness import (
    ExperimentConfig,
    ExperimentResult,
    build_model,
    compute_truth,
    growth_slope,
    l1_error,
    run_experiment,
    simulate_data,
    time_sweep,
)
from abc_smoothing.harness.cli import main as cli_main
from abc_smoothing.io import (
    emit_outputs,
    plot_error_curves,
    read_fixture,
    read_summary,
    write_chain,
    write_cloud_dump,
    write_fixture,
    write_records,
    write_summary,
)
from abc_smoothing.model import kalman_functional_expectation, kalman_rts, mean_state
from abc_smoothing.pmmh.chain import PmmhChainState
from abc_smoothing.shortcuts import *
from abc_smoothing.smc.filters import BootstrapFilter
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.test import TestCase, main, skipIfModuleNotInstalled


def lg_config(**changes) -> ExperimentConfig:
    base = ExperimentConfig(
        methods=("smc_exact",),
        replicates=1,
        seed=5,
        figures=False,
        walltime=False,
        model_id="linear_gaussian",
        horizon=5,
        truth="kalman",
        n_grid=(100,),
    )
    return base.replace(**changes)


def read_lines(filename: str):
    with open(filename) as f:
        return f.read().splitlines()


class TestExperiment(TestCase):
    def test_l1_error(self):
        self.assertEqual(l1_error(np.array([1.0, -3.0]), np.array([0.0, -1.0])), 1.5)
        self.assertEqual(l1_error(2.0, 2.0), 0.0)
        with self.assertRaises(ABCSValueError):
            l1_error(np.zeros(2), np.zeros(3))

    def test_data(self):
        config = lg_config()
        first = simulate_data(config)
        second = simulate_data(config)
        self.assertEqual(first.observations.shape, (6, 1))
        self.assertTrue(np.array_equal(first.observations, second.observations))
        other = simulate_data(config.replace(data_seed=1))
        self.assertFalse(np.array_equal(first.observations, other.observations))
        model = build_model(lg_config(theta={"sigma_y2": 0.25}, dim=2))
        self.assertEqual(model.theta["sigma_y2"], 0.25)
        self.assertEqual(model.theta["sigma_x2"], 1.0)
        self.assertEqual(model.dim_x, 2)
        self.assertIsInstance(build_model(ExperimentConfig()), NonlinearGrowthModel)

    def test_kalman_truth(self):
        config = lg_config()
        observations = simulate_data(config).observations
        truth = compute_truth(config, observations)
        expected = kalman_functional_expectation(
            kalman_rts(build_model(config), observations), mean_state(5, 1)
        )
        self.assertEqual(truth.source, "kalman")
        self.assertIsNone(truth.se)
        self.assertTrue(np.allclose(truth.value, expected))

    def test_reference_truth(self):
        config = lg_config(truth="reference_run", reference_n=200, reference_replicates=3)
        truth = compute_truth(config)
        self.assertEqual(truth.source, "reference_run")
        self.assertEqual(truth.value.shape, (1,))
        self.assertTrue(np.all(truth.se > 0))
        exact = compute_truth(lg_config())
        self.assertLess(l1_error(truth.value, exact.value), 0.5)

    def test_single_replicate(self):
        res = run_experiment(lg_config())
        self.assertEqual(len(res.records), 1)
        self.assertEqual(len(res.summaries), 1)
        record = res.records[0]
        self.assertEqual(record.cell, ("smc_exact", 100, 0))
        self.assertFalse(record.degenerate)
        self.assertEqual(record.walltime_ms, 0.0)
        self.assertIsNone(record.epsilon)
        self.assertAlmostEqual(record.error, l1_error(record.estimate, res.truth.value))
        row = res.summaries[0]
        self.assertEqual(row.replicates, 1)
        self.assertEqual(row.degenerate_count, 0)
        self.assertAlmostEqual(row.mean_error, record.error)
        self.assertTrue(math.isnan(row.se_error))

    def test_records_are_reproducible(self):
        config = lg_config(methods=("smc_exact", "smc_abc"), replicates=2, epsilon=1.0)
        first = run_experiment(config)
        second = run_experiment(config)
        env = Environment()
        env.workers = 2
        pooled = run_experiment(config, env=env)
        self.assertEqual([r.cell for r in first.records], [r.cell for r in pooled.records])
        with tempfile.TemporaryDirectory() as tempdir:
            names = []
            for i, res in enumerate((first, second, pooled)):
                name = os.path.join(tempdir, f"records_{i}.csv")
                write_records(res.records, name)
                names.append(name)
            contents = [read_lines(n) for n in names]
        self.assertEqual(contents[0], contents[1])
        self.assertEqual(contents[0], contents[2])
        self.assertEqual(len(contents[0]), 5)
        self.assertEqual(contents[0][0], "method,N,epsilon,replicate,error,walltime_ms,degenerate_flag")

    def test_error_decomposition(self):
        config = lg_config(methods=("smc_exact", "smc_abc"), kernel="gaussian", epsilon=0.5, replicates=3)
        res = run_experiment(config)
        abc_records = [r for r in res.records if r.method == "smc_abc"]
        self.assertEqual(len(abc_records), 3)
        for r in abc_records:
            self.assertIsNotNone(r.abc_error)
            self.assertIsNotNone(r.smc_error)
            self.assertLessEqual(r.error, r.abc_error + r.smc_error + 1e-12)
        for r in res.records:
            if r.method == "smc_exact":
                self.assertIsNone(r.abc_error)
        self.assertEqual(len({r.abc_error for r in abc_records}), 1)

    def test_degenerate_cells(self):
        config = ExperimentConfig(
            methods=("smc_exact", "smc_abc"),
            replicates=2,
            seed=3,
            figures=False,
            walltime=False,
            horizon=5,
            n_grid=(100,),
            epsilon=1e-9,
            truth="reference_run",
            reference_n=100,
            reference_replicates=2,
        )
        res = run_experiment(config)
        for r in res.records:
            if r.method == "smc_abc":
                self.assertTrue(r.degenerate)
                self.assertTrue(math.isnan(r.error))
                self.assertIsNone(r.estimate)
            else:
                self.assertFalse(r.degenerate)
                self.assertTrue(math.isfinite(r.error))
        rows = {row.method: row for row in res.summaries}
        self.assertEqual(rows["smc_abc"].degenerate_count, 2)
        self.assertEqual(rows["smc_abc"].replicates, 0)
        self.assertTrue(math.isnan(rows["smc_abc"].mean_error))
        self.assertEqual(rows["smc_exact"].degenerate_count, 0)
        self.assertEqual(rows["smc_exact"].replicates, 2)
        self.assertTrue(math.isfinite(rows["smc_exact"].se_error))

    def test_calibrated_epsilon(self):
        config = lg_config(methods=("smc_abc",), epsilon_grid=(4.0, 1e-9), replicates=2)
        res = run_experiment(config)
        self.assertEqual(res.epsilons[("smc_abc", 100)], 4.0)
        calibration = res.calibrations[("smc_abc", 100)]
        self.assertEqual(calibration.epsilon, 4.0)
        self.assertEqual([t.epsilon for t in calibration.trial_log][:3], [4.0, 4.0, 4.0])
        self.assertFalse(calibration.trial_log[-1].success)
        self.assertTrue(all(r.epsilon == 4.0 for r in res.records))

    def test_given_data_and_truth(self):
        config = lg_config(replicates=2)
        observations = simulate_data(config).observations[:, 0]
        truth = compute_truth(config)
        res = run_experiment(config, observations, truth)
        self.assertEqual(res.observations.shape, (6, 1))
        self.assertIs(res.truth, truth)

    def test_time_sweep(self):
        config = lg_config(n_grid=(50,), replicates=2)
        sweep = time_sweep(config, [4, 2, 3])
        self.assertEqual(sorted(sweep), [2, 3, 4])
        self.assertEqual(sweep[3].observations.shape, (4, 1))
        self.assertTrue(np.array_equal(sweep[2].observations, sweep[4].observations[:3]))
        slope, stderr = growth_slope(sweep, "smc_exact", 50)
        self.assertTrue(math.isfinite(slope))
        self.assertTrue(math.isfinite(stderr))
        with self.assertRaises(ABCSValueError):
            growth_slope({n: sweep[n] for n in (2, 3)}, "smc_exact", 50)
        with self.assertRaises(ABCSValueError):
            growth_slope(sweep, "smc_abc", 50)
        with self.assertRaises(ABCSValueError):
            time_sweep(config, [])

    def test_path_only_pmmh(self):
        config = lg_config(
            methods=("pmmh_exact",),
            truth="reference_run",
            horizon=3,
            n_grid=(20,),
            path_n_grid=(40,),
            pmmh_forward_smoothing=False,
            pmmh_iterations=6,
            pmmh_burn_in=1,
            reference_n=20,
            reference_replicates=1,
        )
        res = run_experiment(config, keep_chains=True)
        self.assertEqual([r.n_particles for r in res.records], [40])
        self.assertIn(("pmmh_exact", 40, 0), res.chains)
        chain = res.chains[("pmmh_exact", 40, 0)]
        self.assertEqual(len(chain), 7)
        self.assertTrue(all(s.fos_value is None for s in chain))


class TestRecords(TestCase):
    def test_emit_outputs(self):
        config = lg_config(
            methods=("smc_exact", "smc_abc"),
            kernel="gaussian",
            epsilon_grid=(4.0, 2.0),
            replicates=2,
        )
        res = run_experiment(config)
        with tempfile.TemporaryDirectory() as tempdir:
            destination = os.path.join(tempdir, "out")
            written = emit_outputs(res, destination, figures=False)
            self.assertEqual(
                [os.path.basename(w) for w in written],
                [
                    "records.csv",
                    "summary.csv",
                    "decomposition.csv",
                    "calibration_smc_abc_N100.csv",
                ],
            )
            summary = read_lines(os.path.join(destination, "summary.csv"))
            self.assertEqual(
                summary[0], "method,N,epsilon,replicates,mean_error,se_error,degenerate_count"
            )
            self.assertEqual(len(summary), 3)
            decomposition = read_lines(os.path.join(destination, "decomposition.csv"))
            self.assertEqual(decomposition[0], "method,N,epsilon,replicate,abc_error,smc_error,error")
            self.assertEqual(len(decomposition), 3)
            self.assertTrue(decomposition[1].startswith("smc_abc,100,2,0,"))
            calibration = read_lines(os.path.join(destination, "calibration_smc_abc_N100.csv"))
            self.assertEqual(calibration[0], "epsilon,trial,success,first_failing_time")
            self.assertEqual(calibration[1], "4,0,1,null")
            rows = read_summary(os.path.join(destination, "summary.csv"))
            self.assertEqual([(r.method, r.n_particles, r.epsilon) for r in rows],
                             [("smc_abc", 100, 2.0), ("smc_exact", 100, None)])
            self.assertAlmostEqual(rows[1].mean_error, res.summaries[1].mean_error, places=15)
            empty = ExperimentResult(config, res.observations, res.truth, [], [])
            with self.assertRaises(ABCSUsageError):
                emit_outputs(empty, destination, figures=False)

    def test_empty_summary(self):
        with tempfile.TemporaryDirectory() as tempdir:
            name = os.path.join(tempdir, "summary.csv")
            write_summary([], name)
            self.assertEqual(
                read_lines(name),
                ["method,N,epsilon,replicates,mean_error,se_error,degenerate_count"],
            )
            self.assertEqual(read_summary(name), [])
            write_fixture([(0, 1.0)], name)
            with self.assertRaises(ABCSUsageError):
                read_summary(name)

    def test_fixtures(self):
        with tempfile.TemporaryDirectory() as tempdir:
            name = os.path.join(tempdir, "truth.csv")
            write_fixture([(0, 0.1), (3, -2.5)], name)
            self.assertEqual(read_lines(name), ["time,value", "0,0.10000000000000001", "3,-2.5"])
            self.assertEqual(read_fixture(name), [(0, 0.1), (3, -2.5)])

    def test_chain(self):
        theta = ThetaVector({"sigma_x2": 1.0, "sigma_y2": 0.5})
        chain = [
            PmmhChainState(theta, -3.5, 0, np.zeros((3, 1)), np.array([0.25]), np.array([0.5]), True, 0),
            PmmhChainState(theta, -3.5, 0, np.zeros((3, 1)), np.array([0.25]), np.array([0.5]), False, 1),
        ]
        with tempfile.TemporaryDirectory() as tempdir:
            name = os.path.join(tempdir, "chain.csv")
            write_chain(chain, name)
            lines = read_lines(name)
        self.assertEqual(lines[0], "iteration,sigma_x2,sigma_y2,log_z,accepted,fos_value_0,path_value_0")
        self.assertEqual(lines[1], "0,1,0.5,-3.5,1,0.25,0.5")
        self.assertEqual(lines[2], "1,1,0.5,-3.5,0,0.25,0.5")
        with self.assertRaises(ABCSUsageError):
            write_chain([], name)

    def test_cloud_dump(self):
        model = LinearGaussianModel()
        observations = np.array([[0.5], [1.0]])
        clouds = BootstrapFilter(model, ResamplePolicy.from_name("every_step")).run(
            observations, 4, np.random.default_rng(0)
        )
        with tempfile.TemporaryDirectory() as tempdir:
            name = os.path.join(tempdir, "clouds.csv")
            write_cloud_dump(clouds, name)
            lines = read_lines(name)
        self.assertEqual(lines[0], "time,i,x_0,log_w,ancestor")
        self.assertEqual(len(lines), 9)
        self.assertTrue(lines[1].startswith("0,0,"))
        self.assertTrue(lines[8].startswith("1,3,"))
        with self.assertRaises(ABCSUsageError):
            write_cloud_dump([], name)

    @skipIfModuleNotInstalled("matplotlib")
    def test_figures(self):
        res = run_experiment(lg_config(n_grid=(50, 100), replicates=2))
        with tempfile.TemporaryDirectory() as tempdir:
            written = emit_outputs(res, tempdir, figures=True)
            self.assertIn(os.path.join(tempdir, "error_mean.svg"), written)
            self.assertIn(os.path.join(tempdir, "error_se.svg"), written)
            self.assertTrue(os.path.getsize(os.path.join(tempdir, "error_mean.svg")) > 0)
            with self.assertRaises(ABCSValueError):
                plot_error_curves(res.summaries, os.path.join(tempdir, "x.svg"), value="median")

    @skipIfModuleNotInstalled("matplotlib")
    def test_outputs_identical_on_rerun(self):
        config = lg_config(n_grid=(50, 100), replicates=2, figures=True)
        contents = []
        for _ in range(2):
            res = run_experiment(config)
            with tempfile.TemporaryDirectory() as tempdir:
                written = emit_outputs(res, tempdir, figures=True)
                files = {}
                for path in written:
                    with open(path, "rb") as f:
                        files[os.path.basename(path)] = f.read()
                contents.append(files)
        self.assertIn("error_mean.svg", contents[0])
        self.assertIn("error_se.svg", contents[0])
        self.assertEqual(sorted(contents[0]), sorted(contents[1]))
        for name, data in contents[0].items():
            self.assertEqual(data, contents[1][name], name)
        self.assertNotIn(b"<dc:date>", contents[0]["error_mean.svg"])


class TestCli(TestCase):
    def write_config(self, directory: str, *lines: str) -> str:
        name = os.path.join(directory, "experiment.cfg")
        with open(name, "w") as config:
            config.write(
                "model.id = linear_gaussian\n"
                "model.horizon = 3\n"
                "truth.source = kalman\n"
                "smc.n_grid = 50\n"
                "experiment.replicates = 2\n"
                "experiment.figures = false\n"
                "experiment.walltime = false\n"
            )
            for line in lines:
                config.write(line + "\n")
        return name

    def test_smooth_and_report(self):
        with tempfile.TemporaryDirectory() as tempdir:
            config = self.write_config(tempdir)
            out = os.path.join(tempdir, "out")
            self.assertEqual(cli_main(["smooth", "--config", config, "--out", out, "--dump-clouds"]), 0)
            self.assertTrue(os.path.isfile(os.path.join(out, "records.csv")))
            self.assertTrue(os.path.isfile(os.path.join(out, "clouds_smc_exact_N50.csv")))
            self.assertEqual(len(read_lines(os.path.join(out, "records.csv"))), 3)
            summary = os.path.join(out, "summary.csv")
            report = os.path.join(tempdir, "report")
            self.assertEqual(cli_main(["report", summary, "--out", report]), 0)
            self.assertTrue(os.path.isdir(report))

    def test_deterministic_reruns(self):
        with tempfile.TemporaryDirectory() as tempdir:
            config = os.path.join(tempdir, "timed.cfg")
            with open(config, "w") as f:
                f.write(
                    "model.id = linear_gaussian\n"
                    "model.horizon = 3\n"
                    "truth.source = kalman\n"
                    "smc.n_grid = 50 100\n"
                    "experiment.replicates = 2\n"
                    "experiment.figures = false\n"
                )
            outputs = []
            for run in ("a", "b"):
                out = os.path.join(tempdir, run)
                self.assertEqual(
                    cli_main(["smooth", "--config", config, "--out", out, "--deterministic"]), 0
                )
                files = {}
                for name in ("records.csv", "summary.csv"):
                    with open(os.path.join(out, name), "rb") as f:
                        files[name] = f.read()
                outputs.append(files)
            self.assertEqual(outputs[0], outputs[1])
            for line in read_lines(os.path.join(tempdir, "a", "records.csv"))[1:]:
                self.assertEqual(line.split(",")[5], "0")

    def test_truth(self):
        with tempfile.TemporaryDirectory() as tempdir:
            config = self.write_config(tempdir)
            out = os.path.join(tempdir, "out")
            self.assertEqual(cli_main(["truth", "--config", config, "--out", out, "--seed", "9"]), 0)
            fixture = read_fixture(os.path.join(out, "truth.csv"))
            expected = compute_truth(
                lg_config(horizon=3, n_grid=(50,), replicates=2, seed=9)
            )
            self.assertEqual(len(fixture), 1)
            self.assertEqual(fixture[0][0], 3)
            self.assertAlmostEqual(fixture[0][1], float(expected.value[0]), places=12)
            self.assertFalse(os.path.exists(os.path.join(out, "truth_se.csv")))

    def test_pmmh(self):
        with tempfile.TemporaryDirectory() as tempdir:
            config = self.write_config(
                tempdir,
                "experiment.method = pmmh_exact",
                "pmmh.iterations = 4",
                "pmmh.burn_in = 1",
                "truth.reference_n = 20",
                "truth.reference_replicates = 1",
            )
            with open(config) as f:
                text = f.read().replace("truth.source = kalman", "truth.source = reference_run")
            with open(config, "w") as f:
                f.write(text)
            out = os.path.join(tempdir, "out")
            self.assertEqual(cli_main(["pmmh", "--config", config, "--out", out]), 0)
            lines = read_lines(os.path.join(out, "chain_pmmh_exact_N50_r1.csv"))
            self.assertEqual(len(lines), 6)
            self.assertEqual(cli_main(["smooth", "--config", config, "--out", out]), 2)

    def test_calibrate(self):
        with tempfile.TemporaryDirectory() as tempdir:
            config = self.write_config(tempdir, "experiment.method = smc_abc", "abc.epsilon_grid = 4 1e-9")
            out = os.path.join(tempdir, "out")
            self.assertEqual(cli_main(["calibrate", "--config", config, "--out", out]), 0)
            self.assertTrue(os.path.isfile(os.path.join(out, "calibration_smc_abc_N50.csv")))
        with tempfile.TemporaryDirectory() as tempdir:
            config = self.write_config(tempdir, "experiment.method = smc_abc", "abc.epsilon_grid = 1e-9")
            out = os.path.join(tempdir, "out")
            self.assertEqual(cli_main(["calibrate", "--config", config, "--out", out]), 3)

    def test_config_errors(self):
        with tempfile.TemporaryDirectory() as tempdir:
            config = self.write_config(tempdir, "model.colour = blue")
            self.assertEqual(cli_main(["smooth", "--config", config]), 2)
            config = self.write_config(tempdir, "model.dim two")
            self.assertEqual(cli_main(["truth", "--config", config]), 2)
            config = self.write_config(tempdir, "model.id = benchmark")
            self.assertEqual(cli_main(["truth", "--config", config]), 2)
            missing = os.path.join(tempdir, "missing.cfg")
            self.assertEqual(cli_main(["truth", "--config", missing]), 2)


if __name__ == "__main__":
    main()
