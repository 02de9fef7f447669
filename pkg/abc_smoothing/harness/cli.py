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
The `abc-smoothing` command.

Exit codes: 0 on success, 2 on a configuration error, 3 when an ABC tolerance
cannot be calibrated, 1 on any other library error.
"""

import argparse
import logging
import os
import sys
from typing import Dict, Optional, Sequence

from abc_smoothing.abc.filters import AbcFilter, RejectionAbcFilter
from abc_smoothing.abc.kernels import AbcKernel, KernelShape
from abc_smoothing.environment import get_env
from abc_smoothing.exceptions import (
    ABCSCalibrationError,
    ABCSConfigError,
    ABCSException,
    ABCSOracleError,
)
from abc_smoothing.harness.config import (
    ABC_METHODS,
    PMMH_METHODS,
    PRESETS,
    ConfigValue,
    ExperimentConfig,
    load_config,
)
from abc_smoothing.harness.experiment import (
    ExperimentResult,
    build_model,
    compute_truth,
    particle_numbers,
    resolve_epsilon,
    run_experiment,
    simulate_data,
)
from abc_smoothing.io.figures import plot_error_curves
from abc_smoothing.io.records import (
    emit_outputs,
    read_summary,
    write_calibration_log,
    write_cloud_dump,
    write_fixture,
)
from abc_smoothing.smc.cloud import ResamplePolicy
from abc_smoothing.smc.filters import BootstrapFilter, ParticleFilter
from abc_smoothing.utils import as_stream, derive_seed


LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="base configuration")
    common.add_argument("--seed", type=int, help="master seed, overrides the configuration")
    common.add_argument("--out", help="output directory, overrides the configuration")
    common.add_argument(
        "--deterministic",
        action="store_true",
        help="record zero walltimes so reruns with the same seed give identical files",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="abc-smoothing",
        description="Replicated SMC, ABC and PMMH smoothing experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    smooth = sub.add_parser("smooth", parents=[common], help="run the smoothing methods")
    smooth.add_argument(
        "--dump-clouds",
        action="store_true",
        help="also write every particle cloud of the first replicate of each method",
    )
    sub.add_parser("pmmh", parents=[common], help="run the PMMH methods")
    sub.add_parser("calibrate", parents=[common], help="calibrate the ABC tolerances")
    sub.add_parser("truth", parents=[common], help="compute the reference value")
    report = sub.add_parser("report", parents=[common], help="draw figures from summary files")
    report.add_argument("summaries", nargs="+", help="summary.csv files to merge")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict[str, ConfigValue] = {}
    if args.seed is not None:
        overrides["experiment.seed"] = args.seed
    if args.out is not None:
        overrides["experiment.out"] = args.out
    if args.deterministic:
        overrides["experiment.walltime"] = False
    if args.config is not None:
        get_env().factory.configure_from_file(args.config)
    return load_config(args.config, args.preset, overrides)


def _sampler(config: ExperimentConfig, method: str, epsilon: Optional[float]) -> ParticleFilter:
    model = build_model(config)
    policy = ResamplePolicy.from_name(config.resampling, config.threshold)
    if epsilon is None:
        return BootstrapFilter(model, policy)
    kernel = AbcKernel(epsilon, KernelShape(config.kernel))
    if method == "rsmc_abc":
        return RejectionAbcFilter(model, kernel)
    return AbcFilter(model, kernel, policy)


def _dump_clouds(config: ExperimentConfig, result: ExperimentResult):
    for method in config.methods:
        n_particles = config.n_grid[0]
        epsilon = result.epsilons[(method, n_particles)]
        sampler = _sampler(config, method, epsilon)
        seed = derive_seed(config.seed, method, n_particles, epsilon, 0)
        clouds = sampler.run(result.observations, n_particles, as_stream(seed))
        write_cloud_dump(
            clouds, os.path.join(config.out, f"clouds_{method}_N{n_particles}.csv")
        )


def _smooth(config: ExperimentConfig, args: argparse.Namespace) -> int:
    if config.uses_pmmh:
        raise ABCSConfigError("the smooth command runs smc_exact, smc_abc and rsmc_abc only")
    result = run_experiment(config)
    for path in emit_outputs(result, config.out, config.figures):
        LOGGER.info("wrote %s", path)
    if args.dump_clouds:
        _dump_clouds(config, result)
    return EXIT_OK


def _pmmh(config: ExperimentConfig, args: argparse.Namespace) -> int:
    if any(m not in PMMH_METHODS for m in config.methods):
        raise ABCSConfigError("the pmmh command runs pmmh_exact and pmmh_abc only")
    result = run_experiment(config, keep_chains=True)
    for path in emit_outputs(result, config.out, config.figures):
        LOGGER.info("wrote %s", path)
    return EXIT_OK


def _calibrate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    observations = simulate_data(config).observations
    for method in config.methods:
        if method not in ABC_METHODS:
            continue
        for n_particles in particle_numbers(config, method):
            epsilon, calibration = resolve_epsilon(config, method, n_particles, observations)
            print(f"{method} N={n_particles}: epsilon = {epsilon}")
            if calibration is not None:
                write_calibration_log(
                    calibration.trial_log,
                    os.path.join(config.out, f"calibration_{method}_N{n_particles}.csv"),
                )
    return EXIT_OK


def _truth(config: ExperimentConfig, args: argparse.Namespace) -> int:
    truth = compute_truth(config)
    write_fixture(
        [(config.horizon, float(v)) for v in truth.value],
        os.path.join(config.out, "truth.csv"),
    )
    if truth.se is not None:
        write_fixture(
            [(config.horizon, float(v)) for v in truth.se],
            os.path.join(config.out, "truth_se.csv"),
        )
    print(f"{truth.source} truth: {truth.value}")
    return EXIT_OK


def _report(config: ExperimentConfig, args: argparse.Namespace) -> int:
    rows = []
    for filename in args.summaries:
        rows.extend(read_summary(filename))
    os.makedirs(config.out, exist_ok=True)
    for value in ("mean", "se"):
        plot_error_curves(rows, os.path.join(config.out, f"report_{value}.svg"), value)
    return EXIT_OK


COMMANDS = {
    "smooth": _smooth,
    "pmmh": _pmmh,
    "calibrate": _calibrate,
    "truth": _truth,
    "report": _report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _load(args)
        return COMMANDS[args.command](config, args)
    except (ABCSConfigError, ABCSOracleError) as e:
        LOGGER.error("configuration error: %s", e)
        return EXIT_CONFIG
    except ABCSCalibrationError as e:
        LOGGER.error("calibration failed: %s", e)
        for trial in e.trial_log:
            LOGGER.error("  %s", trial)
        return EXIT_CALIBRATION
    except ABCSException as e:
        LOGGER.error("%s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
