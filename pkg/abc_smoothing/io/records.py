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
Comma-separated record files written by the harness.

Every float is written with 17 significant digits, so that files are
reproducible bit for bit and read back exactly.
"""

import csv
import math
import os
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from abc_smoothing.abc.calibration import CalibrationTrial
from abc_smoothing.exceptions import ABCSConfigError, ABCSUsageError
from abc_smoothing.harness.experiment import ErrorRecord, ExperimentResult, SummaryRow
from abc_smoothing.pmmh.chain import PmmhChainState
from abc_smoothing.smc.cloud import ParticleCloud


RECORD_HEADER = [
    "method",
    "N",
    "epsilon",
    "replicate",
    "error",
    "walltime_ms",
    "degenerate_flag",
]
SUMMARY_HEADER = [
    "method",
    "N",
    "epsilon",
    "replicates",
    "mean_error",
    "se_error",
    "degenerate_count",
]
DECOMPOSITION_HEADER = [
    "method",
    "N",
    "epsilon",
    "replicate",
    "abc_error",
    "smc_error",
    "error",
]
CALIBRATION_HEADER = ["epsilon", "trial", "success", "first_failing_time"]


def format_float(value: Optional[float]) -> str:
    """
    >>> format_float(0.1)
    '0.10000000000000001'
    >>> format_float(None)
    'null'
    """
    if value is None:
        return "null"
    return f"{float(value):.17g}"


def parse_float(text: str) -> Optional[float]:
    if text == "null":
        return None
    return float(text)


def _write_rows(filename: str, header: Sequence[str], rows: Iterable[Sequence[str]]):
    try:
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ABCSConfigError(f"cannot write {filename}: {e}") from e


def _read_rows(filename: str, header: Sequence[str]) -> List[List[str]]:
    try:
        with open(filename, newline="") as f:
            reader = csv.reader(f)
            found = next(reader, None)
            rows = [row for row in reader]
    except OSError as e:
        raise ABCSConfigError(f"cannot read {filename}: {e}") from e
    if found != list(header):
        raise ABCSUsageError(f"{filename} does not start with the header {header}")
    return rows


def write_records(records: Sequence[ErrorRecord], filename: str):
    _write_rows(
        filename,
        RECORD_HEADER,
        (
            [
                r.method,
                str(r.n_particles),
                format_float(r.epsilon),
                str(r.replicate),
                format_float(r.error),
                format_float(r.walltime_ms),
                "1" if r.degenerate else "0",
            ]
            for r in records
        ),
    )


def write_summary(summaries: Sequence[SummaryRow], filename: str):
    _write_rows(
        filename,
        SUMMARY_HEADER,
        (
            [
                s.method,
                str(s.n_particles),
                format_float(s.epsilon),
                str(s.replicates),
                format_float(s.mean_error),
                format_float(s.se_error),
                str(s.degenerate_count),
            ]
            for s in summaries
        ),
    )


def read_summary(filename: str) -> List[SummaryRow]:
    res = []
    for row in _read_rows(filename, SUMMARY_HEADER):
        mean_error = parse_float(row[4])
        se_error = parse_float(row[5])
        res.append(
            SummaryRow(
                method=row[0],
                n_particles=int(row[1]),
                epsilon=parse_float(row[2]),
                replicates=int(row[3]),
                mean_error=math.nan if mean_error is None else mean_error,
                se_error=math.nan if se_error is None else se_error,
                degenerate_count=int(row[6]),
            )
        )
    return res


def write_decomposition(records: Sequence[ErrorRecord], filename: str):
    """Writes the ABC and SMC parts of the error of the records that carry them."""
    _write_rows(
        filename,
        DECOMPOSITION_HEADER,
        (
            [
                r.method,
                str(r.n_particles),
                format_float(r.epsilon),
                str(r.replicate),
                format_float(r.abc_error),
                format_float(r.smc_error),
                format_float(r.error),
            ]
            for r in records
            if r.abc_error is not None
        ),
    )


def write_calibration_log(trial_log: Sequence[CalibrationTrial], filename: str):
    _write_rows(
        filename,
        CALIBRATION_HEADER,
        (
            [
                format_float(t.epsilon),
                str(t.trial),
                "1" if t.success else "0",
                "null" if t.first_failing_time is None else str(t.first_failing_time),
            ]
            for t in trial_log
        ),
    )


def _components(name: str, value: Optional[np.ndarray], width: int) -> Tuple[List[str], List[str]]:
    header = [f"{name}_{k}" for k in range(width)]
    if value is None:
        return header, ["null"] * width
    return header, [format_float(v) for v in np.atleast_1d(value)]


def write_chain(chain: Sequence[PmmhChainState], filename: str):
    """
    Writes one line per chain state: the iteration, the components of `theta`,
    `log Z`, the acceptance flag and the components of the two functional values.
    """
    if len(chain) == 0:
        raise ABCSUsageError("cannot write an empty chain")
    names = list(chain[0].theta.names)
    first = chain[0]
    fos_width = 0 if first.fos_value is None else len(np.atleast_1d(first.fos_value))
    path_width = 0 if first.path_value is None else len(np.atleast_1d(first.path_value))
    header = ["iteration"] + names + ["log_z", "accepted"]
    header += _components("fos_value", None, fos_width)[0]
    header += _components("path_value", None, path_width)[0]
    rows = []
    for s in chain:
        row = [str(s.iteration)] + [format_float(s.theta[n]) for n in names]
        row += [format_float(s.log_z), "1" if s.accepted else "0"]
        row += _components("fos_value", s.fos_value, fos_width)[1]
        row += _components("path_value", s.path_value, path_width)[1]
        rows.append(row)
    _write_rows(filename, header, rows)


def write_cloud_dump(clouds: Sequence[ParticleCloud], filename: str):
    """Writes `(time, i, x, log W, ancestor)` for every particle of every cloud."""
    if len(clouds) == 0:
        raise ABCSUsageError("cannot dump an empty list of clouds")
    dim = clouds[0].particles.shape[1]
    header = ["time", "i"] + [f"x_{k}" for k in range(dim)] + ["log_w", "ancestor"]
    rows = []
    for cloud in clouds:
        for i in range(cloud.size):
            rows.append(
                [str(cloud.time), str(i)]
                + [format_float(v) for v in cloud.particles[i]]
                + [format_float(cloud.log_weights[i]), str(int(cloud.ancestors[i]))]
            )
    _write_rows(filename, header, rows)


def write_fixture(values: Sequence[Tuple[int, float]], filename: str):
    """Writes `(time index, value)` pairs, one per line."""
    _write_rows(
        filename,
        ["time", "value"],
        ([str(t), format_float(v)] for t, v in values),
    )


def read_fixture(filename: str) -> List[Tuple[int, float]]:
    res = []
    for row in _read_rows(filename, ["time", "value"]):
        value = parse_float(row[1])
        if value is None:
            raise ABCSUsageError(f"{filename} holds a null fixture value")
        res.append((int(row[0]), value))
    return res


def emit_outputs(result: ExperimentResult, destination: str, figures: bool = True) -> List[str]:
    """
    Writes the records, the summary and, when present, the error decomposition,
    the calibration logs, the chains and the figures of `result` under `destination`.

    :return: the written file names.
    """
    if len(result.records) == 0:
        raise ABCSUsageError("there are no records to emit")
    written = []

    def target(name: str) -> str:
        path = os.path.join(destination, name)
        written.append(path)
        return path

    write_records(result.records, target("records.csv"))
    write_summary(result.summaries, target("summary.csv"))
    if any(r.abc_error is not None for r in result.records):
        write_decomposition(result.records, target("decomposition.csv"))
    for (method, n_particles), calibration in sorted(result.calibrations.items()):
        write_calibration_log(
            calibration.trial_log, target(f"calibration_{method}_N{n_particles}.csv")
        )
    for (method, n_particles, replicate), chain in sorted(result.chains.items()):
        if len(chain) > 0:
            write_chain(chain, target(f"chain_{method}_N{n_particles}_r{replicate}.csv"))
    if figures:
        from abc_smoothing.io.figures import plot_error_curves

        for value in ("mean", "se"):
            path = os.path.join(destination, f"error_{value}.svg")
            if plot_error_curves(result.summaries, path, value=value):
                written.append(path)
    return written
