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
"""SVG figures of the error summaries; needs the optional `plot` extra (matplotlib)."""

import math
import warnings
from typing import Dict, List, Sequence, Tuple

from abc_smoothing.exceptions import ABCSValueError
from abc_smoothing.harness.experiment import SummaryRow

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None


# salt of the SVG element ids; with no date the file bytes depend on the data only
SVG_HASH_SALT = "abc_smoothing"


def plot_error_curves(
    summaries: Sequence[SummaryRow], filename: str, value: str = "mean"
) -> bool:
    """
    Plots one curve per method against `N`: the mean error with a one standard
    error band (`value = "mean"`) or the standard error alone (`value = "se"`).

    :return: `False` when matplotlib is missing and nothing was written.
    """
    if value not in ("mean", "se"):
        raise ABCSValueError(f"value must be 'mean' or 'se', got {value!r}")
    if plt is None:
        warnings.warn("matplotlib is not installed, figure output is skipped")
        return False
    curves: Dict[str, List[Tuple[int, float, float]]] = {}
    for row in summaries:
        curves.setdefault(row.method, []).append(
            (row.n_particles, row.mean_error, row.se_error)
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, points in sorted(curves.items()):
        points.sort()
        ns = [p[0] for p in points]
        means = [p[1] for p in points]
        ses = [0.0 if math.isnan(p[2]) else p[2] for p in points]
        if value == "mean":
            (line,) = ax.plot(ns, means, marker="o", label=method)
            ax.fill_between(
                ns,
                [m - s for m, s in zip(means, ses)],
                [m + s for m, s in zip(means, ses)],
                color=line.get_color(),
                alpha=0.2,
            )
        else:
            ax.plot(ns, ses, marker="o", label=method)
    ax.set_xlabel("N")
    ax.set_ylabel("mean error" if value == "mean" else "standard error")
    ax.legend()
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(filename, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True
