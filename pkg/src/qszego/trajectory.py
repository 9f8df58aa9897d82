"""Trajectory records: monitored time series emitted by the evolution drivers.

The CSV schema is fixed: ``t,Q,M,E,absJ,H12,H1,bmo_proxy,sigma1,...,sigmaR``
with 17 significant digits per value, so identical runs produce byte-identical
files on a given platform.  Extra diagnostics (trace norm of the shifted
Hankel section, truncation-tail estimate, optional state snapshots) are kept
on the record but stay out of the CSV; summaries report them separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Trajectory", "read_csv_columns"]

_FMT = "%.17g"


@dataclass
class Trajectory:
    """Time series of monitored quantities along a run.

    Columns: time, the conserved set (mass Q, momentum M, energy E, |cubic|),
    the H^{1/2} and H^1 norms, the Hankel top singular value (BMO proxy),
    the leading singular values of the shifted Hankel section, its trace
    norm, and the estimated truncated tail mass.
    """

    t: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    abs_cubic: np.ndarray
    h_half: np.ndarray
    h_one: np.ndarray
    bmo: np.ndarray
    sigmas: np.ndarray  # shape (nrows, rank)
    trace_norm: np.ndarray
    tail: np.ndarray
    states: list | None = None
    aborted: bool = False
    abort_reason: str = ""
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def rank(self) -> int:
        return self.sigmas.shape[1] if self.sigmas.ndim == 2 else 0

    def columns(self) -> dict[str, np.ndarray]:
        cols = {
            "t": self.t,
            "Q": self.mass,
            "M": self.momentum,
            "E": self.energy,
            "absJ": self.abs_cubic,
            "H12": self.h_half,
            "H1": self.h_one,
            "bmo_proxy": self.bmo,
        }
        for k in range(self.rank):
            cols[f"sigma{k + 1}"] = self.sigmas[:, k]
        return cols

    def to_csv(self, path) -> None:
        cols = self.columns()
        header = ",".join(cols)
        data = np.column_stack(list(cols.values()))
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in data:
                fh.write(",".join(_FMT % v for v in row) + "\n")

    def drift(self) -> dict[str, dict[str, float]]:
        """Max absolute/relative deviation of each monitored invariant.

        Relative drift uses the initial value as reference; identically zero
        invariants (e.g. higher singular values of rank-one data) report
        relative drift against a unit floor so the table stays finite.
        """
        out: dict[str, dict[str, float]] = {}
        series = {
            "Q": self.mass,
            "M": self.momentum,
            "E": self.energy,
            "absJ": self.abs_cubic,
            "trace": self.trace_norm,
        }
        for k in range(self.rank):
            series[f"sigma{k + 1}"] = self.sigmas[:, k]
        for name, col in series.items():
            if len(col) == 0:
                continue
            x0 = float(col[0])
            max_abs = float(np.max(np.abs(col - x0)))
            out[name] = {
                "initial": x0,
                "max_abs": max_abs,
                "max_rel": max_abs / max(abs(x0), 1.0e-300 if x0 != 0 else 1.0),
            }
        return out

    def tail_flag_time(self, threshold: float = 1e-10):
        """First monitored time at which the tail estimate exceeds threshold."""
        hot = np.nonzero(self.tail > threshold)[0]
        return float(self.t[hot[0]]) if hot.size else None

    def final_state(self) -> np.ndarray:
        if not self.states:
            raise ValueError("trajectory was recorded without state snapshots")
        return self.states[-1]


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a trajectory-style CSV back into named columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"malformed CSV {path}: {data.shape[1]} columns, "
                         f"header names {len(header)}")
    return {name: data[:, i] for i, name in enumerate(header)}
