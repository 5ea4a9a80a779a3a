"""CSV serialization for measurement bundles, estimates and benchmark tables.

All files are UTF-8 with '.' as the decimal separator and '\n' line
endings; floats are written with shortest round-trip precision so a
written bundle reads back bit for bit.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .distance_estimator import KinematicEstimate
from .errors import ConfigError
from .harness import RmseTable, TimeSweepEntry
from .trajectory import MeasurementSet

__all__ = [
    "ACCEL_FILE",
    "DIAGNOSTICS_FILE",
    "EDM_FILE",
    "ESTIMATE_FILE",
    "RMSE_FILE",
    "TIMESTAMPS_FILE",
    "TIME_SWEEP_FILE",
    "read_measurement_bundle",
    "write_estimate",
    "write_measurement_bundle",
    "write_rmse_table",
    "write_time_sweep",
]

TIMESTAMPS_FILE = "timestamps.csv"
EDM_FILE = "edms.csv"
ACCEL_FILE = "accels.csv"
ESTIMATE_FILE = "estimate.csv"
DIAGNOSTICS_FILE = "diagnostics.txt"
RMSE_FILE = "rmse.csv"
TIME_SWEEP_FILE = "time_sweep.csv"


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_lines(path: Path, lines: Iterable[str]) -> None:
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")


def write_measurement_bundle(meas: MeasurementSet, outdir) -> list[Path]:
    """Write a measurement set as a CSV bundle into ``outdir``.

    Produces ``timestamps.csv`` (k,t), ``edms.csv`` (k,i,j,value with
    i < j; the symmetric part and zero diagonal are implied) and, when
    accelerometer data is present, ``accels.csv`` (k,node,axis,value).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    path = outdir / TIMESTAMPS_FILE
    _write_lines(path, ["k,t"] + [f"{k},{_fmt(t)}" for k, t in enumerate(meas.timestamps)])
    written.append(path)

    n = meas.n_nodes
    lines = ["k,i,j,value"]
    for k in range(meas.timestamps.size):
        for i in range(n):
            for j in range(i + 1, n):
                lines.append(f"{k},{i},{j},{_fmt(meas.edms[k, i, j])}")
    path = outdir / EDM_FILE
    _write_lines(path, lines)
    written.append(path)

    if meas.accels is not None:
        d = meas.accels.shape[1]
        lines = ["k,node,axis,value"]
        for k in range(meas.timestamps.size):
            for node in range(n):
                for axis in range(d):
                    lines.append(f"{k},{node},{axis},{_fmt(meas.accels[k, axis, node])}")
        path = outdir / ACCEL_FILE
        _write_lines(path, lines)
        written.append(path)
    return written


def _read_rows(path: Path, expected_header: str) -> list[list[str]]:
    text = path.read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != expected_header:
        raise ConfigError(f"{path}: expected header '{expected_header}'")
    return [line.split(",") for line in lines[1:]]


def read_measurement_bundle(indir) -> MeasurementSet:
    """Read a CSV bundle written by :func:`write_measurement_bundle`."""
    indir = Path(indir)
    ts_rows = _read_rows(indir / TIMESTAMPS_FILE, "k,t")
    timestamps = np.empty(len(ts_rows))
    for k_str, t_str in ts_rows:
        timestamps[int(k_str)] = float(t_str)

    edm_rows = _read_rows(indir / EDM_FILE, "k,i,j,value")
    if not edm_rows:
        raise ConfigError(f"{indir / EDM_FILE}: no pairwise entries (need >= 2 nodes)")
    n = 1 + max(int(r[2]) for r in edm_rows)
    edms = np.zeros((timestamps.size, n, n))
    for k_str, i_str, j_str, v_str in edm_rows:
        k, i, j = int(k_str), int(i_str), int(j_str)
        edms[k, i, j] = edms[k, j, i] = float(v_str)

    accels = None
    accel_path = indir / ACCEL_FILE
    if accel_path.exists():
        accel_rows = _read_rows(accel_path, "k,node,axis,value")
        d = 1 + max(int(r[2]) for r in accel_rows)
        accels = np.zeros((timestamps.size, d, n))
        for k_str, node_str, axis_str, v_str in accel_rows:
            accels[int(k_str), int(axis_str), int(node_str)] = float(v_str)

    return MeasurementSet(timestamps=timestamps, edms=edms, accels=accels)


def write_estimate(est: KinematicEstimate, outdir) -> list[Path]:
    """Write an estimate as (block,row,col,value) CSV plus diagnostics text."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["block,row,col,value"]
    blocks = [("Y0", est.y0), ("Y1", est.y1), ("Y2", est.y2), ("rotation", est.rotation)]
    for name, mat in blocks:
        for r in range(mat.shape[0]):
            for c in range(mat.shape[1]):
                lines.append(f"{name},{r},{c},{_fmt(mat[r, c])}")
    est_path = outdir / ESTIMATE_FILE
    _write_lines(est_path, lines)

    diag = [f"residual {name} = {_fmt(value)}" for name, value in est.residuals.items()]
    diag += [f"warning: {w}" for w in est.warnings]
    diag_path = outdir / DIAGNOSTICS_FILE
    _write_lines(diag_path, diag)
    return [est_path, diag_path]


def write_rmse_table(table: RmseTable, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,k,block,rmse"]
    lines += [f"{r.method},{r.k},{r.block},{_fmt(r.rmse)}" for r in table.rows]
    _write_lines(path, lines)
    return path


def write_time_sweep(entries: Sequence[TimeSweepEntry], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,k,t,rmse"]
    lines += [f"{e.method},{e.k},{_fmt(e.t)},{_fmt(e.rmse)}" for e in entries]
    _write_lines(path, lines)
    return path
