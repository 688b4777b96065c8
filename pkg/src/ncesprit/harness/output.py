"""CSV and SVG output of result tables."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .montecarlo import CRB_ROWS, ResultTable, Row

CSV_HEADER = ("sweep_value", "estimator", "rmse_emp", "rmse_ana", "crb", "trials", "failures")
FORMATS = ("csv", "svg")

_LABELS = {"nc_se": "NC SE", "nc_ue": "NC UE", "se": "SE", "ue": "UE",
           "det_nc_crb": "Det NC CRB", "det_crb": "Det CRB"}
_AXIS_LABELS = {"snr": "SNR [dB]", "snapshots": "snapshots N", "separation": "separation [rad]",
                "phase_sep": "phase separation [rad]", "sensors": "sensors M"}
_LOG_X = {"snapshots", "separation"}


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        w.writerow([_fmt(r.sweep_value), r.estimator, _fmt(r.rmse_emp), _fmt(r.rmse_ana),
                    _fmt(r.crb), r.trials, r.failures])
    return buf.getvalue()


def read_csv(text: str) -> list:
    rows = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    for rec in reader:
        rows.append(Row(float(rec[0]), rec[1], float(rec[2]), float(rec[3]), float(rec[4]),
                        int(rec[5]), int(rec[6])))
    return rows


def efficiency(table: ResultTable, estimator: str):
    """(M values, CRB / MSE) for a single-source sensor sweep."""
    x, rmse = table.curve(estimator)
    _, crb = table.curve("det_nc_crb", "crb")
    return x, (crb / rmse) ** 2


def plot(table: ResultTable, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    names = [n for n in table.estimators if n not in CRB_ROWS and n != "ana"]
    if table.sweep_axis == "sensors":
        for name in names:
            x, eta = efficiency(table, name)
            ax.plot(x, eta, "o-", label=_LABELS.get(name, name))
        m = [r.sweep_value for r in table.rows]
        xs = np.arange(2, int(max(m)) + 1) if m else np.array([])
        ax.plot(xs, 6 * (xs - 1) / (xs * (xs + 1)), "k--", label="6(M-1)/(M(M+1))")
        ax.set_ylabel("asymptotic efficiency")
    else:
        for name in names:
            x, y = table.curve(name)
            ax.plot(x, y, "o-", label=f"{_LABELS.get(name, name)} emp")
        nc = [n for n in names if n in ("nc_se", "nc_ue")]
        if nc:
            x, y = table.curve(nc[0], "rmse_ana")
            ax.plot(x, y, "k-", label="ana")
        elif "ana" in table.estimators:
            x, y = table.curve("ana", "rmse_ana")
            ax.plot(x, y, "k-", label="ana")
        for name, style in zip(CRB_ROWS, ("k:", "k-.")):
            if name in table.estimators:
                x, y = table.curve(name, "crb")
                ax.plot(x, y, style, label=_LABELS[name])
        ax.set_yscale("log")
        ax.set_ylabel("RMSE [rad]")
        if table.sweep_axis in _LOG_X:
            ax.set_xscale("log")
    ax.set_xlabel(_AXIS_LABELS.get(table.sweep_axis, "sweep value"))
    ax.set_title(table.name)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit(table: ResultTable, out_dir, formats=("csv",)) -> list:
    """Write ``<name>.csv`` and/or ``<name>.svg`` into ``out_dir``; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValueError(f"unknown output format {fmt!r}")
        path = out / f"{table.name}.{fmt}"
        if fmt == "csv":
            path.write_text(to_csv(table), encoding="utf-8")
        else:
            plot(table, path)
        paths.append(path)
    return paths
