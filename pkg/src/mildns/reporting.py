"""Report emission: delimited tables and the figures rendered next to them.

The CSV is the contract (comma separated, header row, floats at 17
significant digits, deterministic bytes for a fixed manifest and seed); the
PNG figures are rendered alongside for human consumption and carry no
determinism guarantee.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["format_value", "write_csv", "save_loglog", "save_series", "save_semilogy"]

_FIG_DPI = 110


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def write_csv(path, rows) -> None:
    """Write rows (first row = header) with canonical float formatting."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(format_value(v) for v in row))
            fh.write("\n")


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=(5.0, 3.4), dpi=_FIG_DPI)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _finish(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_loglog(path, x, series: dict, xlabel: str, ylabel: str, title: str) -> None:
    fig, ax = _new_axes(xlabel, ylabel, title)
    for label, y in series.items():
        xs = np.asarray(x, dtype=float)
        ys = np.asarray(y, dtype=float)
        keep = (xs > 0) & (ys > 0)
        ax.loglog(xs[keep], ys[keep], marker="o", ms=3, lw=1, label=label)
    if len(series) > 1:
        ax.legend(fontsize=8)
    _finish(fig, path)


def save_semilogy(path, x, series: dict, xlabel: str, ylabel: str, title: str) -> None:
    fig, ax = _new_axes(xlabel, ylabel, title)
    for label, y in series.items():
        ys = np.asarray(y, dtype=float)
        keep = ys > 0
        ax.semilogy(np.asarray(x, dtype=float)[keep], ys[keep],
                    marker="o", ms=3, lw=1, label=label)
    if len(series) > 1:
        ax.legend(fontsize=8)
    _finish(fig, path)


def save_series(path, x, series: dict, xlabel: str, ylabel: str, title: str) -> None:
    fig, ax = _new_axes(xlabel, ylabel, title)
    for label, y in series.items():
        ax.plot(x, y, marker="o", ms=3, lw=1, label=label)
    if len(series) > 1:
        ax.legend(fontsize=8)
    _finish(fig, path)
