"""Deterministic SVG rendering of the CSV tables."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .artifacts import read_csv
from .errors import ConfigError

LEDGER_COLUMNS = ["t", "norm_sq", "diff_work", "reac_work", "mart_term", "ito_term", "residual"]
SNAPSHOT_COLUMNS = ["t", "x", "u"]


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "latnagumo"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def _numeric(rows, ncols):
    try:
        return np.array([[float(v) for v in r] for r in rows]).reshape(len(rows), ncols)
    except ValueError as exc:
        raise ConfigError(f"non-numeric CSV entry: {exc}") from None


def plot(csv_path, kind: str = "lines", out=None) -> Path:
    csv_path = Path(csv_path)
    header, rows = read_csv(csv_path)
    if not header or not rows:
        raise ConfigError(f"{csv_path}: empty CSV, nothing to plot")
    data = _numeric(rows, len(header))
    out = Path(out) if out else csv_path.with_suffix(".svg")
    plt = _figure()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if kind == "lines":
        if header == LEDGER_COLUMNS:
            series = LEDGER_COLUMNS[1:6]
        else:
            series = header[1:]
        if not series:
            raise ConfigError(f"{csv_path}: lines plot needs an x column plus at least one series")
        for name in series:
            ax.plot(data[:, 0], data[:, header.index(name)], label=name, lw=1.2)
        ax.set_xlabel(header[0])
        ax.legend(loc="best", fontsize=8)
    elif kind == "heatmap":
        if header[:3] != SNAPSHOT_COLUMNS:
            raise ConfigError(
                f"{csv_path}: heatmap expects columns {SNAPSHOT_COLUMNS}, found {header}"
            )
        t_vals = np.unique(data[:, 0])
        x_vals = np.unique(data[:, 1])
        grid = np.full((t_vals.size, x_vals.size), np.nan)
        ti = np.searchsorted(t_vals, data[:, 0])
        xi = np.searchsorted(x_vals, data[:, 1])
        grid[ti, xi] = data[:, 2]
        mesh = ax.pcolormesh(x_vals, t_vals, grid, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="u")
        ax.set_xlabel("x")
        ax.set_ylabel("t")
    else:
        raise ConfigError(f"unknown plot kind {kind!r}; use 'lines' or 'heatmap'")
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
