"""
Flow-field artefacts: a CSV of sampled velocities and a quiver plot.
"""
from __future__ import annotations

import csv
import io
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..models.families import FlowFieldGrid  # noqa: E402

LOG = logging.getLogger(__name__)

# Fixed arrow scale so that plots at different times compare directly.
QUIVER_SCALE = 20.0


def to_csv(grid: FlowFieldGrid) -> str:
    """Header comment with the family, parameters and time; then x,y,u,v rows."""
    buf = io.StringIO()
    params = ", ".join(f"{k}={v:g}" for k, v in sorted(grid.params.items()))
    buf.write(f"# family={grid.family}, {params}, t={grid.t:g}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y", "u", "v"])
    for row in grid.rows:
        writer.writerow([format(val, ".17g") for val in row])
    return buf.getvalue()


def write_csv(grid: FlowFieldGrid, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(to_csv(grid), encoding="utf-8")
    LOG.info("wrote %d rows to %s", len(grid.rows), path)
    return path


def write_svg(grid: FlowFieldGrid, path: str | Path) -> Path:
    """
    Quiver plot of the sampled velocities. Output is byte-stable for a
    given grid: no date metadata and a fixed hash salt.
    """
    path = Path(path)
    data = np.asarray(grid.rows, dtype=float).reshape(-1, 4)
    with plt.rc_context({"svg.hashsalt": "plasticity-symmetry", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 6))
        try:
            ax.quiver(data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                      angles="xy", scale=QUIVER_SCALE)
            ax.set_aspect("equal")
            ax.set_xlabel("x")
            ax.set_ylabel("y")
            ax.set_title(f"{grid.family}, t = {grid.t:g}")
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    LOG.info("wrote quiver plot to %s", path)
    return path


def write_flowfield(grid: FlowFieldGrid, out: str | Path) -> list[Path]:
    """
    Write `out`.csv and `out`.svg (the suffix of `out`, if any, is replaced).
    """
    base = Path(out)
    if base.suffix in (".csv", ".svg"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    return [write_csv(grid, base.with_name(base.name + ".csv")),
            write_svg(grid, base.with_name(base.name + ".svg"))]
