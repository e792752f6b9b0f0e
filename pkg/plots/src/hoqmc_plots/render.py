"""Log-log convergence figures with reference-slope guide lines.

Reads the harness CSV schema (# metadata header lines, then
m,N,estimate,reference,abs_error,seconds) and renders one series per
file. Guide lines x^slope are anchored at the first data point of the
first series. Output is SVG with fixed styling and no timestamps, so
rendering the same inputs twice produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple[str, ...]
    out_path: str
    x_column: str = "N"
    y_column: str = "abs_error"
    guide_slopes: tuple[float, ...] = (-2.0,)
    labels: tuple[str, ...] = ()
    title: str = ""

    def __post_init__(self):
        if not self.csv_paths:
            raise ValueError("need at least one CSV")
        if self.labels and len(self.labels) != len(self.csv_paths):
            raise ValueError("one label per CSV expected")


def load_csv(path) -> tuple[dict, dict]:
    """(metadata, columns) from a harness CSV."""
    metadata: dict = {}
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append([float(c) for c in line.split(",")])
    if header is None or not rows:
        raise ValueError(f"no data rows in {path}")
    columns = {name: np.array([r[i] for r in rows]) for i, name in enumerate(header)}
    return metadata, columns


def _series(spec: FigureSpec, path: str) -> tuple[str, np.ndarray, np.ndarray]:
    metadata, columns = load_csv(path)
    for column in (spec.x_column, spec.y_column):
        if column not in columns:
            raise ValueError(f"column {column!r} missing from {path}")
    x = columns[spec.x_column]
    y = columns[spec.y_column]
    keep = (x > 0) & (y > 0)
    if not np.any(keep):
        raise ValueError(f"no positive data in {path}")
    label = "/".join(
        str(metadata[k])
        for k in ("experiment", "basis", "alpha")
        if k in metadata
    ) or path
    return label, x[keep], y[keep]


def _build_figure(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(5.0, 3.75))
    anchor = None
    for i, path in enumerate(spec.csv_paths):
        label, x, y = _series(spec, path)
        if spec.labels:
            label = spec.labels[i]
        ax.loglog(x, y, marker="o", markersize=3.5, linewidth=1.2, label=label)
        if anchor is None:
            anchor = (x, float(x[0]), float(y[0]))
    xs, x0, y0 = anchor
    for slope in spec.guide_slopes:
        guide = y0 * (xs / x0) ** slope
        ax.loglog(
            xs, guide, linestyle="--", linewidth=0.9, color="0.45",
            label=f"{spec.x_column}^{slope:g}",
        )
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(spec.y_column)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", linewidth=0.3, alpha=0.5)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, ax


def render(spec: FigureSpec) -> str:
    """Write the figure; identical inputs give byte-identical output."""
    with plt.rc_context({"svg.hashsalt": "hoqmc-plots"}):
        fig, _ = _build_figure(spec)
        try:
            fig.savefig(spec.out_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return spec.out_path
