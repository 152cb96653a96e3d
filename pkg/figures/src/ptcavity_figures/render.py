"""Render the four reproduction figures from their CSV tables.

The CSV schemas are the external contract of the simulator's ``reproduce``
subcommand; headers are matched exactly.  Rows whose status column is not
"ok" are rendered as gaps (NaN breaks the line), and the renderer never
smooths or resamples: curves are straight segments between the tabulated
points.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib.figure import Figure

__all__ = ["FigureSpec", "FIGURES", "load_table", "render", "SchemaError", "EmptyDataError"]


class SchemaError(ValueError):
    """CSV header does not match the declared schema for the figure."""


class EmptyDataError(ValueError):
    """No usable rows (file empty or every row status-marked)."""


@dataclass(frozen=True)
class CurveStyle:
    column: str
    label: str
    color: str
    linestyle: str = "-"
    marker: str = ""
    markevery: int = 1


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    header: tuple
    x_column: str
    curves: tuple
    xlabel: str
    ylabel: str
    logy: bool
    status_column: str | None


FIGURES = {
    "fig1c": FigureSpec(
        figure_id="fig1c",
        header=("g1_over_Gamma", "A", "status"),
        x_column="g1_over_Gamma",
        curves=(CurveStyle("A", "amplification factor", "tab:blue"),),
        xlabel="g1 / Gamma",
        ylabel="A(g1, g)",
        logy=True,
        status_column="status",
    ),
    "fig1d": FigureSpec(
        figure_id="fig1d",
        header=("omega", "S_single", "S_broken", "S_ptsym"),
        x_column="omega",
        curves=(
            CurveStyle("S_single", "single cavity", "tab:red", linestyle="--"),
            CurveStyle("S_broken", "broken phase", "tab:blue"),
            CurveStyle("S_ptsym", "symmetric phase", "tab:green", marker="o", markevery=400),
        ),
        xlabel="omega (MHz)",
        ylabel="normalized background",
        logy=False,
        status_column=None,
    ),
    "fig2b": FigureSpec(
        figure_id="fig2b",
        header=("omega_over_omegam", "S_pt", "S_single", "S_ep"),
        x_column="omega_over_omegam",
        curves=(
            CurveStyle("S_pt", "gain-loss pair", "tab:blue"),
            CurveStyle("S_single", "single cavity", "tab:red", linestyle="--"),
            CurveStyle("S_ep", "loss-loss pair", "tab:green", marker="*", markevery=400),
        ),
        xlabel="omega / omega_m",
        ylabel="normalized output spectrum",
        logy=False,
        status_column=None,
    ),
    "fig2c": FigureSpec(
        figure_id="fig2c",
        header=("g1_over_threshold", "ratio_pt", "ratio_ep", "status"),
        x_column="g1_over_threshold",
        curves=(
            CurveStyle("ratio_pt", "gain-loss / single", "tab:blue"),
            CurveStyle("ratio_ep", "loss-loss / single", "tab:green", marker="*", markevery=12),
        ),
        xlabel="g1 / threshold",
        ylabel="S_xx / S_xx,single",
        logy=True,
        status_column="status",
    ),
}


def load_table(figure_id: str, csv_path) -> dict:
    """Read and schema-check one CSV; returns column name -> list.

    Numeric columns come back as floats (NaN preserved); the status column,
    when present, stays as strings.
    """
    spec = FIGURES.get(figure_id)
    if spec is None:
        raise ValueError(f"unknown figure id {figure_id!r}; expected one of {sorted(FIGURES)}")
    path = Path(csv_path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise EmptyDataError(f"{path} is empty") from None
        if header != spec.header:
            raise SchemaError(
                f"{path} header {header} does not match the {figure_id} schema {spec.header}"
            )
        columns = {name: [] for name in header}
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}: row {reader.line_num} has {len(row)} cells")
            for name, cell in zip(header, row):
                if name == spec.status_column:
                    columns[name].append(cell)
                else:
                    try:
                        columns[name].append(float(cell))
                    except ValueError:
                        raise SchemaError(
                            f"{path}: row {reader.line_num}, column {name}: "
                            f"{cell!r} is not a number"
                        ) from None
    n_rows = len(columns[spec.x_column])
    if n_rows == 0:
        raise EmptyDataError(f"{path} contains no data rows")
    if spec.status_column is not None:
        if all(s != "ok" for s in columns[spec.status_column]):
            raise EmptyDataError(f"{path}: every row is status-marked; nothing to draw")
    return columns


def render(figure_id: str, csv_path, out_path=None) -> Figure:
    """Draw one figure; writes ``out_path`` (suffix selects SVG/PNG) if given.

    Status-marked rows become gaps in every curve of that figure.
    """
    spec = FIGURES[figure_id] if figure_id in FIGURES else None
    columns = load_table(figure_id, csv_path)
    spec = FIGURES[figure_id]

    x = columns[spec.x_column]
    gap = None
    if spec.status_column is not None:
        gap = [s != "ok" for s in columns[spec.status_column]]

    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    for curve in spec.curves:
        y = list(columns[curve.column])
        if gap is not None:
            y = [math.nan if bad else v for v, bad in zip(y, gap)]
        ax.plot(
            x,
            y,
            label=curve.label,
            color=curve.color,
            linestyle=curve.linestyle,
            marker=curve.marker or None,
            markevery=curve.markevery,
            linewidth=1.4,
            markersize=5,
        )
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.legend(loc="best", frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path)
    return fig
