"""Figure rendering over the experiment-harness CSV schema.

Reads only the delimited output of the simulation harness (never computes
numbers itself) and draws one panel per figure tag: closed-form estimates as
solid lines, Monte Carlo means as dashed lines with 1.96-standard-error bars,
exact-solver values as bare markers.  All styling constants live in one
table so repeated renders of the same CSV are byte-identical.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figplot"  # deterministic SVG element ids

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

#: The harness CSV contract; renders refuse files with any other header.
CSV_HEADER = ["experiment_id", "figure_tag", "boundary", "L", "K", "h",
              "Du", "Dv", "Dw", "k_value", "scaling", "estimator", "mean",
              "std_error", "n_trials", "seed"]


class SchemaError(ValueError):
    """The CSV does not match the harness schema."""


class EmptySelectionError(ValueError):
    """No rows matched the requested figure tag."""


@dataclass(frozen=True)
class FigureSpec:
    """How one figure tag is drawn: x-axis variable, series grouping and labels."""

    figure_tag: str
    x_variable: str          # log_ratio | Du | inverse_pair_rate
    series_key: str          # rates | k_value | none
    x_label: str
    y_label: str = "mean time"


FIGURE_SPECS = {
    "fig1": FigureSpec("fig1", "log_ratio", "rates", "log(L/h)"),
    "fig2": FigureSpec("fig2", "Du", "none", "Du"),
    "fig-tri-sweep-h": FigureSpec("fig-tri-sweep-h", "log_ratio", "rates", "log(L/h)"),
    "fig-tri-sweep-Du": FigureSpec("fig-tri-sweep-Du", "Du", "none", "Du"),
    "fig-reaction": FigureSpec("fig-reaction", "log_ratio", "k_value", "log(L/h)"),
    "figB1": FigureSpec("figB1", "inverse_pair_rate", "none", "1/(Dv+Dw)"),
    "figB2": FigureSpec("figB2", "inverse_pair_rate", "none", "1/(Dv+Dw)"),
    "figB3": FigureSpec("figB3", "inverse_pair_rate", "none", "1/(Dv+Dw)"),
}

# one fixed style table: colors cycle per series, estimators set the dash
SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
ESTIMATOR_STYLE = {
    "formula": dict(linestyle="-", marker=""),
    "mc": dict(linestyle="--", marker=""),
    "oracle": dict(linestyle="", marker="o"),
}
BOUNDARY_ALPHA = {"periodic": 1.0, "reflective": 0.65}
FIGSIZE = (6.4, 4.4)
DPI = 144


@dataclass(frozen=True)
class RenderReport:
    """What a render call drew; used by callers and tests."""

    out_path: Path
    n_rows: int
    n_series: int
    series_labels: tuple[str, ...]


def read_csv(csv_path: str | Path) -> list[dict[str, str]]:
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise SchemaError(
                f"unexpected CSV header {reader.fieldnames}; want {CSV_HEADER}")
        return list(reader)


def _x_value(row: dict[str, str], spec: FigureSpec) -> float:
    if spec.x_variable == "log_ratio":
        return math.log(float(row["L"]) / float(row["h"]))
    if spec.x_variable == "Du":
        return float(row["Du"])
    pair = float(row["Dv"]) + float(row["Dw"])
    return 1.0 / pair


def _series_label(row: dict[str, str], spec: FigureSpec) -> str:
    if spec.series_key == "rates":
        rates = ",".join(row[c] for c in ("Du", "Dv", "Dw") if row[c] != "")
        return f"D=({rates})"
    if spec.series_key == "k_value":
        return f"k={row['k_value']}"
    return "sweep"


def render(csv_path: str | Path, figure_tag: str,
           out_path: str | Path) -> RenderReport:
    """Draw one figure tag from a harness CSV into an image file.

    The output format follows the file extension (.png or .svg); repeated
    calls over the same CSV produce identical bytes.
    """
    if figure_tag not in FIGURE_SPECS:
        raise EmptySelectionError(
            f"unknown figure tag {figure_tag!r}; known: {sorted(FIGURE_SPECS)}")
    spec = FIGURE_SPECS[figure_tag]
    rows = [r for r in read_csv(csv_path)
            if r["figure_tag"] == figure_tag and r["mean"] != ""]
    if not rows:
        raise EmptySelectionError(f"no rows with figure_tag={figure_tag!r} in {csv_path}")

    series: dict[str, dict[tuple[str, str], list[dict[str, str]]]] = {}
    for row in rows:
        label = _series_label(row, spec)
        series.setdefault(label, {}).setdefault(
            (row["estimator"], row["boundary"]), []).append(row)

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    for index, (label, groups) in enumerate(sorted(series.items())):
        color = SERIES_COLORS[index % len(SERIES_COLORS)]
        for (estimator, boundary), group in sorted(groups.items()):
            # line estimators need at least two supporting rows; bare oracle
            # markers may be sparser (points above the solver cap are absent)
            if len(group) < 2 and estimator != "oracle":
                raise EmptySelectionError(
                    f"series {label}/{estimator}/{boundary} has fewer than 2 rows")
            group = sorted(group, key=lambda r: _x_value(r, spec))
            xs = [_x_value(r, spec) for r in group]
            ys = [float(r["mean"]) for r in group]
            style = ESTIMATOR_STYLE[estimator]
            alpha = BOUNDARY_ALPHA.get(boundary, 1.0)
            if estimator == "mc":
                errs = [1.96 * float(r["std_error"]) if r["std_error"] else 0.0
                        for r in group]
                ax.errorbar(xs, ys, yerr=errs, color=color, alpha=alpha,
                            capsize=2.5, label=f"{label} {boundary} {estimator}",
                            **style)
            else:
                ax.plot(xs, ys, color=color, alpha=alpha,
                        label=f"{label} {boundary} {estimator}",
                        markersize=5, **style)
    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.set_title(figure_tag)
    ax.legend(fontsize=7, loc="best")
    ax.grid(True, alpha=0.25)
    fig.tight_layout()

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if out_path.suffix.lower() == ".svg":
        metadata = {"Date": None}  # drop the timestamp for reproducible bytes
    else:
        metadata = {"Software": "figplot"}
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)
    return RenderReport(out_path=out_path, n_rows=len(rows),
                        n_series=len(series),
                        series_labels=tuple(sorted(series)))
