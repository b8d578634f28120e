"""Render experiment CSVs to static PNGs.

Line plots draw one series per label over a chosen x column with a reference
line at xq = 1 (the equal-capability level). Heatmaps pivot two sweep columns
into a grid, one panel per label. Rendering depends only on the CSV bytes and
the PlotSpec: no clock or environment state leaks into the output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class PlotError(ValueError):
    """Bad plot spec or CSV content."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    x_column: str
    out_path: str
    y_column: str = "xq"
    series_column: str = "label"
    kind: str = "line"  # "line" | "heatmap"

    def __post_init__(self) -> None:
        if self.kind not in ("line", "heatmap"):
            raise PlotError(f"unknown plot kind {self.kind!r}")


def read_rows(csv_path: str | Path) -> list[dict[str, str]]:
    path = Path(csv_path)
    if not path.exists():
        raise PlotError(f"CSV not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PlotError(f"empty CSV: {path}")
        rows = list(reader)
    if not rows:
        raise PlotError(f"CSV has a header but no data rows: {path}")
    return rows


def _require_columns(rows: list[dict[str, str]], names: list[str]) -> None:
    header = rows[0].keys()
    missing = [n for n in names if n not in header]
    if missing:
        raise PlotError(f"missing column(s) {missing}; CSV has {sorted(header)}")


def _series(rows: list[dict[str, str]], spec: PlotSpec) -> dict[str, list[tuple[float, float]]]:
    out: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        label = row[spec.series_column]
        out.setdefault(label, []).append((float(row[spec.x_column]), float(row[spec.y_column])))
    for pts in out.values():
        pts.sort()
    return out


def _render_line(rows: list[dict[str, str]], spec: PlotSpec, ax) -> None:
    for label, pts in sorted(_series(rows, spec).items()):
        ax.plot([x for x, _ in pts], [y for _, y in pts], marker="o", label=label)
    if spec.y_column == "xq":
        ax.axhline(1.0, color="gray", linewidth=1.0, linestyle="--")
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(spec.y_column)
    ax.legend()


def _render_heatmap(rows: list[dict[str, str]], spec: PlotSpec, fig) -> None:
    # pivot (x_column, series_column) -> y_column, one panel per label
    labels = sorted({row["label"] for row in rows}) if "label" in rows[0] else [""]
    axes = fig.subplots(1, len(labels), squeeze=False)[0]
    for ax, label in zip(axes, labels):
        of_label = [r for r in rows if label == "" or r["label"] == label]
        xs = sorted({float(r[spec.x_column]) for r in of_label})
        ys = sorted({float(r[spec.series_column]) for r in of_label})
        grid = [[float("nan")] * len(xs) for _ in ys]
        for r in of_label:
            i = ys.index(float(r[spec.series_column]))
            j = xs.index(float(r[spec.x_column]))
            grid[i][j] = float(r[spec.y_column])
        im = ax.imshow(
            grid,
            origin="lower",
            aspect="auto",
            extent=(min(xs), max(xs), min(ys), max(ys)),
            cmap="viridis",
        )
        ax.set_xlabel(spec.x_column)
        ax.set_ylabel(spec.series_column)
        ax.set_title(label or spec.y_column)
        fig.colorbar(im, ax=ax, label=spec.y_column)


def render(spec: PlotSpec) -> Path:
    """Render one PlotSpec to a PNG; returns the output path."""
    rows = read_rows(spec.csv_path)
    needed = [spec.x_column, spec.y_column]
    if spec.kind == "heatmap" or spec.series_column != "label":
        needed.append(spec.series_column)
    elif "label" in rows[0]:
        needed.append("label")
    _require_columns(rows, needed)

    fig = plt.figure(figsize=(7, 4.5) if spec.kind == "line" else (6 * 1.2, 4.5))
    try:
        if spec.kind == "line":
            _render_line(rows, spec, fig.add_subplot())
        else:
            _render_heatmap(rows, spec, fig)
        fig.tight_layout()
        out = Path(spec.out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=120, metadata={"Software": "plotgen"})
    finally:
        plt.close(fig)
    return Path(spec.out_path)
