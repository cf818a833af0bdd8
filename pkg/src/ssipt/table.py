"""Tabular sweep results with deterministic CSV and SVG emission.

CSV output is byte-stable for identical inputs: fixed 9-significant-digit
formatting, '\n' line endings, header always present.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import WorkbenchError


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.9g}"
    return str(v)


@dataclass
class SweepTable:
    """Rectangular table: named columns, rows of numeric/status cells."""

    columns: list
    rows: list = field(default_factory=list)

    def append(self, row):
        if len(row) != len(self.columns):
            raise WorkbenchError(
                f"row has {len(row)} cells, table has {len(self.columns)} columns"
            )
        self.rows.append(tuple(row))

    def column(self, name):
        """Values of one column as a list."""
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            if len(row) != len(self.columns):
                raise WorkbenchError("table is not rectangular")
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"


def emit_csv(table: SweepTable, path) -> None:
    """Write the table as CSV. Bit-stable across runs for equal inputs."""
    try:
        with open(path, "w", newline="") as f:
            f.write(table.to_csv())
    except OSError as e:
        raise WorkbenchError(f"cannot write CSV to {path}: {e}") from e


@dataclass(frozen=True)
class PlotSpec:
    """Which columns to draw: ys over x, one polyline per y column."""

    x: str
    ys: tuple
    title: str = ""
    width: int = 800
    height: int = 480


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 24, 36, 48


def _finite_pairs(table, xcol, ycol):
    xi = table.columns.index(xcol)
    yi = table.columns.index(ycol)
    pts = []
    for row in table.rows:
        x, y = row[xi], row[yi]
        if isinstance(x, bool) or isinstance(y, bool):
            x, y = float(x), float(y)
        if isinstance(x, (int, float)) and isinstance(y, (int, float)):
            if math.isfinite(x) and math.isfinite(y):
                pts.append((float(x), float(y)))
    return pts


def emit_svg(table: SweepTable, plot: PlotSpec, path) -> None:
    """Render selected columns as polylines in a standalone SVG."""
    series = {y: _finite_pairs(table, plot.x, y) for y in plot.ys}
    all_pts = [p for pts in series.values() for p in pts]
    if not all_pts:
        raise WorkbenchError("nothing to plot: no finite data points")

    xmin = min(p[0] for p in all_pts)
    xmax = max(p[0] for p in all_pts)
    ymin = min(p[1] for p in all_pts)
    ymax = max(p[1] for p in all_pts)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0

    w, h = plot.width, plot.height
    px0, px1 = _MARGIN_L, w - _MARGIN_R
    py0, py1 = h - _MARGIN_B, _MARGIN_T  # y axis grows upward

    def sx(x):
        return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0)

    def sy(y):
        return py0 + (y - ymin) / (ymax - ymin) * (py1 - py0)

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">'
    )
    out.append(f'<rect width="{w}" height="{h}" fill="white"/>')
    if plot.title:
        out.append(
            f'<text x="{w / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{plot.title}</text>'
        )
    # axes
    out.append(
        f'<line x1="{px0}" y1="{py0}" x2="{px1}" y2="{py0}" stroke="black"/>'
    )
    out.append(
        f'<line x1="{px0}" y1="{py0}" x2="{px0}" y2="{py1}" stroke="black"/>'
    )
    # axis labels from column names
    out.append(
        f'<text x="{(px0 + px1) / 2:.1f}" y="{h - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{plot.x}</text>'
    )
    out.append(
        f'<text x="14" y="{_MARGIN_T - 10}" font-family="sans-serif" '
        f'font-size="12">{", ".join(plot.ys)}</text>'
    )
    # range ticks
    for val, px in ((xmin, px0), (xmax, px1)):
        out.append(
            f'<text x="{px:.1f}" y="{py0 + 16:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_format_cell(float(val))}</text>'
        )
    for val, py in ((ymin, py0), (ymax, py1)):
        out.append(
            f'<text x="{px0 - 6:.1f}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_format_cell(float(val))}</text>'
        )
    for i, y in enumerate(plot.ys):
        pts = series[y]
        if not pts:
            continue
        coords = " ".join(f"{sx(x):.2f},{sy(v):.2f}" for x, v in pts)
        color = _PALETTE[i % len(_PALETTE)]
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{coords}"/>'
        )
        out.append(
            f'<text x="{px1 - 4}" y="{_MARGIN_T + 14 * (i + 1)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{y}</text>'
        )
    out.append("</svg>")
    try:
        with open(path, "w", newline="") as f:
            f.write("\n".join(out) + "\n")
    except OSError as e:
        raise WorkbenchError(f"cannot write SVG to {path}: {e}") from e
