"""Self-contained SVG charts and prediction rendering.

No plotting dependency: charts are built as SVG strings directly.  The grid
renderer marks each cell as given, predicted-correct, or predicted-wrong so
a prediction can be compared against the reference solution at a glance,
either with terminal colors or as an SVG.
"""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape as _xml_escape

import numpy as np

from .grids import GRID_SIZE, as_grid


def escape(text) -> str:
    """XML-escape text for element content and quoted attribute values."""
    return _xml_escape(str(text), {'"': "&quot;"})

STATUS_GIVEN = "given"
STATUS_CORRECT = "predicted-correct"
STATUS_WRONG = "predicted-wrong"

_ANSI = {
    STATUS_GIVEN: ("", ""),
    STATUS_CORRECT: ("\x1b[32m", "\x1b[0m"),
    STATUS_WRONG: ("\x1b[31m", "\x1b[0m"),
}

_FILL = {
    STATUS_GIVEN: "#ffffff",
    STATUS_CORRECT: "#b6e3b6",
    STATUS_WRONG: "#f2b8b5",
}

SERIES_COLORS = ("#4878cf", "#ee854a", "#6acc65", "#d65f5f", "#956cb4", "#8c613c")


@dataclass
class RenderedGrid:
    """A predicted grid plus a per-cell comparison status."""

    grid: np.ndarray
    status: list  # 9x9 nested lists of STATUS_* strings


def render_prediction(predicted, solution, mask) -> RenderedGrid:
    """Classify every cell: given cells pass through, predicted cells are
    marked correct or wrong against the solution."""
    predicted = as_grid(predicted)
    solution = as_grid(solution)
    mask = np.asarray(mask, dtype=bool).reshape(GRID_SIZE, GRID_SIZE)
    status = []
    for i in range(GRID_SIZE):
        row = []
        for j in range(GRID_SIZE):
            if not mask[i, j]:
                row.append(STATUS_GIVEN)
            elif predicted[i, j] == solution[i, j]:
                row.append(STATUS_CORRECT)
            else:
                row.append(STATUS_WRONG)
        status.append(row)
    return RenderedGrid(grid=predicted, status=status)


def grid_to_text(rendered: RenderedGrid, color: bool = True) -> str:
    """Terminal rendering; predicted cells are green (correct) or red (wrong)."""
    lines = []
    for i in range(GRID_SIZE):
        parts = []
        for j in range(GRID_SIZE):
            v = int(rendered.grid[i, j])
            ch = "." if v == 0 else str(v)
            if color:
                pre, post = _ANSI[rendered.status[i][j]]
                ch = f"{pre}{ch}{post}"
            parts.append(ch)
            if j in (2, 5):
                parts.append("|")
        lines.append(" ".join(parts))
        if i in (2, 5):
            lines.append("------+-------+------")
    return "\n".join(lines)


def grid_to_svg(rendered: RenderedGrid, cell: int = 36) -> str:
    """SVG rendering with status-colored cell backgrounds."""
    size = GRID_SIZE * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2}" '
        f'height="{size + 2}" viewBox="0 0 {size + 2} {size + 2}">',
        '<g transform="translate(1,1)">',
    ]
    for i in range(GRID_SIZE):
        for j in range(GRID_SIZE):
            fill = _FILL[rendered.status[i][j]]
            parts.append(
                f'<rect class="cell" data-status="{rendered.status[i][j]}" '
                f'x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="#999" stroke-width="1"/>'
            )
            v = int(rendered.grid[i, j])
            if v:
                parts.append(
                    f'<text x="{j * cell + cell / 2}" y="{i * cell + cell * 0.7}" '
                    f'font-family="monospace" font-size="{cell * 0.55:.0f}" '
                    f'text-anchor="middle">{v}</text>'
                )
    for k in range(0, GRID_SIZE + 1, 3):
        w = 3
        parts.append(
            f'<line x1="{k * cell}" y1="0" x2="{k * cell}" y2="{size}" '
            f'stroke="#000" stroke-width="{w}"/>'
        )
        parts.append(
            f'<line x1="0" y1="{k * cell}" x2="{size}" y2="{k * cell}" '
            f'stroke="#000" stroke-width="{w}"/>'
        )
    parts.append("</g></svg>")
    return "\n".join(parts)


def comparison_chart(
    title: str,
    group_labels,
    series,
    y_label: str = "accuracy",
    style: str = "bars",
    width: int = 720,
    height: int = 420,
) -> str:
    """Grouped comparison chart as an SVG string.

    ``series`` is a list of (label, values) pairs, values aligned with
    ``group_labels``.  ``style`` is "bars" (grouped bars, default) or
    "lines" (one polyline per series).  The y axis is fixed to [0, 1].
    """
    if style not in ("bars", "lines"):
        raise ValueError(f"unknown chart style: {style!r}")
    margin_l, margin_r, margin_t, margin_b = 60, 160, 40, 50
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    n_groups = len(group_labels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{margin_l + plot_w / 2}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]

    def ypix(v: float) -> float:
        return margin_t + plot_h * (1.0 - v)

    def xcenter(g: int) -> float:
        return margin_l + plot_w * (g + 0.5) / n_groups

    for tick in np.linspace(0.0, 1.0, 6):
        y = ypix(tick)
        parts.append(
            f'<line x1="{margin_l}" y1="{y:.1f}" x2="{margin_l + plot_w}" '
            f'y2="{y:.1f}" stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{margin_l - 8}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.1f}</text>'
        )
    parts.append(
        f'<text x="16" y="{margin_t + plot_h / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {margin_t + plot_h / 2})">{escape(y_label)}</text>'
    )
    for g, label in enumerate(group_labels):
        parts.append(
            f'<text x="{xcenter(g):.1f}" y="{margin_t + plot_h + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{escape(str(label))}</text>"
        )

    n_series = max(1, len(series))
    group_w = plot_w / max(1, n_groups)
    bar_w = group_w * 0.8 / n_series
    for s, (label, values) in enumerate(series):
        color = SERIES_COLORS[s % len(SERIES_COLORS)]
        if style == "bars":
            for g, v in enumerate(values):
                v = min(max(float(v), 0.0), 1.0)
                x = xcenter(g) - group_w * 0.4 + s * bar_w
                parts.append(
                    f'<rect class="bar" data-group="{escape(str(group_labels[g]))}" '
                    f'data-series="{escape(str(label))}" x="{x:.1f}" '
                    f'y="{ypix(v):.1f}" width="{bar_w:.1f}" '
                    f'height="{plot_h * v:.1f}" fill="{color}"/>'
                )
        else:
            points = " ".join(
                f"{xcenter(g):.1f},{ypix(min(max(float(v), 0.0), 1.0)):.1f}"
                for g, v in enumerate(values)
            )
            parts.append(
                f'<polyline class="series" data-series="{escape(str(label))}" '
                f'points="{points}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
            for g, v in enumerate(values):
                parts.append(
                    f'<circle class="point" data-group="{escape(str(group_labels[g]))}" '
                    f'data-series="{escape(str(label))}" cx="{xcenter(g):.1f}" '
                    f'cy="{ypix(min(max(float(v), 0.0), 1.0)):.1f}" r="3" fill="{color}"/>'
                )
        ly = margin_t + 16 + 18 * s
        lx = margin_l + plot_w + 14
        parts.append(
            f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{lx + 18}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">{escape(str(label))}</text>'
        )
    x_axis_y = ypix(0.0)
    parts.append(
        f'<line x1="{margin_l}" y1="{x_axis_y:.1f}" x2="{margin_l + plot_w}" '
        f'y2="{x_axis_y:.1f}" stroke="#000" stroke-width="1"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts)
