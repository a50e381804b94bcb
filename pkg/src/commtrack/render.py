"""Plain SVG figures: grayscale heatmaps and grouped bar charts."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

log = logging.getLogger(__name__)

CELL = 18
LABEL_W = 90
HEADER_H = 70


def _gray(value: float) -> str:
    # 0 -> white, 1 -> black
    v = float(np.clip(value, 0.0, 1.0))
    level = int(round(255 * (1.0 - v)))
    return f"#{level:02x}{level:02x}{level:02x}"


def heatmap_svg(matrix, row_labels: Sequence[str], col_labels: Sequence[str], title: str = "") -> str | None:
    """SVG heatmap of values in [0, 1]; darker cells mean higher values."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.size == 0:
        return None
    n_rows, n_cols = mat.shape
    width = LABEL_W + n_cols * CELL + 10
    height = HEADER_H + n_rows * CELL + 10
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<title>{escape(title)}</title>',
    ]
    for j, lab in enumerate(col_labels):
        x = LABEL_W + j * CELL + CELL / 2
        out.append(f'<text class="col-label" x="{x:g}" y="{HEADER_H - 4}" '
                   f'transform="rotate(-60 {x:g} {HEADER_H - 4})">{escape(str(lab))}</text>')
    for i, lab in enumerate(row_labels):
        y = HEADER_H + i * CELL
        out.append(f'<text class="row-label" x="{LABEL_W - 4}" y="{y + CELL * 0.7:g}" '
                   f'text-anchor="end">{escape(str(lab))}</text>')
        for j in range(n_cols):
            v = mat[i, j]
            out.append(f'<rect class="cell" x="{LABEL_W + j * CELL}" y="{y}" width="{CELL}" height="{CELL}" '
                       f'fill="{_gray(v)}" stroke="#999" stroke-width="0.5">'
                       f'<title>{escape(str(row_labels[i]))} / {escape(str(col_labels[j]))}: {v:.4f}</title></rect>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_heatmap(report, metric: str, path, origins=None) -> Path | None:
    """Write the aligned ``metric`` matrix of an evaluation report as SVG.

    Returns ``None`` (and writes nothing) when the matrix is empty.
    """
    origins = report.aligned if origins is None else list(origins)
    if not origins or not report.methods:
        log.warning("empty %s matrix; no heatmap written", metric)
        return None
    mat = report.matrix(metric, origins)
    svg = heatmap_svg(mat, report.methods, [f"{t}:{q}" for t, q in origins],
                      title=f"{report.dataset} {metric.upper()}")
    path = Path(path)
    path.write_text(svg)
    return path


PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")


def bar_chart_svg(counts: Mapping[str, Mapping[str, int]], title: str = "") -> str:
    """Grouped bars: outer keys are datasets, inner keys methods."""
    datasets = list(counts)
    methods: list[str] = []
    for d in datasets:
        for m in counts[d]:
            if m not in methods:
                methods.append(m)
    top = max([v for d in datasets for v in counts[d].values()] + [1])
    bar_w, gap, plot_h = 22, 18, 200
    left, bottom = 50, 40
    width = left + len(datasets) * (len(methods) * bar_w + gap) + 10
    height = plot_h + bottom + 30
    y0 = 20 + plot_h
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<title>{escape(title)}</title>',
        f'<line class="axis" x1="{left}" y1="20" x2="{left}" y2="{y0}" stroke="black"/>',
        f'<line class="axis" x1="{left}" y1="{y0}" x2="{width - 5}" y2="{y0}" stroke="black"/>',
        f'<text x="{left - 4}" y="{y0}" text-anchor="end">0</text>',
        f'<text x="{left - 4}" y="24" text-anchor="end">{top}</text>',
    ]
    x = left + gap / 2
    for d in datasets:
        for k, m in enumerate(methods):
            v = counts[d].get(m, 0)
            h = plot_h * v / top
            out.append(f'<rect class="bar" x="{x:g}" y="{y0 - h:g}" width="{bar_w - 2}" height="{h:g}" '
                       f'fill="{PALETTE[k % len(PALETTE)]}"><title>{escape(d)} / {escape(m)}: {v}</title></rect>')
            out.append(f'<text class="bar-label" x="{x + bar_w / 2 - 1:g}" y="{y0 - h - 3:g}" '
                       f'text-anchor="middle">{v}</text>')
            x += bar_w
        group_w = len(methods) * bar_w
        out.append(f'<text class="group-label" x="{x - group_w / 2:g}" y="{y0 + 14}" '
                   f'text-anchor="middle">{escape(d)}</text>')
        x += gap
    for k, m in enumerate(methods):
        out.append(f'<text class="legend" x="{left + 5 + k * 80}" y="{height - 6}" '
                   f'fill="{PALETTE[k % len(PALETTE)]}">{escape(m)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_quantity_chart(reports, path) -> Path:
    """Bar chart of evolving-community counts per (dataset, method)."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    counts = {r.dataset: dict(r.quantities) for r in reports}
    if not any(counts.values()):
        raise ValueError("no method counts to draw")
    path = Path(path)
    path.write_text(bar_chart_svg(counts, title="Tracking quantities"))
    return path
