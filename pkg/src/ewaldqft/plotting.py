"""Deterministic SVG rendering of experiment CSVs.

Hand-rolled so identical CSV input yields byte-identical SVG output; the
CSV stays the single source of truth and the chart is a pure view.
"""

from __future__ import annotations

import math
import statistics

from . import bench

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class SchemaMismatch(ValueError):
    """CSV columns do not match the requested plot kind."""


def _series_for(kind: str):
    if kind == bench.BREAKDOWN:
        return ("frac_short", "frac_long", "frac_self", "frac_dip"), \
            "number of charges N", "|term| / sum of |terms|"
    if kind == bench.TIMING:
        return ("t_classical_ns", "t_q_ns", "t_q_gates_ns"), \
            "number of charges N", "wall time (ns)"
    if kind == bench.ERROR:
        return ("err_classical", "err_qexact", "err_qsampled"), \
            "number of charges N", "relative error"
    raise ValueError(f"unknown plot kind {kind!r}")


def _mean_by_n(rows, column):
    groups: dict = {}
    for row in rows:
        groups.setdefault(int(row["N"]), []).append(float(row[column]))
    return sorted((n, statistics.mean(vals)) for n, vals in groups.items())


def _log_range(values):
    positive = [v for v in values if v > 0]
    if not positive:
        positive = [1.0]
    lo = math.floor(math.log10(min(positive)))
    hi = math.ceil(math.log10(max(positive)))
    if hi == lo:
        hi += 1
    return lo, hi


def _x_pos(n, n_lo, n_hi):
    span = math.log10(n_hi) - math.log10(n_lo) if n_hi > n_lo else 1.0
    frac = (math.log10(n) - math.log10(n_lo)) / span
    return MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R)


def _y_pos(v, lo, hi):
    frac = (math.log10(v) - lo) / (hi - lo)
    return HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)


def render_svg(meta: dict, rows, kind: str) -> str:
    columns, x_label, y_label = _series_for(kind)
    if not rows:
        raise SchemaMismatch("no data rows")
    for col in columns + ("N",):
        if col not in rows[0]:
            raise SchemaMismatch(f"column {col!r} missing for {kind} plot")

    series = {col: _mean_by_n(rows, col) for col in columns}
    n_values = sorted({n for pts in series.values() for n, _ in pts})
    n_lo, n_hi = max(min(n_values), 1), max(max(n_values), 2)
    y_all = [v for pts in series.values() for _, v in pts]
    y_lo, y_hi = _log_range(y_all)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" '
        f'width="{WIDTH - MARGIN_L - MARGIN_R}" '
        f'height="{HEIGHT - MARGIN_T - MARGIN_B}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]

    # decade gridlines and tick labels on the y axis
    for decade in range(y_lo, y_hi + 1):
        y = _y_pos(10.0 ** decade, y_lo, y_hi)
        parts.append(f'<line x1="{MARGIN_L}" y1="{y:.2f}" '
                     f'x2="{WIDTH - MARGIN_R}" y2="{y:.2f}" '
                     'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.2f}" '
                     'text-anchor="end" font-size="11" '
                     f'font-family="monospace">1e{decade}</text>')
    for n in n_values:
        x = _x_pos(n, n_lo, n_hi)
        parts.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN_B + 16}" '
                     'text-anchor="middle" font-size="11" '
                     f'font-family="monospace">{n}</text>')

    for idx, col in enumerate(columns):
        color = PALETTE[idx % len(PALETTE)]
        points = [(n, v) for n, v in series[col] if v > 0]
        if points:
            coords = " ".join(
                f"{_x_pos(n, n_lo, n_hi):.2f},{_y_pos(v, y_lo, y_hi):.2f}"
                for n, v in points)
            parts.append(f'<polyline points="{coords}" fill="none" '
                         f'stroke="{color}" stroke-width="2"/>')
        ly = MARGIN_T + 16 + 14 * idx
        parts.append(f'<rect x="{WIDTH - MARGIN_R - 130}" y="{ly - 8}" '
                     f'width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{WIDTH - MARGIN_R - 115}" y="{ly + 1}" '
                     f'font-size="11" font-family="monospace">{col}</text>')

    if kind == bench.TIMING:
        crossover = bench.crossover_point(rows)
        if crossover is not None:
            x = _x_pos(crossover, n_lo, n_hi)
            parts.append(f'<line x1="{x:.2f}" y1="{MARGIN_T}" x2="{x:.2f}" '
                         f'y2="{HEIGHT - MARGIN_B}" stroke="#999999" '
                         'stroke-width="1" stroke-dasharray="4,3"/>')
            parts.append(f'<text x="{x + 4:.2f}" y="{MARGIN_T + 12}" '
                         'font-size="11" font-family="monospace">'
                         f'crossover N*={crossover}</text>')

    parts.append(f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2:.2f}" '
                 f'y="{HEIGHT - 12}" text-anchor="middle" font-size="12" '
                 f'font-family="monospace">{x_label}</text>')
    parts.append(f'<text x="16" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.2f}" '
                 'text-anchor="middle" font-size="12" font-family="monospace" '
                 f'transform="rotate(-90 16 {(MARGIN_T + HEIGHT - MARGIN_B) / 2:.2f})">'
                 f'{y_label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plot(csv_path, kind: str, out_path) -> None:
    """Render a CSV produced by the sweep runners into a static SVG."""
    meta, rows = bench.read_csv(csv_path)
    svg = render_svg(meta, rows, kind)
    with open(out_path, "w") as handle:
        handle.write(svg)
