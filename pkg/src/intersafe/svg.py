"""Minimal deterministic SVG rendering for heatmaps and line plots.

CSV is the canonical output; these renderings exist so runs can be eyed
without external tooling.  Everything is emitted with fixed formatting,
so identical inputs give identical bytes.
"""

from __future__ import annotations

import numpy as np

CELL = 28
MARGIN_LEFT = 90
MARGIN_TOP = 46
MARGIN_BOTTOM = 34


def _f(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _heat_color(frac: float) -> str:
    """White -> amber -> dark red ramp."""
    frac = min(max(frac, 0.0), 1.0)
    if frac < 0.5:
        f = frac / 0.5
        r, g, b = 255, int(250 - 90 * f), int(245 - 190 * f)
    else:
        f = (frac - 0.5) / 0.5
        r, g, b = int(255 - 120 * f), int(160 - 130 * f), int(55 - 25 * f)
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(row_labels: list[str], col_labels: list[str], values: np.ndarray,
                title: str, markers: dict[float, str] | None = None) -> str:
    """Grid heatmap; ``markers`` maps fractional column positions to glyph
    labels (game start/end flags along the time axis)."""
    values = np.asarray(values, dtype=np.float64)
    n_rows, n_cols = values.shape
    vmax = float(values.max()) if values.size and values.max() > 0 else 1.0
    width = MARGIN_LEFT + n_cols * CELL + 20
    height = MARGIN_TOP + n_rows * CELL + MARGIN_BOTTOM
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="11">',
        f'<text x="{MARGIN_LEFT}" y="18" font-size="13">{title}</text>',
    ]
    for r in range(n_rows):
        y = MARGIN_TOP + r * CELL
        parts.append(f'<text x="{MARGIN_LEFT - 8}" y="{y + CELL - 9}" '
                     f'text-anchor="end">{row_labels[r]}</text>')
        for c in range(n_cols):
            x = MARGIN_LEFT + c * CELL
            color = _heat_color(values[r, c] / vmax)
            parts.append(f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" '
                         f'fill="{color}" stroke="#cccccc"/>')
    y_axis = MARGIN_TOP + n_rows * CELL
    for c, label in enumerate(col_labels):
        x = MARGIN_LEFT + c * CELL
        parts.append(f'<text x="{x + 2}" y="{y_axis + 14}">{label}</text>')
    for frac, glyph in (markers or {}).items():
        x = MARGIN_LEFT + frac * n_cols * CELL
        parts.append(f'<circle cx="{_f(x)}" cy="{MARGIN_TOP - 12}" r="5" '
                     f'fill="#7a4f01"/>')
        parts.append(f'<text x="{_f(x + 8)}" y="{MARGIN_TOP - 8}">{glyph}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def lineplot_svg(series: list[dict], title: str, x_labels: list[str],
                 width: int = 640, height: int = 360) -> str:
    """Mean lines with shaded confidence bands.

    Each series dict: {label, mean, low, high, color}.
    """
    pad_l, pad_r, pad_t, pad_b = 56, 16, 40, 44
    plot_w = width - pad_l - pad_r
    plot_h = height - pad_t - pad_b
    n = max(len(s["mean"]) for s in series)
    vmax = max(max(s["high"]) for s in series) or 1.0

    def px(i: int) -> float:
        return pad_l + (i / max(n - 1, 1)) * plot_w

    def py(v: float) -> float:
        return pad_t + plot_h * (1.0 - v / vmax)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="11">',
        f'<text x="{pad_l}" y="20" font-size="13">{title}</text>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#999999"/>',
    ]
    for k, s in enumerate(series):
        color = s["color"]
        band = [f"{_f(px(i))},{_f(py(v))}" for i, v in enumerate(s["high"])]
        band += [f"{_f(px(i))},{_f(py(v))}"
                 for i, v in reversed(list(enumerate(s["low"])))]
        parts.append(f'<polygon points="{" ".join(band)}" fill="{color}" '
                     f'fill-opacity="0.18" stroke="none"/>')
        line = " ".join(f"{_f(px(i))},{_f(py(v))}" for i, v in enumerate(s["mean"]))
        parts.append(f'<polyline points="{line}" fill="none" stroke="{color}" '
                     f'stroke-width="2"/>')
        parts.append(f'<text x="{pad_l + 8}" y="{pad_t + 16 + 14 * k}" '
                     f'fill="{color}">{s["label"]}</text>')
    for i, label in enumerate(x_labels):
        parts.append(f'<text x="{_f(px(i) - 6)}" y="{height - pad_b + 16}">{label}</text>')
    parts.append(f'<text x="{pad_l - 44}" y="{pad_t + 12}">{_f(vmax)}</text>')
    parts.append(f'<text x="{pad_l - 44}" y="{pad_t + plot_h}">0</text>')
    parts.append("</svg>")
    return "\n".join(parts)


PALETTE = ("#b2182b", "#2166ac", "#4dac26", "#8c510a", "#762a83", "#35978f")
