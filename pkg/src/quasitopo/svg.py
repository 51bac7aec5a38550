"""Self-contained SVG charts: band scatter, bar chart, heatmap.

No plotting library is involved; each function returns the SVG text and
optionally writes it. ``timestamp`` (a string) is embedded as metadata
when given, and is the only field that varies between identical runs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

WIDTH = 900
HEIGHT = 560
MARGIN = {"left": 80, "right": 30, "top": 60, "bottom": 70}

BULK = "#9a9a9a"
LEFT = "#d62728"
RIGHT = "#1f77b4"
BAR = "#f2f2f2"
BAR_STROKE = "#333333"
INPUT = "#d62728"


def _escape(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _f(x: float) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    ticks = []
    value = start
    while value <= hi + 1e-12 * step:
        ticks.append(round(float(value), 10))
        value += step
    return ticks


class _Canvas:
    def __init__(self, title: str, x_label: str, y_label: str, x_range, y_range,
                 annotations: Sequence[str] = (), timestamp: str | None = None):
        self.parts: list[str] = []
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y1 + 0.5
        self.left = MARGIN["left"]
        self.right = WIDTH - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = HEIGHT - MARGIN["bottom"]
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">'
        )
        if timestamp is not None:
            self.parts.append(f"<metadata>generated {_escape(timestamp)}</metadata>")
        self.parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self.parts.append(
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{_escape(title)}</text>'
        )
        if annotations:
            self.parts.append(
                f'<text x="{WIDTH / 2}" y="44" text-anchor="middle" fill="#555">'
                f"{_escape('  '.join(annotations))}</text>"
            )
        self.x_label, self.y_label = x_label, y_label

    def px(self, x):
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y):
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def axes(self, x_ticks=None, y_ticks=None):
        p = self.parts
        p.append(
            f'<rect x="{self.left}" y="{self.top}" width="{self.right - self.left}" '
            f'height="{self.bottom - self.top}" fill="none" stroke="#000"/>'
        )
        for x in (x_ticks if x_ticks is not None else _nice_ticks(self.x0, self.x1)):
            xp = _f(self.px(x))
            p.append(f'<line x1="{xp}" y1="{self.bottom}" x2="{xp}" y2="{self.bottom + 5}" stroke="#000"/>')
            p.append(f'<text x="{xp}" y="{self.bottom + 18}" text-anchor="middle">{x:g}</text>')
        for y in (y_ticks if y_ticks is not None else _nice_ticks(self.y0, self.y1)):
            yp = _f(self.py(y))
            p.append(f'<line x1="{self.left - 5}" y1="{yp}" x2="{self.left}" y2="{yp}" stroke="#000"/>')
            p.append(f'<text x="{self.left - 8}" y="{yp}" text-anchor="end" dominant-baseline="middle">{y:g}</text>')
        p.append(
            f'<text x="{(self.left + self.right) / 2}" y="{HEIGHT - 25}" '
            f'text-anchor="middle">{_escape(self.x_label)}</text>'
        )
        cy = (self.top + self.bottom) / 2
        p.append(
            f'<text x="20" y="{cy}" text-anchor="middle" '
            f'transform="rotate(-90 20 {cy})">{_escape(self.y_label)}</text>'
        )

    def legend(self, entries):
        x = self.right - 150
        y = self.top + 14
        self.parts.append(
            f'<rect x="{x - 10}" y="{self.top + 2}" width="150" height="{16 * len(entries) + 6}" '
            'fill="white" fill-opacity="0.9" stroke="#ccc"/>'
        )
        for label, color in entries:
            self.parts.append(f'<circle cx="{x}" cy="{y - 4}" r="4" fill="{color}"/>')
            self.parts.append(f'<text x="{x + 10}" y="{y}">{_escape(label)}</text>')
            y += 16

    def finish(self, path: Path | None) -> str:
        self.parts.append("</svg>")
        text = "\n".join(self.parts) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def band_scatter(phi_grid, energies, left_mask, right_mask, path=None, *,
                 title="Spectrum versus modulation phase", annotations=(), timestamp=None) -> str:
    """Energy vs phi/pi; in-gap edge modes coloured by side."""
    phi_pi = np.asarray(phi_grid) / np.pi
    energies = np.asarray(energies)
    pad = 0.05 * (energies.max() - energies.min() or 1.0)
    c = _Canvas(title, "phi / pi", "energy", (phi_pi.min(), phi_pi.max()),
                (energies.min() - pad, energies.max() + pad), annotations, timestamp)
    c.axes()
    for mask, color in ((~(left_mask | right_mask), BULK), (left_mask, LEFT), (right_mask, RIGHT)):
        radius = 1.2 if color == BULK else 2.0
        rows, cols = np.nonzero(mask)
        c.parts.append(f'<g fill="{color}">')
        c.parts.extend(
            f'<circle cx="{_f(c.px(phi_pi[i]))}" cy="{_f(c.py(energies[i, m]))}" r="{radius}"/>'
            for i, m in zip(rows, cols)
        )
        c.parts.append("</g>")
    c.legend([("bulk", BULK), ("left edge mode", LEFT), ("right edge mode", RIGHT)])
    return c.finish(path)


def bar_chart(values, path=None, *, highlight: int | None = None, title="Output distribution",
              x_label="site", y_label="probability", annotations=(), timestamp=None) -> str:
    """One bar per site (1-based); ``highlight`` marks the input site."""
    values = np.asarray(values, dtype=float)
    n = values.size
    top = max(float(values.max()), 1e-12) * 1.1
    c = _Canvas(title, x_label, y_label, (0.5, n + 0.5), (0.0, top), annotations, timestamp)
    x_ticks = sorted({1, n, *[k for k in _nice_ticks(1, n) if 1 <= k <= n and k == int(k)]})
    c.axes(x_ticks=x_ticks)
    width = (c.right - c.left) / n
    c.parts.append(f'<g fill="{BAR}" stroke="{BAR_STROKE}" stroke-width="0.6">')
    for k, v in enumerate(values, start=1):
        x = c.px(k - 0.5)
        y = c.py(v)
        c.parts.append(
            f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(width)}" height="{_f(c.bottom - y)}"/>'
        )
    c.parts.append("</g>")
    if highlight is not None:
        x = _f(c.px(highlight))
        c.parts.append(
            f'<path d="M {x} {c.top - 2} l -5 -10 h 10 z" fill="{INPUT}"/>'
        )
    return c.finish(path)


def _heat_color(v: float) -> str:
    # white -> dark blue
    v = min(max(v, 0.0), 1.0)
    r = int(round(255 * (1 - v) + 8 * v))
    g = int(round(255 * (1 - v) + 48 * v))
    b = int(round(255 * (1 - v) + 107 * v))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(energy_grid, density, path=None, *, title="Local density of states",
            annotations=(), timestamp=None, max_rows: int = 240) -> str:
    """Energy (vertical) by site (horizontal); colour is density / max, sqrt-scaled."""
    energy_grid = np.asarray(energy_grid)
    density = np.asarray(density)
    stride = max(1, int(np.ceil(len(energy_grid) / max_rows)))
    energies = energy_grid[::stride]
    dens = density[::stride]
    n_sites = dens.shape[1]
    peak = float(dens.max()) or 1.0
    c = _Canvas(title, "site", "energy", (0.5, n_sites + 0.5),
                (float(energy_grid[0]), float(energy_grid[-1])), annotations, timestamp)
    cell_w = (c.right - c.left) / n_sites
    cell_h = (c.bottom - c.top) / len(energies)
    c.parts.append('<g shape-rendering="crispEdges">')
    for e in range(len(energies)):
        y = c.bottom - (e + 1) * cell_h
        for n in range(n_sites):
            value = np.sqrt(dens[e, n] / peak)
            if value < 0.02:
                continue
            c.parts.append(
                f'<rect x="{_f(c.left + n * cell_w)}" y="{_f(y)}" width="{_f(cell_w + 0.3)}" '
                f'height="{_f(cell_h + 0.3)}" fill="{_heat_color(value)}"/>'
            )
    c.parts.append("</g>")
    c.axes(x_ticks=sorted({1, n_sites}))
    return c.finish(path)
