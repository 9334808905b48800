"""SVG output: match connector plots and similarity-matrix grids."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .matching import MatchSet
from .signal import Signal

PLOT_WIDTH = 1000.0
PANEL_HEIGHT = 150.0
MARGIN = 20.0
GAP = 60.0


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Panel:
    def __init__(self, signal: Signal, top: float, px_per_sample: float):
        x = signal.samples
        lo, hi = float(x.min()), float(x.max())
        self.x = x
        self.lo = lo
        self.span = hi - lo if hi > lo else 1.0
        self.top = top
        self.px = px_per_sample

    def xy(self, pos) -> tuple[float, float]:
        pos = np.asarray(pos)
        y = self.top + PANEL_HEIGHT * (1.0 - (self.x[pos] - self.lo) / self.span)
        return MARGIN + pos * self.px, y

    def polyline(self, css: str) -> str:
        xs, ys = self.xy(np.arange(self.x.size))
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs, ys))
        return f'<polyline class="{css}" fill="none" stroke="black" stroke-width="1" points="{pts}"/>'


def match_svg(pattern: Signal, query: Signal, matches: MatchSet,
              pattern_positions, query_positions) -> str:
    """Query drawn above the pattern, one connector per inlier.

    Both signals share the horizontal scale, so an identity time map gives
    vertical connectors.
    """
    n_max = max(len(pattern), len(query))
    px = PLOT_WIDTH / max(n_max - 1, 1)
    upper = _Panel(query, MARGIN, px)
    lower = _Panel(pattern, MARGIN + PANEL_HEIGHT + GAP, px)
    width = PLOT_WIDTH + 2 * MARGIN
    height = 2 * PANEL_HEIGHT + GAP + 2 * MARGIN
    pp = np.asarray(pattern_positions, dtype=np.int64)
    qp = np.asarray(query_positions, dtype=np.int64)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        '<rect width="100%" height="100%" fill="white"/>',
        upper.polyline("query"),
        lower.polyline("pattern"),
    ]
    for c in matches.inliers:
        x1, y1 = lower.xy(pp[c.pattern_idx])
        x2, y2 = upper.xy(qp[c.query_idx])
        parts.append(
            f'<line class="match" x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="red" stroke-width="1"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_match_svg(pattern: Signal, query: Signal, matches: MatchSet, out,
                     pattern_positions, query_positions) -> None:
    from .files import write_atomic

    write_atomic(out, match_svg(pattern, query, matches, pattern_positions, query_positions))


def matrix_svg(matrix, row_labels, cell: float = 14.0) -> str:
    """Grayscale grid, one row per class; white marks the likeliest class."""
    m = np.clip(np.nan_to_num(np.asarray(matrix, dtype=np.float64)), 0.0, 1.0)
    rows, cols = m.shape
    label_w = 8.0 * max((len(str(r)) for r in row_labels), default=1) + 10.0
    width = label_w + cols * cell + MARGIN
    height = rows * cell + 2 * MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}">',
        '<rect width="100%" height="100%" fill="#808080"/>',
    ]
    for i, label in enumerate(row_labels):
        y = MARGIN + i * cell
        parts.append(f'<text x="2" y="{_fmt(y + cell * 0.8)}" font-size="10">{escape(str(label))}</text>')
        for j in range(cols):
            g = int(round(255 * m[i, j]))
            parts.append(
                f'<rect class="cell" x="{_fmt(label_w + j * cell)}" y="{_fmt(y)}" '
                f'width="{_fmt(cell)}" height="{_fmt(cell)}" fill="rgb({g},{g},{g})"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
