"""Minimal deterministic SVG scatter/line figures for run reports.

No fonts beyond a generic family, no external references, no
randomness: every figure is a self-contained static file whose bytes
depend only on the data handed in.  Numeric formatting is pinned to
``%.6g`` so identical data always renders identical markup.
"""

import math

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 76, 24, 44, 58
_BG = "#ffffff"
_FG = "#222222"
_GRID = "#dddddd"


def _fmt(x) -> str:
    x = float(x)
    if x == 0:
        x = 0.0
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, count: int = 5):
    if not (hi > lo):
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / count))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if span / (step * m) <= count:
            step *= m
            break
    out = []
    t = math.ceil(lo / step) * step
    while t <= hi + 1e-9 * span:
        out.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return out


class Figure:
    """One x/y chart with optional log10 axes, scatter and line series."""

    def __init__(self, title: str, xlabel: str, ylabel: str,
                 log_x: bool = False, log_y: bool = False):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.log_x = log_x
        self.log_y = log_y
        self._series = []   # (kind, points, color, size)

    def scatter(self, points, color: str = "#1f6fb2", size: float = 3.0):
        self._series.append(("scatter", list(points), color, size))

    def line(self, points, color: str = "#b23b1f", size: float = 1.5):
        self._series.append(("line", list(points), color, size))

    # -- internals ----------------------------------------------------------

    def _mapped(self, points):
        out = []
        for x, y in points:
            x, y = float(x), float(y)
            if self.log_x:
                if x <= 0:
                    continue
                x = math.log10(x)
            if self.log_y:
                if y <= 0:
                    continue
                y = math.log10(y)
            out.append((x, y))
        return out

    def render(self) -> str:
        mapped = [(k, self._mapped(p), c, s) for k, p, c, s in self._series]
        xs = [x for _, pts, _, _ in mapped for x, _ in pts]
        ys = [y for _, pts, _, _ in mapped for _, y in pts]
        if not xs:
            xs, ys = [0.0, 1.0], [0.0, 1.0]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        padx, pady = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        x0, x1 = x0 - padx, x1 + padx
        y0, y1 = y0 - pady, y1 + pady
        iw = _W - _ML - _MR
        ih = _H - _MT - _MB

        def px(x):
            return _ML + (x - x0) / (x1 - x0) * iw

        def py(y):
            return _MT + (y1 - y) / (y1 - y0) * ih

        def tick_text(t, log):
            return f"1e{_fmt(t)}" if log else _fmt(t)

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
            f'height="{_H}" viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="{_BG}"/>',
            f'<text x="{_W // 2}" y="26" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15" fill="{_FG}">'
            f'{self.title}</text>',
        ]
        for t in _ticks(x0 + padx, x1 - padx):
            X = _fmt(px(t))
            parts.append(f'<line x1="{X}" y1="{_MT}" x2="{X}" '
                         f'y2="{_H - _MB}" stroke="{_GRID}"/>')
            parts.append(f'<text x="{X}" y="{_H - _MB + 18}" '
                         f'text-anchor="middle" font-family="sans-serif" '
                         f'font-size="11" fill="{_FG}">'
                         f'{tick_text(t, self.log_x)}</text>')
        for t in _ticks(y0 + pady, y1 - pady):
            Y = _fmt(py(t))
            parts.append(f'<line x1="{_ML}" y1="{Y}" x2="{_W - _MR}" '
                         f'y2="{Y}" stroke="{_GRID}"/>')
            parts.append(f'<text x="{_ML - 8}" y="{Y}" text-anchor="end" '
                         f'dominant-baseline="middle" '
                         f'font-family="sans-serif" font-size="11" '
                         f'fill="{_FG}">{tick_text(t, self.log_y)}</text>')
        parts.append(f'<rect x="{_ML}" y="{_MT}" width="{iw}" '
                     f'height="{ih}" fill="none" stroke="{_FG}"/>')
        parts.append(f'<text x="{_ML + iw // 2}" y="{_H - 12}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12" fill="{_FG}">{self.xlabel}</text>')
        parts.append(f'<text x="20" y="{_MT + ih // 2}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12" fill="{_FG}" '
                     f'transform="rotate(-90 20 {_MT + ih // 2})">'
                     f'{self.ylabel}</text>')
        for kind, pts, color, size in mapped:
            if kind == "line" and len(pts) >= 2:
                coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}"
                                  for x, y in pts)
                parts.append(f'<polyline points="{coords}" fill="none" '
                             f'stroke="{color}" stroke-width="{_fmt(size)}"/>')
            else:
                for x, y in pts:
                    parts.append(f'<circle cx="{_fmt(px(x))}" '
                                 f'cy="{_fmt(py(y))}" r="{_fmt(size)}" '
                                 f'fill="{color}"/>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
