"""Minimal self-contained SVG charts (line charts and labelled scatter plots)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=40, bottom=55)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = mag * min((1, 2, 5, 10), key=lambda m: abs(m * mag - raw))
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        return MARGIN["left"] + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN["top"] + (1 - (np.asarray(y) - self.y0) / (self.y1 - self.y0)) * self.ph


def _axes(frame: _Frame, xlabel: str, ylabel: str, title: str) -> list:
    L, T = MARGIN["left"], MARGIN["top"]
    out = [
        f'<rect x="{L}" y="{T}" width="{frame.pw}" height="{frame.ph}" fill="none" stroke="#333"/>',
        f'<text x="{WIDTH / 2 - MARGIN["right"] / 2 + MARGIN["left"] / 2:.1f}" y="24" text-anchor="middle" '
        f'font-size="15">{escape(title)}</text>',
        f'<text x="{L + frame.pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>',
        f'<text x="18" y="{T + frame.ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {T + frame.ph / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(frame.x0, frame.x1):
        x = float(frame.px(t))
        out.append(f'<line x1="{x:.1f}" y1="{T + frame.ph}" x2="{x:.1f}" y2="{T + frame.ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{x:.1f}" y="{T + frame.ph + 19}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
    for t in _ticks(frame.y0, frame.y1):
        y = float(frame.py(t))
        out.append(f'<line x1="{L - 5}" y1="{y:.1f}" x2="{L}" y2="{y:.1f}" stroke="#333"/>')
        out.append(f'<text x="{L - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
    return out


def _legend(names) -> list:
    out = []
    x = WIDTH - MARGIN["right"] + 15
    for i, name in enumerate(names):
        y = MARGIN["top"] + 12 + 20 * i
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{x}" y="{y - 9}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{x + 18}" y="{y + 2}" font-size="12">{escape(str(name))}</text>')
    return out


def _document(body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>"]) + "\n"


def line_chart(series: dict, xlabel: str = "epoch", ylabel: str = "C(θ)", title: str = "") -> str:
    """One polyline per entry of ``series`` (name -> (xs, ys))."""
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    ys = ys[np.isfinite(ys)]
    ypad = 0.05 * (ys.max() - ys.min() or 1.0)
    frame = _Frame((xs.min(), xs.max()), (min(0.0, ys.min() - ypad), ys.max() + ypad))
    body = _axes(frame, xlabel, ylabel, title)
    for i, (name, (x, y)) in enumerate(series.items()):
        px, py = frame.px(np.asarray(x, dtype=float)), frame.py(np.asarray(y, dtype=float))
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py) if np.isfinite(b))
        body.append(f'<polyline fill="none" stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="1.8" points="{pts}"/>')
    body += _legend(series.keys())
    return _document(body)


def scatter(points, labels=None, title: str = "", xlabel: str = "x1", ylabel: str = "x2") -> str:
    """Scatter plot of 2-D points, one color per label."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or not len(points):
        raise ValueError(f"scatter needs a nonempty (N, 2) array, got shape {points.shape}")
    labels = np.zeros(len(points), dtype=int) if labels is None else np.asarray(labels, dtype=int)
    lo, hi = points.min(axis=0), points.max(axis=0)
    pad = 0.05 * np.maximum(hi - lo, 1e-9)
    frame = _Frame((lo[0] - pad[0], hi[0] + pad[0]), (lo[1] - pad[1], hi[1] + pad[1]))
    body = _axes(frame, xlabel, ylabel, title)
    classes = np.unique(labels)
    for c in classes:
        color = PALETTE[int(np.searchsorted(classes, c)) % len(PALETTE)]
        for x, y in points[labels == c]:
            body.append(f'<circle cx="{float(frame.px(x)):.2f}" cy="{float(frame.py(y)):.2f}" r="3" '
                        f'fill="{color}" fill-opacity="0.8"/>')
    body += _legend([f"cluster {c}" for c in classes])
    return _document(body)
