"""Plain SVG output for fraction heatmaps and level-flow plots."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

# viridis anchor colours at 0, .25, .5, .75, 1
_STOPS = np.array([
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
], dtype=float)


def color(value: float) -> str:
    if not math.isfinite(value):
        return "#cccccc"
    x = min(max(value, 0.0), 1.0) * (len(_STOPS) - 1)
    i = min(int(x), len(_STOPS) - 2)
    rgb = _STOPS[i] + (x - i) * (_STOPS[i + 1] - _STOPS[i])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


class _Doc:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = []

    def rect(self, x, y, w, h, fill, extra=""):
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" fill="{fill}"{extra}/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#000", extra=""):
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="{stroke}"{extra}/>'
        )

    def text(self, x, y, s, anchor="middle", size=12, extra=""):
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}"'
            f' font-family="sans-serif"{extra}>{escape(str(s))}</text>'
        )

    def polyline(self, pts, stroke, width=1.0):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{stroke}" stroke-width="{width}"/>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">'
        )
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>',
                          *self.parts, "</svg>", ""])


_AXIS_LABEL = {
    "mu0": "μ / μ₀",
    "mu0prime": "μ / μ₀′",
    "muTprime": "μ / μ_T′",
}


def heatmap(mu_over_mu0, t_grid, f, factors, scale: str, annotations: dict) -> str:
    """Gradient map of ``f[iT, imu]``: ``T`` horizontal (log), scaled ``mu`` vertical.

    ``factors[iT]`` converts ``mu/mu0`` to the chosen scale (``mu/scale = mu/mu0 / factor``).
    """
    mu = np.asarray(mu_over_mu0, dtype=float)
    ts = np.asarray(t_grid, dtype=float)
    f = np.asarray(f, dtype=float)
    W, H = 640, 480
    left, right, top, bottom = 70, 120, 50, 60
    pw, ph = W - left - right, H - top - bottom
    doc = _Doc(W, H)

    logt = np.log10(ts)
    if ts.size > 1:
        edges_t = np.concatenate([[logt[0] - (logt[1] - logt[0]) / 2],
                                  (logt[1:] + logt[:-1]) / 2,
                                  [logt[-1] + (logt[-1] - logt[-2]) / 2]])
    else:
        edges_t = np.array([logt[0] - 0.5, logt[0] + 0.5])
    tx = lambda v: left + (v - edges_t[0]) / (edges_t[-1] - edges_t[0]) * pw  # noqa: E731

    ymax = min(mu[-1] / fac for fac in factors) if mu[-1] > 0 else 1.0
    ymax = ymax if ymax > 0 else 1.0
    ty = lambda v: top + ph - min(max(v, 0.0), ymax) / ymax * ph  # noqa: E731

    if mu.size > 1:
        edges_mu = np.concatenate([[max(mu[0] - (mu[1] - mu[0]) / 2, 0.0)],
                                   (mu[1:] + mu[:-1]) / 2,
                                   [mu[-1]]])
    else:
        edges_mu = np.array([0.0, mu[0]])
    for i in range(ts.size):
        x0, x1 = tx(edges_t[i]), tx(edges_t[i + 1])
        for j in range(mu.size):
            y0 = edges_mu[j] / factors[i]
            y1 = edges_mu[j + 1] / factors[i]
            if y0 >= ymax:
                continue
            doc.rect(x0, ty(y1), x1 - x0, ty(y0) - ty(y1), color(f[i, j]),
                     ' shape-rendering="crispEdges"')

    # axes
    doc.line(left, top + ph, left + pw, top + ph)
    doc.line(left, top, left, top + ph)
    for d in range(int(math.floor(edges_t[0])), int(math.ceil(edges_t[-1])) + 1):
        if edges_t[0] <= d <= edges_t[-1]:
            doc.line(tx(d), top + ph, tx(d), top + ph + 5)
            doc.text(tx(d), top + ph + 18, f"{10.0 ** d:g}")
    for k in range(6):
        v = ymax * k / 5
        doc.line(left - 5, ty(v), left, ty(v))
        doc.text(left - 8, ty(v) + 4, f"{v:.3g}", anchor="end")
    doc.text(left + pw / 2, H - 15, "T")
    doc.text(18, top + ph / 2, _AXIS_LABEL.get(scale, scale),
             extra=f' transform="rotate(-90 18 {top + ph / 2:.2f})"')

    # colorbar
    cx, cw = left + pw + 25, 18
    n = 50
    for k in range(n):
        doc.rect(cx, top + ph * (1 - (k + 1) / n), cw, ph / n + 0.5, color((k + 0.5) / n))
    for v in (0.0, 0.5, 1.0):
        y = top + ph * (1 - v)
        doc.line(cx + cw, y, cx + cw + 4, y)
        doc.text(cx + cw + 7, y + 4, f"{v:g}", anchor="start")
    doc.text(cx + cw / 2, top - 8, "f")

    title = ", ".join(f"{k}={v}" for k, v in annotations.items())
    doc.text(W / 2, 25, title, size=13)
    return doc.render()


def level_flow(stage_coord, trajectories, real_mask, branch, window, n_stages,
               stage_labels, annotations: dict) -> str:
    """Real parts of the real levels along the path; complex stretches are left out."""
    traj = np.asarray(trajectories)
    W, H = 640, 480
    left, right, top, bottom = 70, 30, 50, 60
    pw, ph = W - left - right, H - top - bottom
    doc = _Doc(W, H)
    tx = lambda s: left + s / n_stages * pw  # noqa: E731
    ty = lambda e: top + ph / 2 - e / window * ph / 2  # noqa: E731
    colors = {1: "#c0392b", -1: "#2471a3", 0: "#7f8c8d"}

    inside = np.abs(traj.real) <= window
    for q in range(traj.shape[1]):
        seg = []
        for s in range(traj.shape[0]):
            if real_mask[s, q] and inside[s, q]:
                seg.append((tx(stage_coord[s]), ty(traj[s, q].real)))
            else:
                if len(seg) > 1:
                    doc.polyline(seg, colors.get(int(branch[q]), "#000"))
                seg = []
        if len(seg) > 1:
            doc.polyline(seg, colors.get(int(branch[q]), "#000"))

    doc.line(left, top + ph, left + pw, top + ph)
    doc.line(left, top, left, top + ph)
    for k in range(1, n_stages):
        doc.line(tx(k), top, tx(k), top + ph, "#555", ' stroke-dasharray="6,4"')
    for k, label in enumerate(stage_labels):
        doc.text(tx(k + 0.5), top + ph + 35, label)
        doc.text(tx(k), top + ph + 18, "start" if k == 0 else "")
    for v in (-window, 0.0, window):
        doc.line(left - 5, ty(v), left, ty(v))
        doc.text(left - 8, ty(v) + 4, f"{v:.3g}", anchor="end")
    doc.text(18, top + ph / 2, "Re E", extra=f' transform="rotate(-90 18 {top + ph / 2:.2f})"')
    title = ", ".join(f"{k}={v}" for k, v in annotations.items())
    doc.text(W / 2, 25, title, size=13)
    return doc.render()
