"""Tiny hand-rolled SVG emitter: enough shapes for map plots, trajectory
plots and region heat maps without pulling in a plotting stack."""

from __future__ import annotations

from xml.sax.saxutils import escape


class Axes:
    """A data-coordinate viewport inside the canvas."""

    def __init__(self, canvas, x, y, w, h, xlim, ylim):
        self.canvas = canvas
        self.x, self.y, self.w, self.h = x, y, w, h
        self.xlim, self.ylim = xlim, ylim

    def _px(self, xd, yd):
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        px = self.x + (xd - x0) / (x1 - x0) * self.w
        py = self.y + self.h - (yd - y0) / (y1 - y0) * self.h
        return px, py

    def frame(self, label=""):
        c = self.canvas
        c.add(f'<rect x="{self.x}" y="{self.y}" width="{self.w}" height="{self.h}" '
              f'fill="none" stroke="#333333"/>')
        if label:
            c.add(f'<text x="{self.x + 6}" y="{self.y + 16}" font-size="13" '
                  f'font-family="monospace">{escape(label)}</text>')

    def line(self, x0, y0, x1, y1, stroke="#000000", dash=None):
        p0 = self._px(x0, y0)
        p1 = self._px(x1, y1)
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.canvas.add(f'<line x1="{p0[0]:.2f}" y1="{p0[1]:.2f}" x2="{p1[0]:.2f}" '
                        f'y2="{p1[1]:.2f}" stroke="{stroke}"{d}/>')

    def polyline(self, pts, stroke="#000000", width=1.2):
        if len(pts) == 1:
            p = self._px(*pts[0])
            self.canvas.add(f'<circle cx="{p[0]:.2f}" cy="{p[1]:.2f}" r="1.5" fill="{stroke}"/>')
            return
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in (self._px(*pt) for pt in pts))
        self.canvas.add(f'<polyline points="{coords}" fill="none" stroke="{stroke}" '
                        f'stroke-width="{width}"/>')

    def vtick(self, xd, stroke="#cc4444"):
        p0 = self._px(xd, self.ylim[0])
        p1 = self._px(xd, self.ylim[1])
        self.canvas.add(f'<line x1="{p0[0]:.2f}" y1="{p0[1]:.2f}" x2="{p1[0]:.2f}" '
                        f'y2="{p1[1]:.2f}" stroke="{stroke}" stroke-width="0.6" '
                        f'stroke-dasharray="2,3"/>')

    def cell(self, x0, y0, x1, y1, fill):
        p0 = self._px(x0, y1)
        p1 = self._px(x1, y0)
        self.canvas.add(f'<rect x="{p0[0]:.2f}" y="{p0[1]:.2f}" '
                        f'width="{p1[0] - p0[0]:.2f}" height="{p1[1] - p0[1]:.2f}" '
                        f'fill="{fill}" stroke="none"/>')

    def text(self, xd, yd, s, size=12):
        p = self._px(xd, yd)
        self.canvas.add(f'<text x="{p[0]:.2f}" y="{p[1]:.2f}" font-size="{size}" '
                        f'font-family="monospace">{escape(s)}</text>')


class SvgCanvas:
    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.parts = []

    def add(self, fragment: str):
        self.parts.append(fragment)

    def axes(self, x, y, w, h, xlim, ylim) -> Axes:
        return Axes(self, x, y, w, h, xlim, ylim)

    def text(self, x, y, s, size=12):
        self.add(f'<text x="{x}" y="{y}" font-size="{size}" '
                 f'font-family="monospace">{escape(s)}</text>')

    def rect(self, x, y, w, h, fill, stroke="none"):
        self.add(f'<rect x="{x}" y="{y}" width="{w}" height="{h}" '
                 f'fill="{fill}" stroke="{stroke}"/>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )
