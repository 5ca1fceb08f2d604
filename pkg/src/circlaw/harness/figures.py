"""Deterministic figure emission: SVG 1.1 vector output plus CSV twins.

Three kinds: ``scatter`` (points over the unit circle), ``tessellation``
(cell-index raster as horizontal pixel runs, with a runs CSV), and
``potential_surface`` (height-grid CSV of the empirical, cutoff, and disk
potentials plus a marching-squares contour SVG).  Identical inputs give
byte-identical files: fixed float formatting, fixed iteration order, no
timestamps.
"""

from __future__ import annotations

import colorsys
import math
import os

import numpy as np

from .. import analytics, transport
from ..ensembles import SpectralSample

_SVG_OPEN = ('<?xml version="1.0" encoding="UTF-8"?>\n'
             '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             'viewBox="{vb}" width="{w}" height="{h}">\n')

_GOLDEN_ANGLE = 0.6180339887498949  # fractional part of the golden ratio


def _fmt(x: float) -> str:
    s = f"{x:.4f}"
    return "0.0000" if s == "-0.0000" else s


def _cell_color(index: int) -> str:
    hue = (index * _GOLDEN_ANGLE) % 1.0
    r, g, b = colorsys.hls_to_rgb(hue, 0.62, 0.75)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


def scatter_svg(sample: SpectralSample, path: str) -> str:
    """Points of the sample over the unit-circle outline."""
    n = sample.n
    radius = max(0.005, 0.06 / math.sqrt(n))
    parts = [_SVG_OPEN.format(vb="-1.25 -1.25 2.5 2.5", w=640, h=640)]
    parts.append('<rect x="-1.25" y="-1.25" width="2.5" height="2.5" '
                 'fill="#ffffff"/>\n')
    parts.append('<circle cx="0" cy="0" r="1" fill="none" stroke="#444444" '
                 'stroke-width="0.008"/>\n')
    for z in sample.points:
        parts.append(f'<circle cx="{_fmt(z.real)}" cy="{_fmt(-z.imag)}" '
                     f'r="{_fmt(radius)}" fill="#1f6fb2" '
                     f'fill-opacity="0.85"/>\n')
    parts.append("</svg>\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("".join(parts))
    return path


def _runs_of_row(column_values):
    """Maximal constant runs (start, end_exclusive, value), skipping -1."""
    runs = []
    start = None
    current = -1
    for i, v in enumerate(column_values):
        if v != current:
            if start is not None and current != -1:
                runs.append((start, i, current))
            start = i
            current = v
    if start is not None and current != -1:
        runs.append((start, len(column_values), current))
    return runs


def tessellation_figure(sample: SpectralSample, weights, resolution: int,
                        svg_path: str, csv_path: str):
    """Cell-index raster as SVG pixel runs plus the runs CSV.

    CSV columns: y (pixel row, 0 at the bottom), x_start, x_end
    (exclusive), cell_index.
    """
    grid = transport.tessellation_raster(sample, weights, resolution)
    res = resolution
    svg = [_SVG_OPEN.format(vb=f"0 0 {res} {res}", w=640, h=640)]
    svg.append(f'<rect x="0" y="0" width="{res}" height="{res}" '
               'fill="#ffffff"/>\n')
    csv_lines = ["y,x_start,x_end,cell_index\n"]
    for iy in range(res):
        for xs, xe, cell in _runs_of_row(grid[:, iy]):
            csv_lines.append(f"{iy},{xs},{xe},{cell}\n")
            svg.append(f'<rect x="{xs}" y="{res - 1 - iy}" '
                       f'width="{xe - xs}" height="1" '
                       f'fill="{_cell_color(int(cell))}" '
                       'shape-rendering="crispEdges"/>\n')
    svg.append(f'<circle cx="{res / 2:g}" cy="{res / 2:g}" r="{res / 2:g}" '
               'fill="none" stroke="#333333" stroke-width="1"/>\n')
    svg.append("</svg>\n")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write("".join(svg))
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("".join(csv_lines))
    return svg_path, csv_path


def _marching_segments(xs, ys, values, level):
    """Line segments of the `values == level` contour on the grid."""
    segs = []
    nx = xs.size
    ny = ys.size
    below = values < level

    def interp(xa, ya, va, xb, yb, vb):
        t = (level - va) / (vb - va)
        return (xa + t * (xb - xa), ya + t * (yb - ya))

    for i in range(nx - 1):
        for j in range(ny - 1):
            v00 = values[i, j]
            v10 = values[i + 1, j]
            v11 = values[i + 1, j + 1]
            v01 = values[i, j + 1]
            case = (int(not below[i, j]) | (int(not below[i + 1, j]) << 1)
                    | (int(not below[i + 1, j + 1]) << 2)
                    | (int(not below[i, j + 1]) << 3))
            if case in (0, 15):
                continue
            x0, x1 = xs[i], xs[i + 1]
            y0, y1 = ys[j], ys[j + 1]
            e_bottom = interp(x0, y0, v00, x1, y0, v10) \
                if (v00 < level) != (v10 < level) else None
            e_right = interp(x1, y0, v10, x1, y1, v11) \
                if (v10 < level) != (v11 < level) else None
            e_top = interp(x0, y1, v01, x1, y1, v11) \
                if (v01 < level) != (v11 < level) else None
            e_left = interp(x0, y0, v00, x0, y1, v01) \
                if (v00 < level) != (v01 < level) else None
            edges = [e for e in (e_bottom, e_right, e_top, e_left)
                     if e is not None]
            if len(edges) == 2:
                segs.append((edges[0], edges[1]))
            elif len(edges) == 4:
                # saddle: split by the cell-center value
                center_above = 0.25 * (v00 + v10 + v11 + v01) >= level
                corner_above = v00 >= level
                if center_above == corner_above:
                    segs.append((e_left, e_bottom))
                    segs.append((e_top, e_right))
                else:
                    segs.append((e_left, e_top))
                    segs.append((e_bottom, e_right))
    return segs


def potential_surface_figure(sample: SpectralSample, r: float,
                             csv_path: str, svg_path: str,
                             half_width: float = 1.2,
                             grid_points: int = 161, levels: int = 9):
    """Height grid of the three log potentials plus contour SVG.

    CSV columns: x, y, u_empirical, u_cutoff, u_infinity over a
    grid_points x grid_points lattice of [-half_width, half_width]^2.
    The contours are level sets of the cutoff potential.
    """
    xs = np.linspace(-half_width, half_width, grid_points)
    ys = xs
    zx, zy = np.meshgrid(xs, ys, indexing="ij")
    zz = zx + 1j * zy
    u_emp = analytics.u_empirical(sample, zz)
    u_cut = analytics.u_cutoff(sample, r, zz)
    u_inf = analytics.u_infinity(zz)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("x,y,u_empirical,u_cutoff,u_infinity\n")
        for i in range(grid_points):
            for j in range(grid_points):
                fh.write(f"{xs[i]:.9g},{ys[j]:.9g},{u_emp[i, j]:.9g},"
                         f"{u_cut[i, j]:.9g},{u_inf[i, j]:.9g}\n")
    lo = float(np.min(u_cut))
    hi = float(np.max(u_cut))
    level_vals = [lo + (hi - lo) * (k + 1) / (levels + 1)
                  for k in range(levels)]
    w = _fmt(2 * half_width)
    svg = [_SVG_OPEN.format(
        vb=f"{_fmt(-half_width)} {_fmt(-half_width)} {w} {w}",
        w=640, h=640)]
    svg.append(f'<rect x="{_fmt(-half_width)}" y="{_fmt(-half_width)}" '
               f'width="{w}" height="{w}" fill="#ffffff"/>\n')
    svg.append('<circle cx="0" cy="0" r="1" fill="none" stroke="#bbbbbb" '
               'stroke-width="0.006"/>\n')
    for k, level in enumerate(level_vals):
        color = _cell_color(k * 7 + 3)
        pieces = []
        for (xa, ya), (xb, yb) in _marching_segments(xs, ys, u_cut, level):
            pieces.append(f"M {_fmt(xa)} {_fmt(-ya)} L {_fmt(xb)} {_fmt(-yb)}")
        if pieces:
            svg.append(f'<path d="{" ".join(pieces)}" fill="none" '
                       f'stroke="{color}" stroke-width="0.006"/>\n')
    svg.append("</svg>\n")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write("".join(svg))
    return csv_path, svg_path


def emit_figures(sample: SpectralSample, kind: str, out_dir: str,
                 resolution: int = 256, r: float | None = None,
                 weights=None) -> list:
    """Write the figure files for one kind into out_dir; returns paths.

    tessellation solves for the equal-mass dual weights when none are
    given; potential_surface defaults the cutoff radius to 1/n.
    """
    os.makedirs(out_dir, exist_ok=True)
    if kind == "scatter":
        return [scatter_svg(sample, os.path.join(out_dir, "scatter.svg"))]
    if kind == "tessellation":
        if weights is None:
            weights = transport.solve_dual(sample,
                                           resolution=resolution).weights
        paths = tessellation_figure(
            sample, weights, resolution,
            os.path.join(out_dir, "tessellation.svg"),
            os.path.join(out_dir, "tessellation_runs.csv"))
        return list(paths)
    if kind == "potential_surface":
        if r is None:
            r = 1.0 / sample.n
        paths = potential_surface_figure(
            sample, r,
            os.path.join(out_dir, "potential_surface.csv"),
            os.path.join(out_dir, "potential_contours.svg"))
        return list(paths)
    raise ValueError(f"unknown figure kind {kind!r}; choose from "
                     "('scatter', 'tessellation', 'potential_surface')")
