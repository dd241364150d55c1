"""Matplotlib figures for reports.

PNG output is written with the Agg backend and without the software tag,
so identical inputs produce identical files.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .coamoeba import PointCloud, TorusRaster  # noqa: E402
from .links import TorusGeodesic, TorusLink  # noqa: E402
from .render import COLORS, geodesic_segments, loop_segments, tone_levels  # noqa: E402
from .tropical import TropicalCurve  # noqa: E402

TWO_PI = 2 * math.pi
PNG_METADATA = {"Software": None}


def _save(fig, path):
    fig.savefig(path, format="png", dpi=100, metadata=PNG_METADATA)
    plt.close(fig)


def _torus_axes(ax):
    ax.set_xlim(0, TWO_PI)
    ax.set_ylim(0, TWO_PI)
    ax.set_aspect("equal")
    ax.set_xticks([0, math.pi, TWO_PI], ["0", "π", "2π"])
    ax.set_yticks([0, math.pi, TWO_PI], ["0", "π", "2π"])
    ax.set_xlabel("arg z")
    ax.set_ylabel("arg w")


def plot_raster(r: TorusRaster, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    lv = np.ma.masked_equal(tone_levels(r.counts).T, 0)
    ax.imshow(lv, origin="lower", extent=(0, TWO_PI, 0, TWO_PI), cmap="inferno_r", vmin=0, vmax=255,
              interpolation="nearest")
    _torus_axes(ax)
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_amoeba(cloud: PointCloud, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = cloud.points
    ax.plot(pts[:, 0], pts[:, 1], ",", color="black")
    ax.set_aspect("equal")
    ax.set_xlabel("log|z|")
    ax.set_ylabel("log|w|")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_link(link: TorusLink, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    for k, comp in enumerate(link.components):
        segs = geodesic_segments(comp) if isinstance(comp, TorusGeodesic) else loop_segments(comp.lifted, 4)
        color = COLORS[k % len(COLORS)]
        for xa, ya, xb, yb in segs:
            ax.plot([float(xa) * TWO_PI, float(xb) * TWO_PI], [float(ya) * TWO_PI, float(yb) * TWO_PI],
                    color=color, lw=1.5)
    _torus_axes(ax)
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_tropical(curve: TropicalCurve, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = [tuple(map(float, v)) for v in curve.vertices] + [tuple(map(float, e.anchor)) for e in curve.edges]
    xs, ys = zip(*pts)
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1.0)
    reach = 0.6 * span
    for e in curve.edges:
        x0, y0 = (float(c) for c in e.anchor)
        d = np.array(e.direction, dtype=float)
        d /= np.hypot(*d)
        if e.kind == "segment":
            x1, y1 = (float(c) for c in curve.vertices[e.head])
        elif e.kind == "ray":
            x1, y1 = x0 + reach * d[0], y0 + reach * d[1]
        else:
            x0, y0 = x0 - reach * d[0], y0 - reach * d[1]
            x1, y1 = x0 + 2 * reach * d[0], y0 + 2 * reach * d[1]
        ax.plot([x0, x1], [y0, y1], color="black", lw=1.0 + 0.8 * (e.weight - 1))
        if e.weight > 1:
            ax.annotate(str(e.weight), ((x0 + x1) / 2, (y0 + y1) / 2), fontsize=8)
    if curve.vertices:
        vx, vy = zip(*[tuple(map(float, v)) for v in curve.vertices])
        ax.plot(vx, vy, "o", color="tab:red", ms=3)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    if title:
        ax.set_title(title)
    _save(fig, path)
