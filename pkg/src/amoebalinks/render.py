"""Byte-exact image output: PPM heatmaps of torus rasters and SVG drawings
of links in the fundamental square."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .coamoeba import TorusRaster
from .links import TorusGeodesic, TorusLink

TWO_PI = 2 * math.pi

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


class Palette(enum.Enum):
    GRAYSCALE = "grayscale"
    HEAT = "heat"


@dataclass(frozen=True)
class ImageBuffer:
    width: int
    height: int
    rgb: bytes

    def __post_init__(self):
        if len(self.rgb) != 3 * self.width * self.height:
            raise ValueError(f"expected {3 * self.width * self.height} bytes, got {len(self.rgb)}")

    def array(self) -> np.ndarray:
        return np.frombuffer(self.rgb, dtype=np.uint8).reshape(self.height, self.width, 3)

    @classmethod
    def from_array(cls, a: np.ndarray) -> "ImageBuffer":
        a = np.ascontiguousarray(a, dtype=np.uint8)
        return cls(a.shape[1], a.shape[0], a.tobytes())


def _heat_table() -> np.ndarray:
    # pale yellow through orange to dark red; level 0 is unused (white)
    s = np.arange(256) / 255.0
    r = 255 - np.rint(95 * s)
    g = np.rint(235 * (1 - s) ** 1.2)
    b = np.rint(150 * (1 - s) ** 3)
    return np.stack([r, g, b], axis=1).astype(np.uint8)


def tone_levels(counts: np.ndarray) -> np.ndarray:
    """Integer levels ``round(255 log(1+c) / log(1+c_max))``."""
    counts = np.asarray(counts)
    cmax = int(counts.max()) if counts.size else 0
    if cmax <= 0:
        return np.zeros(counts.shape, dtype=np.int64)
    lv = np.rint(255.0 * np.log1p(counts) / math.log1p(cmax)).astype(np.int64)
    # any occupied bin stays visibly non-background
    return np.where(counts > 0, np.maximum(lv, 1), 0)


def raster_to_image(r: TorusRaster, palette: Palette = Palette.GRAYSCALE) -> ImageBuffer:
    """Image with ``theta1`` to the right and ``theta2`` upwards; empty bins white."""
    lv = tone_levels(r.counts).T[::-1]
    h, w = lv.shape
    out = np.full((h, w, 3), 255, dtype=np.uint8)
    hit = lv > 0
    if palette is Palette.GRAYSCALE:
        gray = (255 - lv[hit]).astype(np.uint8)
        out[hit] = gray[:, None]
    else:
        out[hit] = _heat_table()[lv[hit]]
    return ImageBuffer.from_array(out)


def ppm_bytes(img: ImageBuffer) -> bytes:
    return f"P6\n{img.width} {img.height}\n255\n".encode("ascii") + img.rgb


def write_ppm(img: ImageBuffer, path) -> None:
    Path(path).write_bytes(ppm_bytes(img))


def read_ppm(path) -> ImageBuffer:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end : end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("not an 8-bit binary PPM")
    w, h = int(fields[1]), int(fields[2])
    return ImageBuffer(w, h, data[pos + 1 : pos + 1 + 3 * w * h])


# --------------------------------------------------------------------------
# SVG


def geodesic_segments(g: TorusGeodesic) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Pieces of the geodesic inside the unit square, in turns.

    The lifted line is cut wherever it crosses an integer coordinate; the
    crossings are exact rationals computed from the (exactly represented)
    float offset.
    """
    m, n = g.homology
    off = Fraction(g.offset) / Fraction(TWO_PI)
    if m == 0:
        x0, y0, x1, y1 = off, Fraction(0), off, Fraction(n)
        cuts = {Fraction(k) for k in range(1, n)}
        ts = sorted({Fraction(0), Fraction(1)} | {c / n for c in cuts})
    else:
        x0, y0, x1, y1 = Fraction(0), off, Fraction(m), off + n
        ts = {Fraction(0), Fraction(1)}
        ts |= {Fraction(k, m) for k in range(1, m)}
        if n:
            lo, hi = sorted((y0, y1))
            ts |= {(k - y0) / n for k in range(math.floor(lo) + 1, math.ceil(hi))}
        ts = sorted(t for t in ts if 0 <= t <= 1)
    segs = []
    for ta, tb in zip(ts, ts[1:]):
        xa, ya = x0 + ta * (x1 - x0), y0 + ta * (y1 - y0)
        xb, yb = x0 + tb * (x1 - x0), y0 + tb * (y1 - y0)
        # translate the piece back into the unit square using its midpoint
        fx, fy = math.floor((xa + xb) / 2), math.floor((ya + yb) / 2)
        segs.append((xa - fx, ya - fy, xb - fx, yb - fy))
    return segs


def loop_segments(points: np.ndarray, stride: int = 16) -> list[tuple[float, float, float, float]]:
    """Chords of a traced loop in turns, dropping chords that cross a seam."""
    pts = np.mod(np.asarray(points)[::stride], TWO_PI) / TWO_PI
    pts = np.vstack([pts, pts[:1]])
    segs = []
    for a, b in zip(pts[:-1], pts[1:]):
        if np.max(np.abs(b - a)) < 0.5:
            segs.append((float(a[0]), float(a[1]), float(b[0]), float(b[1])))
    return segs


def svg_text(link: TorusLink, size: int = 400) -> str:
    if len(link) == 0:
        raise ValueError("empty link")
    s = float(size)

    def px(x, y):
        return f"{float(x) * s:.2f}", f"{(1 - float(y)) * s:.2f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0.00" y="0.00" width="{s:.2f}" height="{s:.2f}" fill="white" stroke="black" stroke-width="1.00"/>',
    ]
    for k, comp in enumerate(link.components):
        color = COLORS[k % len(COLORS)]
        segs = geodesic_segments(comp) if isinstance(comp, TorusGeodesic) else loop_segments(comp.lifted)
        for xa, ya, xb, yb in segs:
            x1, y1 = px(xa, ya)
            x2, y2 = px(xb, yb)
            out.append(
                f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}" stroke-width="2.00"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg_link(link: TorusLink, path, size: int = 400) -> None:
    Path(path).write_text(svg_text(link, size), encoding="utf-8")
