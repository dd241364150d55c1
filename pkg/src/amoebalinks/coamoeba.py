"""Amoeba/coamoeba sampling, torus rasters and complement counting.

Sampling walks a grid ``z = exp(rho + i theta)`` with ``rho`` in a log-radius
range and ``theta`` uniform on the circle, solves every fiber for ``w`` and
deposits ``(theta, arg w)`` (coamoeba) or ``(rho, log|w|)`` (amoeba).
Fibers are independent, so the grid is cut into shards that may run on a
thread pool; shards are merged in grid order so the output never depends on
the worker count.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np
from scipy import ndimage

from .numeric import FiberError, solve_fibers
from .poly import LaurentPolynomial, format_polynomial, partial_derivative

TWO_PI = 2.0 * math.pi

DEFAULT_GRID = (400, 1200)
DEFAULT_LOG_RANGE = (-3.0, 3.0)
DEFAULT_RASTER = 512
SHARD_FIBERS = 24_000
MAX_INSERTS = 256
# half a cell of the default raster
DEFAULT_ARG_GAP = TWO_PI / (2 * DEFAULT_RASTER)


class CloudKind(enum.Enum):
    AMOEBA = "AMOEBA"
    COAMOEBA = "COAMOEBA"
    CONTOUR = "CONTOUR"


class TorusPoint(NamedTuple):
    theta1: float
    theta2: float

    @classmethod
    def reduce(cls, theta1: float, theta2: float) -> "TorusPoint":
        return cls(float(wrap_angle(theta1)), float(wrap_angle(theta2)))


def wrap_angle(x):
    """Reduce angles to ``[0, 2 pi)``, guarding the rounding edge at 2 pi."""
    r = np.mod(x, TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r)


@dataclass
class PointCloud:
    points: np.ndarray
    kind: CloudKind
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)

    def __len__(self):
        return self.points.shape[0]

    @property
    def on_torus(self) -> bool:
        return self.kind in (CloudKind.COAMOEBA, CloudKind.CONTOUR)

    def dump(self, path) -> None:
        """Write ``x y`` lines under a ``#`` header."""
        header = [f"kind: {self.kind.value}"]
        header += [f"{k}: {v}" for k, v in self.meta.items()]
        np.savetxt(path, self.points, fmt="%.17g", header="\n".join(header), comments="# ")

    @classmethod
    def load(cls, path) -> "PointCloud":
        meta = {}
        kind = None
        with open(path) as fh:
            for line in fh:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition(": ")
                if key == "kind":
                    kind = CloudKind(value)
                elif key:
                    meta[key] = value
        if kind is None:
            raise ValueError(f"{path}: missing kind header")
        pts = np.loadtxt(path, comments="#", ndmin=2)
        return cls(pts.reshape(-1, 2), kind, meta)


# --------------------------------------------------------------------------
# Sampling


def worker_count() -> int:
    env = os.environ.get("COAMOEBA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _log_grid(n_radii: int, n_angles: int, log_radius_range: Sequence[float]) -> np.ndarray:
    if n_radii < 1 or n_angles < 1:
        raise ValueError("grid sizes must be positive")
    r_min, r_max = log_radius_range
    if r_min > r_max:
        raise ValueError("log radius range is reversed")
    rho = np.linspace(r_min, r_max, n_radii) if n_radii > 1 else np.array([r_min])
    theta = TWO_PI * np.arange(n_angles) / n_angles
    return (rho[:, None] + 1j * theta[None, :]).ravel()


@dataclass
class FiberSample:
    """Flattened on-curve points ``(log z, w)`` from a sampling grid."""

    log_z: np.ndarray
    w: np.ndarray
    fibers: int
    skipped: int
    refined: int = 0


def _solve_sharded(p, log_z, seed, workers):
    shards = [log_z[k : k + SHARD_FIBERS] for k in range(0, log_z.size, SHARD_FIBERS)]

    def run(shard):
        return solve_fibers(p, shard, seed=seed)

    if workers > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, shards))
    else:
        parts = [run(s) for s in shards]
    roots = np.concatenate([fb.roots for fb in parts]) if parts else np.zeros((0, 0), complex)
    ok = np.concatenate([fb.ok for fb in parts]) if parts else np.zeros(0, bool)
    return roots, ok


def _arg_gaps(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Largest argument jump between root sets of neighbouring fibers.

    Each root is paired with its nearest neighbour (in ``log w``) in the other
    fiber, both ways; rows are fibers, columns roots.
    """
    la, lb = np.log(a), np.log(b)
    dre = la.real[:, :, None] - lb.real[:, None, :]
    dim = np.angle(np.exp(1j * (la.imag[:, :, None] - lb.imag[:, None, :])))
    dist = dre * dre + dim * dim
    fwd = np.take_along_axis(np.abs(dim), np.argmin(dist, axis=2)[:, :, None], axis=2)
    bwd = np.take_along_axis(np.abs(dim), np.argmin(dist, axis=1)[:, None, :], axis=1)
    return np.maximum(fwd.max(axis=(1, 2)), bwd.max(axis=(1, 2)))


def sample_curve(
    p: LaurentPolynomial,
    n_radii: int = DEFAULT_GRID[0],
    n_angles: int = DEFAULT_GRID[1],
    log_radius_range: Sequence[float] = DEFAULT_LOG_RANGE,
    seed: int = 0,
    workers: int | None = None,
    max_arg_gap: float | None = None,
) -> FiberSample:
    """Solve every fiber of the ``(rho, theta)`` grid.

    With ``max_arg_gap`` set, neighbouring radii whose roots jump by more
    than that much in ``arg w`` get extra fibers solved at evenly spaced
    intermediate radii (at most ``MAX_INSERTS`` per interval).
    """
    jmin, jmax = p.w_degree_range()
    if jmin == jmax:
        raise FiberError("polynomial does not depend on w")
    grid = _log_grid(n_radii, n_angles, log_radius_range)
    workers = workers or worker_count()
    roots, ok = _solve_sharded(p, grid, seed, workers)
    log_z = [np.repeat(grid[ok], roots.shape[1])]
    w = [roots[ok].ravel()]
    skipped = int(np.count_nonzero(~ok))
    refined = 0
    if max_arg_gap is not None and n_radii > 1:
        R = roots.reshape(n_radii, n_angles, -1)
        G = grid.reshape(n_radii, n_angles)
        okg = ok.reshape(n_radii, n_angles)
        both = (okg[:-1] & okg[1:]).ravel()
        lo = R[:-1].reshape(-1, R.shape[2])[both]
        hi = R[1:].reshape(-1, R.shape[2])[both]
        gaps = _arg_gaps(lo, hi)
        inserts = np.clip(np.ceil(gaps / max_arg_gap) - 1, 0, MAX_INSERTS).astype(int)
        start = G[:-1].ravel()[both]
        step = (G[1:] - G[:-1]).ravel()[both]
        sel = inserts > 0
        if sel.any():
            n_ins = inserts[sel]
            first = np.repeat(np.cumsum(n_ins) - n_ins, n_ins)
            frac = (np.arange(n_ins.sum()) - first + 1) / np.repeat(n_ins + 1, n_ins)
            extra = np.repeat(start[sel], n_ins) + frac * np.repeat(step[sel], n_ins)
            r2, ok2 = _solve_sharded(p, extra, seed, workers)
            log_z.append(np.repeat(extra[ok2], r2.shape[1]))
            w.append(r2[ok2].ravel())
            skipped += int(np.count_nonzero(~ok2))
            refined = extra.size
    return FiberSample(np.concatenate(log_z), np.concatenate(w), grid.size, skipped, refined)


def _meta(p, n_radii, n_angles, log_radius_range, sample: FiberSample) -> dict:
    return {
        "polynomial": format_polynomial(p),
        "grid": f"{n_radii},{n_angles}",
        "log_range": f"{log_radius_range[0]:g},{log_radius_range[1]:g}",
        "fibers": sample.fibers,
        "skipped": sample.skipped,
        "refined": sample.refined,
    }


def sample_coamoeba(
    p: LaurentPolynomial,
    n_radii: int = DEFAULT_GRID[0],
    n_angles: int = DEFAULT_GRID[1],
    log_radius_range: Sequence[float] = DEFAULT_LOG_RANGE,
    seed: int = 0,
    workers: int | None = None,
    max_arg_gap: float | None = DEFAULT_ARG_GAP,
) -> PointCloud:
    s = sample_curve(p, n_radii, n_angles, log_radius_range, seed, workers, max_arg_gap)
    pts = np.column_stack([wrap_angle(s.log_z.imag), wrap_angle(np.angle(s.w))])
    return PointCloud(pts, CloudKind.COAMOEBA, _meta(p, n_radii, n_angles, log_radius_range, s))


def sample_amoeba(
    p: LaurentPolynomial,
    n_radii: int = DEFAULT_GRID[0],
    n_angles: int = DEFAULT_GRID[1],
    log_radius_range: Sequence[float] = DEFAULT_LOG_RANGE,
    seed: int = 0,
    workers: int | None = None,
) -> PointCloud:
    s = sample_curve(p, n_radii, n_angles, log_radius_range, seed, workers)
    pts = np.column_stack([s.log_z.real, np.log(np.abs(s.w))])
    return PointCloud(pts, CloudKind.AMOEBA, _meta(p, n_radii, n_angles, log_radius_range, s))


# --------------------------------------------------------------------------
# Logarithmic Gauss map


class SingularPointError(ValueError):
    pass


def _eval_log(p: LaurentPolynomial, log_z: np.ndarray, log_w: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(log_z, log_w).shape, dtype=complex)
    for (i, j), a in p:
        out += a * np.exp(i * log_z + j * log_w)
    return out


def _log_gauss_parts(p, log_z, log_w):
    z_fz = _eval_log(partial_derivative(p, "z"), log_z, log_w) * np.exp(log_z)
    w_fw = _eval_log(partial_derivative(p, "w"), log_z, log_w) * np.exp(log_w)
    return z_fz, w_fw


def log_gauss(p: LaurentPolynomial, z: complex, w: complex) -> complex:
    """``(z f_z) / (w f_w)`` at an on-curve point; real values are critical."""
    lz, lw = np.log(complex(z)), np.log(complex(w))
    scale = sum(abs(a) * math.exp(i * lz.real + j * lw.real) for (i, j), a in p)
    if abs(_eval_log(p, lz, lw)) > 1e-8 * scale:
        raise ValueError(f"({z}, {w}) is not on the curve")
    num, den = (complex(v) for v in _log_gauss_parts(p, lz, lw))
    if abs(den) <= 1e-12:
        if abs(num) <= 1e-12:
            raise SingularPointError(f"singular point of the curve at ({z}, {w})")
        raise ZeroDivisionError("w f_w vanishes; the Gauss ratio is infinite here")
    return num / den


def contour_sample(
    p: LaurentPolynomial,
    n_radii: int = DEFAULT_GRID[0],
    n_angles: int = DEFAULT_GRID[1],
    log_radius_range: Sequence[float] = DEFAULT_LOG_RANGE,
    im_tol: float = 1e-3,
    seed: int = 0,
    workers: int | None = None,
    max_arg_gap: float | None = DEFAULT_ARG_GAP,
) -> PointCloud:
    """Arg-images of sampled points where the Gauss ratio is real to ``im_tol``."""
    if im_tol <= 0:
        raise ValueError("im_tol must be positive")
    s = sample_curve(p, n_radii, n_angles, log_radius_range, seed, workers, max_arg_gap)
    log_w = np.log(s.w)
    num, den = _log_gauss_parts(p, s.log_z, log_w)
    keep = np.abs(den) > 1e-12
    gamma = np.zeros_like(num)
    gamma[keep] = num[keep] / den[keep]
    keep &= np.abs(gamma.imag) < im_tol
    pts = np.column_stack([wrap_angle(s.log_z.imag[keep]), wrap_angle(log_w.imag[keep])])
    meta = _meta(p, n_radii, n_angles, log_radius_range, s)
    meta["im_tol"] = im_tol
    return PointCloud(pts, CloudKind.CONTOUR, meta)


# --------------------------------------------------------------------------
# Rasters


@dataclass
class TorusRaster:
    """Counts on ``[0, 2pi)^2``; ``counts[u, v]`` is the bin of ``theta1`` in
    ``[2pi u/W, 2pi(u+1)/W)`` and ``theta2`` in the matching row band."""

    counts: np.ndarray

    @property
    def width(self) -> int:
        return self.counts.shape[0]

    @property
    def height(self) -> int:
        return self.counts.shape[1]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def occupied(self, threshold: int = 1) -> np.ndarray:
        return self.counts >= threshold

    def merge(self, other: "TorusRaster") -> "TorusRaster":
        return TorusRaster(self.counts + other.counts)


def rasterize(cloud: PointCloud, W: int = DEFAULT_RASTER, H: int | None = None) -> TorusRaster:
    if not cloud.on_torus:
        raise ValueError(f"cannot rasterize a {cloud.kind.value} cloud on the torus")
    H = W if H is None else H
    pts = wrap_angle(cloud.points)
    u = np.minimum((pts[:, 0] * (W / TWO_PI)).astype(np.int64), W - 1)
    v = np.minimum((pts[:, 1] * (H / TWO_PI)).astype(np.int64), H - 1)
    counts = np.bincount(u * H + v, minlength=W * H).reshape(W, H)
    return TorusRaster(counts.astype(np.int64))


def _find(parent: dict, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def complement_components(r: TorusRaster, occupancy_threshold: int = 1) -> int:
    """Number of 4-connected empty regions, opposite edges identified."""
    if occupancy_threshold < 1:
        raise ValueError("occupancy threshold must be at least 1")
    empty = r.counts < occupancy_threshold
    labels, n = ndimage.label(empty)
    if n == 0:
        return 0
    parent = {k: k for k in range(1, n + 1)}

    def union(a, b):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for a, b in zip(labels[0, :], labels[-1, :]):
        if a and b:
            union(a, b)
    for a, b in zip(labels[:, 0], labels[:, -1]):
        if a and b:
            union(a, b)
    return len({_find(parent, k) for k in parent})


def _torus_distance_to(mask: np.ndarray) -> np.ndarray:
    """Chessboard distance (cells) from every cell to the nearest ``mask`` cell."""
    if not mask.any():
        return np.full(mask.shape, np.inf)
    W, H = mask.shape
    tiled = np.tile(mask, (3, 3))
    dist = ndimage.distance_transform_cdt(~tiled, metric="chessboard")
    return dist[W : 2 * W, H : 2 * H].astype(float)


def directed_cell_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest torus chessboard distance from an ``a`` cell to the set ``b``."""
    if not a.any():
        return 0.0
    return float(_torus_distance_to(b)[a].max())


def hausdorff_cells(a: np.ndarray, b: np.ndarray) -> float:
    return max(directed_cell_distance(a, b), directed_cell_distance(b, a))


# --------------------------------------------------------------------------
# Affine torus maps


@dataclass(frozen=True)
class AffineTorusMap:
    """``x -> M x + t`` read on the torus; ``M`` is a rational 2x2 matrix.

    A non-integral ``M`` is multivalued on the torus, so :func:`transform_cloud`
    emits one image per distinct branch ``M (x + 2 pi n)``.
    """

    M: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]
    t: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        m = tuple(tuple(Fraction(x) for x in row) for row in self.M)
        object.__setattr__(self, "M", m)
        if m[0][0] * m[1][1] - m[0][1] * m[1][0] == 0:
            raise ValueError("singular torus map")

    @classmethod
    def identity(cls) -> "AffineTorusMap":
        return cls(((1, 0), (0, 1)))

    @property
    def denominator(self) -> int:
        return math.lcm(*(x.denominator for row in self.M for x in row))

    def branch_shifts(self) -> list[tuple[Fraction, Fraction]]:
        """Distinct values of ``M n mod 1`` over integer ``n``."""
        q = self.denominator
        seen = {}
        for n1, n2 in product(range(q), repeat=2):
            v = tuple((row[0] * n1 + row[1] * n2) % 1 for row in self.M)
            seen.setdefault(v, None)
        return sorted(seen)


def simplex_transform(p: LaurentPolynomial) -> AffineTorusMap:
    """Map carrying the coamoeba of ``1 + z + w`` onto that of ``p``.

    ``p`` must have exactly three support points spanning a triangle.
    """
    terms = list(p)
    if len(terms) != 3:
        raise ValueError("need a trinomial with simplex Newton polygon")
    (a0, c0), (a1, c1), (a2, c2) = terms
    rows = [(a1[0] - a0[0], a1[1] - a0[1]), (a2[0] - a0[0], a2[1] - a0[1])]
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if det == 0:
        raise ValueError("support is collinear")
    inv = (
        (Fraction(rows[1][1], det), Fraction(-rows[0][1], det)),
        (Fraction(-rows[1][0], det), Fraction(rows[0][0], det)),
    )
    phase = np.array([np.angle(c1 / c0), np.angle(c2 / c0)])
    m = np.array([[float(x) for x in r] for r in inv])
    t = -(m @ phase)
    return AffineTorusMap(inv, (float(t[0]), float(t[1])))


def transform_cloud(cloud: PointCloud, m: AffineTorusMap) -> PointCloud:
    if not cloud.on_torus:
        raise ValueError("transform_cloud needs a torus cloud")
    M = np.array([[float(x) for x in row] for row in m.M])
    base = cloud.points @ M.T + np.asarray(m.t)
    images = []
    for s1, s2 in m.branch_shifts():
        images.append(base + TWO_PI * np.array([float(s1), float(s2)]))
    pts = wrap_angle(np.concatenate(images)) if images else base
    meta = dict(cloud.meta)
    meta["transform"] = f"M={[[str(x) for x in r] for r in m.M]} t={m.t}"
    return PointCloud(pts, cloud.kind, meta)
