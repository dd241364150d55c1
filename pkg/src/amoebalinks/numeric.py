"""Univariate complex root finding and the fiber solver ``f(z0, w) = 0``.

Roots are computed by simultaneous (Aberth-Ehrlich) iteration started on
a circle of radius given by the Fujiwara bound.  The iteration is written
over a batch axis so that samplers can solve hundreds of thousands of
fibers of the same degree in a handful of numpy passes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .poly import LaurentPolynomial

log = logging.getLogger(__name__)

TRIM_TOL = 1e-12
MAX_ITER = 200
STEP_TOL = 1e-13
RESIDUAL_TOL = 1e-9
CLUSTER_TOL = 1e-6


@dataclass
class RootSet:
    """Roots of one univariate polynomial.

    ``residuals`` are absolute values ``|poly(root)|``; ``scales`` hold the
    matching evaluation scale ``sum |c_j| |root|^j`` used for acceptance.
    """

    roots: np.ndarray
    residuals: np.ndarray
    scales: np.ndarray = field(default_factory=lambda: np.zeros(0))
    zero_multiplicity: int = 0
    degree_drop: int = 0
    constant: bool = False
    clustered: bool = False
    vanishing: bool = False
    accepted: bool = True

    def __len__(self):
        return len(self.roots)

    @property
    def singular(self) -> bool:
        """True when a sampler should skip this fiber."""
        return self.vanishing or self.clustered or self.degree_drop > 0 or not self.accepted


def _start_phase(seed: int) -> float:
    # One scalar per seed, independent of batch layout.
    return 0.4 + 0.1 * float(np.random.default_rng(seed).random())


def fujiwara_bound(monic: np.ndarray) -> np.ndarray:
    """Upper bound on root moduli, rowwise, for monic ascending coefficients."""
    d = monic.shape[-1] - 1
    terms = []
    for k in range(1, d + 1):
        c = np.abs(monic[..., d - k])
        if k == d:
            c = c / 2.0
        terms.append(c ** (1.0 / k))
    return 2.0 * np.max(np.stack(terms, axis=-1), axis=-1)


def _horner(coeffs: np.ndarray, z: np.ndarray):
    """Value and derivative of rowwise polynomials at z of shape (n, m)."""
    d = coeffs.shape[1] - 1
    p = np.broadcast_to(coeffs[:, d : d + 1], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(d - 1, -1, -1):
        dp = dp * z + p
        p = p * z + coeffs[:, k : k + 1]
    return p, dp


def aberth_batch(coeffs: np.ndarray, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """All roots of each row of ``coeffs`` (ascending, nonzero leading term).

    Returns ``(roots, iterations)`` where ``roots`` has shape ``(n, d)``.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n, m = coeffs.shape
    d = m - 1
    if d < 1:
        raise ValueError("degree must be at least 1")
    monic = coeffs / coeffs[:, d : d + 1]
    if d == 1:
        return -monic[:, :1], np.ones(n, dtype=int)
    radius = fujiwara_bound(monic)
    radius = np.where(radius > 0, radius, 1.0)
    phase = _start_phase(seed) + 2 * np.pi * np.arange(d) / d
    z = radius[:, None] * np.exp(1j * phase)[None, :]
    active = np.arange(n)
    iters = np.zeros(n, dtype=int)
    eye = np.eye(d, dtype=bool)
    for it in range(1, MAX_ITER + 1):
        za = z[active]
        p, dp = _horner(monic[active], za)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = za[:, :, None] - za[:, None, :]
            diff[:, eye] = np.inf
            s = np.sum(1.0 / diff, axis=2)
            step = ratio / (1.0 - ratio * s)
        step = np.where(np.isfinite(step), step, 0.0)
        za = za - step
        z[active] = za
        iters[active] = it
        done = np.all(np.abs(step) <= STEP_TOL * np.maximum(1.0, np.abs(za)), axis=1)
        active = active[~done]
        if active.size == 0:
            break
    return z, iters


def _sort_rows(roots: np.ndarray) -> np.ndarray:
    out = np.empty_like(roots)
    for k in range(roots.shape[0]):
        order = np.lexsort((roots[k].imag, roots[k].real))
        out[k] = roots[k][order]
    return out


def _sort_batch(roots: np.ndarray) -> np.ndarray:
    if roots.shape[1] <= 1:
        return roots
    # stable two-key sort: imaginary first, then real
    idx = np.argsort(roots.imag, axis=1, kind="stable")
    r = np.take_along_axis(roots, idx, axis=1)
    idx = np.argsort(r.real, axis=1, kind="stable")
    return np.take_along_axis(r, idx, axis=1)


def residual_check(coeffs: np.ndarray, roots: np.ndarray):
    """Absolute residuals, evaluation scales and per-row acceptance.

    A root passes when ``|p(r)| < RESIDUAL_TOL * sum |c_j||r|^j``; within a
    cluster of diameter below ``CLUSTER_TOL`` the bound relaxes to
    ``CLUSTER_TOL``.  Returns ``(residuals, scales, accepted, clustered)``.
    """
    p, _ = _horner(coeffs, roots)
    scale, _ = _horner(np.abs(coeffs), np.abs(roots))
    scale = np.maximum(scale.real, np.finfo(float).tiny)
    res = np.abs(p)
    rel = res / scale
    d = roots.shape[1]
    if d > 1:
        diff = np.abs(roots[:, :, None] - roots[:, None, :])
        diff[:, np.eye(d, dtype=bool)] = np.inf
        in_cluster = np.min(diff, axis=2) < CLUSTER_TOL
    else:
        in_cluster = np.zeros_like(rel, dtype=bool)
    ok = (rel < RESIDUAL_TOL) | (in_cluster & (rel < CLUSTER_TOL))
    return res, scale, np.all(ok, axis=1), np.any(in_cluster, axis=1)


def univariate_roots(coeffs, seed: int = 0) -> RootSet:
    """Roots of ``sum coeffs[k] w^k`` (ascending degree).

    Low-order zero coefficients are reported as ``zero_multiplicity`` and
    not returned as roots; high-order coefficients under the trim tolerance
    are dropped and counted in ``degree_drop``.
    """
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size == 0 or not np.any(np.abs(c) > 0):
        raise ValueError("all coefficients are zero")
    tol = TRIM_TOL * np.max(np.abs(c))
    big = np.nonzero(np.abs(c) >= tol)[0]
    lo, hi = int(big[0]), int(big[-1])
    trimmed = c[lo : hi + 1]
    drop = c.size - 1 - hi
    if hi == lo:
        return RootSet(np.zeros(0, complex), np.zeros(0), np.zeros(0), lo, drop, constant=True)
    roots, _ = aberth_batch(trimmed[None, :], seed=seed)
    roots = _sort_rows(roots)
    res, scale, ok, clustered = residual_check(trimmed[None, :], roots)
    if not ok[0]:
        log.debug("root residual above tolerance: %s", res[0])
    return RootSet(
        roots[0], res[0], scale[0], lo, drop,
        clustered=bool(clustered[0]), accepted=bool(ok[0]),
    )


# --------------------------------------------------------------------------
# Fibers


class FiberError(ValueError):
    pass


def w_coefficient_table(p: LaurentPolynomial) -> tuple[int, list[list[tuple[int, complex]]]]:
    """Group terms by w-exponent: ``(jmin, table)`` with ``table[j - jmin]``
    the list of ``(i, a_ij)`` pairs."""
    jmin, jmax = p.w_degree_range()
    table: list[list[tuple[int, complex]]] = [[] for _ in range(jmax - jmin + 1)]
    for (i, j), a in p:
        table[j - jmin].append((i, a))
    return jmin, table


def fiber_coefficients(p: LaurentPolynomial, log_z: np.ndarray) -> np.ndarray:
    """Coefficients in ``w`` (after removing ``w^jmin``) at ``z = exp(log_z)``.

    Shape ``(len(log_z), degree + 1)``.  Working from ``log z`` keeps the
    monomials ``z^i = exp(i log z)`` accurate for large or small ``|z|``.
    """
    log_z = np.asarray(log_z, dtype=complex).ravel()
    _, table = w_coefficient_table(p)
    out = np.zeros((log_z.size, len(table)), dtype=complex)
    for k, entries in enumerate(table):
        for i, a in entries:
            out[:, k] += a * np.exp(i * log_z)
    return out


def solve_fiber(p: LaurentPolynomial, z0: complex, seed: int = 0) -> RootSet:
    """Roots ``w`` in C* of ``p(z0, w) = 0``."""
    if z0 == 0:
        raise FiberError("z0 must be nonzero")
    jmin, jmax = p.w_degree_range()
    if jmax == jmin:
        raise FiberError("polynomial does not depend on w")
    coeffs = fiber_coefficients(p, np.array([np.log(complex(z0))]))[0]
    if not np.any(np.abs(coeffs) >= TRIM_TOL * p.max_abs_coeff):
        return RootSet(np.zeros(0, complex), np.zeros(0), vanishing=True, accepted=False)
    rs = univariate_roots(coeffs, seed=seed)
    if rs.degree_drop:
        log.warning("fiber at z0=%s loses %d degree(s)", z0, rs.degree_drop)
    return rs


@dataclass
class FiberBatch:
    """Roots of many fibers of one polynomial.

    ``roots[k]`` are the roots over ``log_z[k]``; rows with ``ok[k]`` false
    are singular (degree collapse, vanishing, root cluster or residual
    failure) and carry no usable roots.
    """

    log_z: np.ndarray
    roots: np.ndarray
    ok: np.ndarray

    @property
    def skipped(self) -> int:
        return int(np.count_nonzero(~self.ok))


def solve_fibers(p: LaurentPolynomial, log_z: np.ndarray, seed: int = 0) -> FiberBatch:
    """Vectorised :func:`solve_fiber` over an array of ``log z`` values."""
    jmin, jmax = p.w_degree_range()
    if jmax == jmin:
        raise FiberError("polynomial does not depend on w")
    log_z = np.asarray(log_z, dtype=complex).ravel()
    C = fiber_coefficients(p, log_z)
    d = C.shape[1] - 1
    mag = np.abs(C)
    rowmax = np.max(mag, axis=1)
    regular = (mag[:, d] >= TRIM_TOL * rowmax) & (mag[:, 0] >= TRIM_TOL * rowmax) & (rowmax > 0)
    roots = np.full((log_z.size, d), np.nan + 0j)
    ok = np.zeros(log_z.size, dtype=bool)
    idx = np.nonzero(regular)[0]
    if idx.size:
        r, _ = aberth_batch(C[idx], seed=seed)
        r = _sort_batch(r)
        _, _, accepted, clustered = residual_check(C[idx], r)
        good = accepted & ~clustered & np.all(np.isfinite(r), axis=1)
        roots[idx] = r
        ok[idx] = good
    return FiberBatch(log_z, roots, ok)
