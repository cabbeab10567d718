"""Graph area of a planar map by piecewise tensor Gauss-Legendre quadrature in polar coordinates.

The area density of ``v(r, alpha)`` in polar coordinates is
``sqrt(r^2 + r^2 |v_r|^2 + |v_a|^2 + (v1_r v2_a - v1_a v2_r)^2)``.
Derivatives are central differences whose step is a fixed fraction of the
region size, shrunk near cell edges so a stencil never crosses a cell boundary.
Cell boundaries include every kink line reported by the region, so the
integrand is smooth on each cell.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .regions import Region, RegionDecomposition

log = logging.getLogger(__name__)

FD_FRACTION = 1e-6
MERGE_FRACTION = 1e-10
CHUNK = 400_000


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    return np.polynomial.legendre.leggauss(order)


def merge_breaks(points, lo: float, hi: float) -> np.ndarray:
    """Sorted ``[lo, interior points..., hi]`` with near-duplicates removed."""
    tol = MERGE_FRACTION * (hi - lo)
    pts = np.sort(np.asarray(points, dtype=float).ravel())
    pts = pts[(pts > lo + tol) & (pts < hi - tol)]
    out = [lo]
    for p in pts:
        if p - out[-1] > tol:
            out.append(float(p))
    if hi - out[-1] <= tol:
        out.pop()
    out.append(hi)
    return np.array(out)


def subdivide(edges: np.ndarray, level: int) -> np.ndarray:
    """Split every piece into ``2**level`` equal cells."""
    n = 2**level
    t = np.arange(n) / n
    inner = edges[:-1, None] + np.diff(edges)[:, None] * t[None, :]
    return np.concatenate([inner.ravel(), edges[-1:]])


def cell_nodes(edges: np.ndarray, order: int):
    """Gauss nodes, weights and the enclosing cell bounds for every node."""
    x, w = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights, np.repeat(lo, order), np.repeat(hi, order)


def tensor_nodes(x_range, x_breaks, y_range, y_breaks, y_breaks_at, order: int, level: int,
                 y_bounds=None):
    """Nodes of a product rule on a domain ``x0 <= x <= x1, y0(x) <= y <= y1(x)``.

    ``y_bounds(x)`` (optional) returns the per-``x`` bounds; otherwise
    ``y_range`` is used.  Returns ``X, Y, W, Xlo, Xhi, Ylo, Yhi``.
    """
    x0, x1 = x_range
    xn, xw, xlo, xhi = cell_nodes(subdivide(merge_breaks(x_breaks, x0, x1), level), order)
    if y_bounds is None and y_breaks_at is None:
        y0, y1 = y_range
        yn, yw, ylo, yhi = cell_nodes(subdivide(merge_breaks(y_breaks, y0, y1), level), order)
        m = yn.size
        return (np.repeat(xn, m), np.tile(yn, xn.size), np.outer(xw, yw).ravel(),
                np.repeat(xlo, m), np.repeat(xhi, m), np.tile(ylo, xn.size), np.tile(yhi, xn.size))
    parts = [[] for _ in range(7)]
    for xi, wi, li, hi_ in zip(xn, xw, xlo, xhi):
        y0, y1 = y_range if y_bounds is None else y_bounds(xi)
        extra = np.asarray(y_breaks, dtype=float)
        if y_breaks_at is not None:
            extra = np.concatenate([extra, np.asarray(y_breaks_at(xi), dtype=float).ravel()])
        yn, yw, ylo, yhi = cell_nodes(subdivide(merge_breaks(extra, y0, y1), level), order)
        m = yn.size
        for lst, val in zip(parts, (np.full(m, xi), yn, wi * yw, np.full(m, li), np.full(m, hi_), ylo, yhi)):
            lst.append(val)
    return tuple(np.concatenate(p) for p in parts)


def polar_density(fn, r, a, hr, ha) -> np.ndarray:
    """Graph-area density (including the factor ``r``) from central differences."""
    rp, rm = fn(r + hr, a), fn(r - hr, a)
    ap, am = fn(r, a + ha), fn(r, a - ha)
    u1r = (rp[0] - rm[0]) / (2.0 * hr)
    u2r = (rp[1] - rm[1]) / (2.0 * hr)
    u1a = (ap[0] - am[0]) / (2.0 * ha)
    u2a = (ap[1] - am[1]) / (2.0 * ha)
    jac = u1r * u2a - u1a * u2r
    return np.sqrt(r * r * (1.0 + u1r * u1r + u2r * u2r) + u1a * u1a + u2a * u2a + jac * jac)


def _region_level(reg: Region, order: int, level: int) -> float:
    (r0, r1), (a0, a1) = reg.r, reg.a
    R, A, W, Rlo, Rhi, Alo, Ahi = tensor_nodes(
        reg.r, reg.r_breaks, reg.a, reg.a_breaks, reg.a_breaks_at, order, level)
    hr0 = FD_FRACTION * (r1 - r0)
    ha0 = FD_FRACTION * (a1 - a0)
    total = []
    for s in range(0, R.size, CHUNK):
        sl = slice(s, s + CHUNK)
        r, a = R[sl], A[sl]
        hr = np.minimum(hr0, 0.5 * np.minimum(r - Rlo[sl], Rhi[sl] - r))
        ha = np.minimum(ha0, 0.5 * np.minimum(a - Alo[sl], Ahi[sl] - a))
        total.append(np.sum(W[sl] * polar_density(reg.fn, r, a, hr, ha)))
    return math.fsum(total)


@dataclass(frozen=True)
class RegionArea:
    name: str
    group: str
    value: float
    levels: tuple
    converged: bool


@dataclass
class QuadratureResult:
    total: float
    regions: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.regions)

    def by_group(self) -> dict:
        out: dict = {}
        for reg in self.regions:
            out.setdefault(reg.group, []).append(reg.value)
        return {g: math.fsum(v) for g, v in out.items()}

    def region(self, name: str) -> RegionArea:
        for reg in self.regions:
            if reg.name == name:
                return reg
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "converged": self.converged,
            "regions": [
                {"name": r.name, "group": r.group, "value": r.value,
                 "levels": list(r.levels), "converged": r.converged}
                for r in self.regions
            ],
        }


def refine(evaluate, rel_tol: float, max_level: int, abs_tol: float = 1e-14):
    """Run ``evaluate(level)`` on successively halved cells until two levels agree.

    Returns ``(value, levels, converged)``; a non-converged estimate carries
    every computed level so the last two can be reported.
    """
    levels = [evaluate(0)]
    for level in range(1, max_level + 1):
        levels.append(evaluate(level))
        if abs(levels[-1] - levels[-2]) <= rel_tol * abs(levels[-1]) + abs_tol:
            return levels[-1], tuple(levels), True
    return levels[-1], tuple(levels), False


def region_area(reg: Region, order: int = 4, rel_tol: float = 1e-4, max_level: int = 4) -> RegionArea:
    value, levels, ok = refine(lambda L: _region_level(reg, order, L), rel_tol, max_level)
    if not ok:
        log.warning("region %s did not converge: last levels %.12g, %.12g",
                    reg.name, levels[-2], levels[-1])
    return RegionArea(reg.name, reg.group, value, levels, ok)


def graph_area_quadrature(decomposition: RegionDecomposition, order: int = 4, rel_tol: float = 1e-4,
                          max_level: int = 4, workers: int = 1) -> QuadratureResult:
    """Graph area of the map carried by ``decomposition``, region by region."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    job = lambda reg: region_area(reg, order, rel_tol, max_level)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            areas = list(pool.map(job, decomposition.regions))
    else:
        areas = [job(reg) for reg in decomposition.regions]
    return QuadratureResult(total=math.fsum(a.value for a in areas), regions=areas)
