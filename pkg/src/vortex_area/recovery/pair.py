"""Sequence parameters and the regularized pair used by the recovery maps.

A *star pair* supplies the profile ``h`` and the field ``psi`` on the half
rectangle ``[0, l] x [-1, 1]``.  Two sources exist: the analytic stand-in
``(1, sqrt(1 - w2^2))`` and a discrete minimizer, whose field is the piecewise
linear interpolant on the functional's triangulation.  The regularization
``(h_k, psi_k)`` is built on top of either one.

Besides values and gradients, every source reports where its restriction to a
vertical line ``w1 = const`` has kinks, so the quadrature can place cell
boundaries on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..geometry import ConvexProfile, Grid, phi_hat, subgraph_mask


@dataclass(frozen=True)
class RecoveryParams:
    """Parameters ``(k, r_k, theta_k, theta_bar_k)`` of one map of the sequence."""

    k: int
    l: float
    r_k: float
    theta: float
    theta_bar: float

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 2:
            raise ValueError("k must be an integer >= 2")
        if not self.l > 0:
            raise ValueError("l must be positive")
        if not 0 < self.r_k < self.l / 2:
            raise ValueError("need 0 < r_k < l/2")
        if not 0 < self.theta < self.theta_bar < math.pi / 4:
            raise ValueError("need 0 < theta < theta_bar < pi/4")
        if not 1.0 / self.k < self.l:
            raise ValueError("need 1/k < l")

    @classmethod
    def default(cls, k: int, l: float) -> "RecoveryParams":
        """Schedule ``r_k = 1/k``, ``theta_k = 1/k^2``, ``theta_bar_k = theta_k + 1/k``."""
        k = int(k)
        return cls(k=k, l=float(l), r_k=1.0 / k, theta=1.0 / k**2, theta_bar=1.0 / k**2 + 1.0 / k)

    @property
    def delta(self) -> float:
        return self.theta_bar - self.theta


def graded_points(k: int) -> np.ndarray:
    """Geometric cell boundaries toward ``w2 = +-1`` for the clipped circle ``phi_hat - 2/k``.

    The clipped circle is smooth between its zeros but its curvature scale
    near a zero is about ``2/k^2``, so cells are graded geometrically from
    that scale up to order one.
    """
    d = 1.0 - math.sqrt(1.0 - 4.0 / k**2) if k > 2 else 1.0
    pts = []
    step = 2.0 * d
    while step < 0.5:
        pts.append(1.0 - step)
        step *= 2.0
    pts = np.array(pts)
    return np.concatenate([-pts, pts])


def _circle_levels(c: float) -> np.ndarray:
    """Points where ``sqrt(1 - w2^2) = c``."""
    if not 0 < c < 1:
        return np.empty(0)
    w = math.sqrt(1.0 - c * c)
    return np.array([-w, w])


class AnalyticStandIn:
    """The pair ``h = 1``, ``psi = sqrt(1 - w2^2)`` (the cylinder)."""

    kind = "analytic"

    def __init__(self, l: float):
        if not l > 0:
            raise ValueError("l must be positive")
        self.l = float(l)
        self.f_value = 2.0 * math.pi * self.l

    def profile(self, w1):
        return np.ones_like(np.asarray(w1, dtype=float))

    def profile_slope(self, w1):
        return np.zeros_like(np.asarray(w1, dtype=float))

    def psi(self, w1, w2):
        w1, w2 = np.broadcast_arrays(np.asarray(w1, float), np.asarray(w2, float))
        return phi_hat(w2)

    def psi_grad(self, w1, w2):
        w1, w2 = np.broadcast_arrays(np.asarray(w1, float), np.asarray(w2, float))
        root = np.sqrt(np.clip(1.0 - w2 * w2, 1e-300, None))
        return np.zeros_like(w2), -w2 / root

    def w1_breaks(self) -> np.ndarray:
        return np.empty(0)

    def clip_kinks(self, w1: float, k: int) -> np.ndarray:
        """Kinks of ``psi_k(w1, .)``: here ``psi - 1/k`` and ``phi_hat - 2/k`` cross zero."""
        return np.concatenate([_circle_levels(1.0 / k), _circle_levels(2.0 / k)])


def adapter_profile(grid: Grid, h: ConvexProfile) -> ConvexProfile:
    """Lowest symmetric convex profile above ``h`` with end values 1.

    The recovery construction needs ``h(0) = 1``.  A field that vanishes above
    ``h`` also vanishes above any larger profile, so raising the profile keeps
    the field admissible.
    """
    n = grid.mid + 1
    w = grid.trapezoid_weights()[:n].copy()
    w[: n - 1] *= 2.0
    rows = []
    for i in range(1, n - 1):
        r = np.zeros(n)
        r[i - 1], r[i], r[i + 1] = -1.0, 2.0, -1.0
        rows.append(r)
    if n >= 2:
        r = np.zeros(n)
        r[n - 2], r[n - 1] = -1.0, 1.0
        rows.append(r)
    lower = np.array(h.values[:n], dtype=float)
    lower[0] = 1.0
    bounds = [(lo, 1.0) for lo in lower]
    res = linprog(w, A_ub=np.array(rows) if rows else None, b_ub=np.zeros(len(rows)) if rows else None,
                  bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"adapter profile LP failed: {res.message}")
    half = np.clip(np.maximum(res.x, lower), -1.0, 1.0)
    half[0] = 1.0
    # remove round-off convexity violations by rebuilding from monotone differences
    d = np.maximum(half[:-1] - half[1:], 0.0)
    d = np.maximum.accumulate(d[::-1])[::-1]
    half = half[-1] + np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]])
    half = np.maximum(half, lower)
    half[0] = 1.0
    return ConvexProfile(np.concatenate([half, half[-2::-1]]))


class DiscreteStar:
    """A computed pair, evaluated as the piecewise linear interpolant of the nodal field.

    The profile used by the construction is :func:`adapter_profile` of the
    computed one; the field is taken as is.
    """

    kind = "discrete"

    def __init__(self, grid: Grid, h: ConvexProfile, values: np.ndarray, f_value: float):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.nx, grid.ny):
            raise ValueError("field shape does not match grid")
        mask = subgraph_mask(grid, h)
        if np.any(values[~mask.values] != 0.0):
            raise ValueError("field is nonzero above the profile")
        self.grid = grid
        self.l = grid.l
        self.h_computed = h
        self.h = adapter_profile(grid, h)
        self.values = values
        self.f_value = float(f_value)
        self._w1 = grid.w1
        self._w2 = grid.w2

    @classmethod
    def from_result(cls, result) -> "DiscreteStar":
        """Build from a minimizer result (anything with ``h_star``, ``psi_star`` and ``f_value``)."""
        return cls(result.psi_star.grid, result.h_star, result.psi_star.values, result.f_value)

    # profile ------------------------------------------------------------
    def profile(self, w1):
        return np.interp(w1, self._w1, self.h.values)

    def profile_slope(self, w1):
        w1 = np.asarray(w1, dtype=float)
        g = self.grid
        i = np.clip(np.floor(w1 / g.dw1).astype(int), 0, g.nx - 2)
        hv = self.h.values
        return (hv[i + 1] - hv[i]) / g.dw1

    # field --------------------------------------------------------------
    def _locate(self, w1, w2):
        g = self.grid
        w1, w2 = np.broadcast_arrays(np.asarray(w1, float), np.asarray(w2, float))
        x = (w1 - 0.0) / g.dw1
        y = (w2 + 1.0) / g.dw2
        i = np.clip(np.floor(x).astype(int), 0, g.nx - 2)
        j = np.clip(np.floor(y).astype(int), 0, g.ny - 2)
        return i, j, x - i, y - j

    def psi(self, w1, w2):
        i, j, x, y = self._locate(w1, w2)
        v = self.values
        a, b, c, d = v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1]
        lower = x >= y
        return np.where(lower, a + x * (b - a) + y * (c - b), a + y * (d - a) + x * (c - d))

    def psi_grad(self, w1, w2):
        i, j, x, y = self._locate(w1, w2)
        v = self.values
        g = self.grid
        a, b, c, d = v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1]
        lower = x >= y
        p = np.where(lower, (b - a), (c - d)) / g.dw1
        q = np.where(lower, (c - b), (d - a)) / g.dw2
        return p, q

    def w1_breaks(self) -> np.ndarray:
        w1 = self._w1
        return w1[(w1 > 0) & (w1 < self.l)]

    def slice_nodes(self, w1: float) -> np.ndarray:
        """Kinks of ``psi(w1, .)``: grid rows and crossings of the cell diagonals."""
        g = self.grid
        x = w1 / g.dw1
        frac = x - min(max(math.floor(x), 0), g.nx - 2)
        diag = self._w2[:-1] + frac * g.dw2
        return np.unique(np.concatenate([self._w2, diag]))

    def clip_kinks(self, w1: float, k: int) -> np.ndarray:
        """Kinks of ``psi_k(w1, .)``: those of ``psi`` plus the crossings created by the clipping."""
        nodes = self.slice_nodes(w1)
        lo, hi = nodes[:-1], nodes[1:]
        vlo = self.psi(np.full_like(lo, w1), lo)
        vhi = self.psi(np.full_like(hi, w1), hi)
        width = hi - lo
        ok = width > 0
        m = np.where(ok, (vhi - vlo) / np.where(ok, width, 1.0), 0.0)
        c0 = vlo - m * lo
        out = [nodes, _circle_levels(2.0 / k)]
        # psi = 1/k
        with np.errstate(divide="ignore", invalid="ignore"):
            root = (1.0 / k - c0) / m
        good = ok & (m != 0) & (root > lo) & (root < hi)
        out.append(root[good])
        # psi - 1/k = phi_hat - 2/k, i.e. m w + c0 + 1/k = sqrt(1 - w^2)
        cc = c0 + 1.0 / k
        qa = 1.0 + m * m
        qb = 2.0 * m * cc
        qc = cc * cc - 1.0
        disc = qb * qb - 4.0 * qa * qc
        sq = np.sqrt(np.clip(disc, 0.0, None))
        for r in ((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)):
            good = ok & (disc > 0) & (r > lo) & (r < hi) & (m * r + cc >= 0)
            out.append(r[good])
        return np.unique(np.concatenate(out))


class RegularizedPair:
    """The pair ``(h_k, psi_k)`` derived from a star pair for one index ``k``.

    ``h_k`` follows the chord from ``(0, h(0))`` to ``(1/k, h(1/k))`` and equals
    ``h`` afterwards; ``psi_k = ((psi - 1/k) v 0) ^ phi_k`` with
    ``phi_k = (phi_hat - 2/k) v 0``.
    """

    def __init__(self, star, params: RecoveryParams):
        if not math.isclose(star.l, params.l, rel_tol=0.0, abs_tol=1e-15):
            raise ValueError("star pair and parameters use different l")
        h0 = float(star.profile(0.0))
        if abs(h0 - 1.0) > 1e-12:
            raise ValueError("the profile must equal 1 at w1 = 0")
        self.star = star
        self.params = params
        self.l = params.l
        self.k = params.k
        self._knot = 1.0 / params.k
        self._h0 = h0
        self._h_knot = float(star.profile(self._knot))
        self._ramp_slope = params.k * (self._h_knot - h0)

    @property
    def f_value(self) -> float:
        return self.star.f_value

    def h_k(self, w1):
        w1 = np.asarray(w1, dtype=float)
        ramp = self._ramp_slope * w1 + self._h0
        return np.where(w1 < self._knot, ramp, self.star.profile(w1))

    def h_k_slope(self, w1):
        w1 = np.asarray(w1, dtype=float)
        return np.where(w1 < self._knot, self._ramp_slope, self.star.profile_slope(w1))

    def psi_k(self, w1, w2):
        inv = 1.0 / self.k
        a = self.star.psi(w1, w2) - inv
        b = phi_hat(w2) - 2.0 * inv
        return np.maximum(np.minimum(a, b), 0.0)

    def psi_k_grad(self, w1, w2):
        inv = 1.0 / self.k
        w1, w2 = np.broadcast_arrays(np.asarray(w1, float), np.asarray(w2, float))
        a = self.star.psi(w1, w2) - inv
        b = phi_hat(w2) - 2.0 * inv
        pa, qa = self.star.psi_grad(w1, w2)
        root = np.sqrt(np.clip(1.0 - w2 * w2, 1e-300, None))
        qb = -w2 / root
        use_a = a <= b
        zero = np.minimum(a, b) <= 0.0
        p = np.where(zero, 0.0, np.where(use_a, pa, 0.0))
        q = np.where(zero, 0.0, np.where(use_a, qa, qb))
        return p, q

    def w1_breaks(self) -> np.ndarray:
        b = np.concatenate([self.star.w1_breaks(), [self._knot]])
        return np.unique(b[(b > 0) & (b < self.l)])

    def slice_kinks(self, w1: float) -> np.ndarray:
        """Cell boundaries for the slice ``psi_k(w1, .)``: its kinks plus the grading toward the clip zeros."""
        k = np.concatenate([self.star.clip_kinks(float(w1), self.k), graded_points(self.k)])
        return np.unique(k[(k > -1.0) & (k < 1.0)])

    def check(self, grid: Grid | None = None) -> None:
        """Verify ``h_k >= h``, convexity of ``h_k``, and the support and bound of ``psi_k``."""
        grid = grid or getattr(self.star, "grid", None)
        if grid is None:
            w1 = np.linspace(0.0, self.l, 257)
            w2 = np.linspace(-1.0, 1.0, 257)
        else:
            w1 = grid.w1[: grid.mid + 1]
            w2 = grid.w2
        hk = self.h_k(w1)
        if np.any(hk < self.star.profile(w1) - 1e-12):
            raise ValueError("h_k drops below h")
        pts = np.unique(np.concatenate([w1, [self._knot]]))
        hv = self.h_k(pts)
        slopes = np.diff(hv) / np.diff(pts)
        if np.any(np.diff(slopes) < -1e-9):
            raise ValueError("h_k is not convex")
        W1, W2 = np.meshgrid(w1, w2, indexing="ij")
        pk = self.psi_k(W1, W2)
        if np.any(pk[:, 0] != 0.0):
            raise ValueError("psi_k is nonzero on the bottom side")
        above = W2 > self.star.profile(W1)[:, :1] if W1.ndim == 2 else None
        if above is not None and np.any(pk[above] != 0.0):
            raise ValueError("psi_k is nonzero above the profile")
        phik = np.maximum(phi_hat(W2) - 2.0 / self.k, 0.0)
        if np.any(pk > phik + 1e-15):
            raise ValueError("psi_k exceeds phi_k")
