"""Discrete area and the free-boundary functional on the doubled rectangle.

Every grid cell is split into two triangles along the diagonal from its
lower-left to its upper-right corner.  On each triangle the piecewise linear
interpolant of the nodal field has a constant gradient ``(p, q)`` and the cell
contributes ``(dw1 * dw2 / 2) * sqrt(1 + p^2 + q^2)``.

Boundary misfit integrals are evaluated exactly for the piecewise linear trace:
the lateral datum ``sqrt(1 - w2^2)`` is handled with its antiderivative, split
at the crossing points of the trace and the datum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryData, ConvexProfile, Grid, SubgraphMask, subgraph_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SurfaceField:
    """Nodal values of the surface field together with its grid and mask."""

    grid: Grid
    mask: SubgraphMask
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        shape = (self.grid.nx, self.grid.ny)
        if v.shape != shape:
            raise ValueError(f"field shape {v.shape} does not match grid {shape}")
        if self.mask.values.shape != shape:
            raise ValueError("mask shape does not match grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def check(self, atol: float = 0.0) -> None:
        v = self.values
        if np.any(v < -atol) or np.any(v > 1.0 + atol):
            raise ValueError("field leaves [0, 1]")
        if np.any(v[~self.mask.values] != 0.0):
            raise ValueError("field is nonzero outside the subgraph")

    def free_nodes(self) -> np.ndarray:
        return free_nodes(self.grid, self.mask)

    def vanishes_above_profile(self) -> bool:
        """True when the interpolant is zero on every triangle leaving the subgraph."""
        return bool(np.all(self.values[~support_nodes(self.grid, self.mask)] == 0.0))

    @classmethod
    def zeros(cls, grid: Grid, mask: SubgraphMask) -> "SurfaceField":
        return cls(grid, mask, np.zeros((grid.nx, grid.ny)))

    @classmethod
    def with_dirichlet(cls, grid: Grid, mask: SubgraphMask, interior=None) -> "SurfaceField":
        """Field with strongly imposed boundary values and ``interior`` on free nodes."""
        vals = BoundaryData(grid).dirichlet_values(mask)
        free = free_nodes(grid, mask)
        if interior is not None:
            vals[free] = np.asarray(interior, dtype=float)[free]
        return cls(grid, mask, vals)


@dataclass(frozen=True)
class EnergyBreakdown:
    area_term: float
    complement_term: float
    dirichlet_penalty: float
    free_penalty: float
    total: float

    @classmethod
    def from_terms(cls, area, complement, dirichlet, free) -> "EnergyBreakdown":
        total = area - complement + dirichlet + free
        return cls(float(area), float(complement), float(dirichlet), float(free), float(total))

    def as_dict(self) -> dict:
        return {
            "area_term": self.area_term,
            "complement_term": self.complement_term,
            "dirichlet_penalty": self.dirichlet_penalty,
            "free_penalty": self.free_penalty,
            "total": self.total,
        }


def free_nodes(grid: Grid, mask: SubgraphMask) -> np.ndarray:
    """Nodes optimized by the solver: inside the subgraph and off the Dirichlet boundary."""
    free = mask.values.copy()
    free[0, :] = False
    free[-1, :] = False
    free[:, 0] = False
    return free


def support_nodes(grid: Grid, mask: SubgraphMask) -> np.ndarray:
    """Nodes that may be nonzero while the interpolant still vanishes above the profile.

    The profile is linear between columns, so a triangle lies in the closed
    subgraph exactly when its three vertices are in the mask.  A node
    qualifies when every triangle containing it does.  Fields supported on
    these nodes are admissible pairs of the continuous problem, and the
    discrete functional is then their exact value.
    """
    m = mask.values
    a, b, c, d = m[:-1, :-1], m[1:, :-1], m[1:, 1:], m[:-1, 1:]
    lo_ok = a & b & c
    up_ok = a & c & d
    ok = m.copy()
    ok[:-1, :-1] &= lo_ok & up_ok
    ok[1:, :-1] &= lo_ok
    ok[1:, 1:] &= lo_ok & up_ok
    ok[:-1, 1:] &= up_ok
    return ok


# ---------------------------------------------------------------------------
# area

def _slopes(psi: np.ndarray, dw1: float, dw2: float):
    a = psi[:-1, :-1]
    b = psi[1:, :-1]
    c = psi[1:, 1:]
    d = psi[:-1, 1:]
    p_lo = (b - a) / dw1
    q_lo = (c - b) / dw2
    p_up = (c - d) / dw1
    q_up = (d - a) / dw2
    return p_lo, q_lo, p_up, q_up


def triangle_areas(values: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell areas of the lower and upper triangles."""
    p_lo, q_lo, p_up, q_up = _slopes(values, grid.dw1, grid.dw2)
    half_cell = 0.5 * grid.dw1 * grid.dw2
    return (
        half_cell * np.sqrt(1.0 + p_lo**2 + q_lo**2),
        half_cell * np.sqrt(1.0 + p_up**2 + q_up**2),
    )


def area_of_values(values: np.ndarray, grid: Grid) -> float:
    lo, up = triangle_areas(values, grid)
    # np.sum uses pairwise summation, which keeps results reproducible.
    return float(np.sum(lo) + np.sum(up))


def graph_area(psi: SurfaceField) -> float:
    """Area of the graph of the piecewise linear interpolant over the rectangle."""
    return area_of_values(psi.values, psi.grid)


def area_gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Gradient of :func:`area_of_values` with respect to every node."""
    dw1, dw2 = grid.dw1, grid.dw2
    p_lo, q_lo, p_up, q_up = _slopes(values, dw1, dw2)
    half_cell = 0.5 * dw1 * dw2
    s_lo = half_cell / np.sqrt(1.0 + p_lo**2 + q_lo**2)
    s_up = half_cell / np.sqrt(1.0 + p_up**2 + q_up**2)
    gp_lo, gq_lo = s_lo * p_lo / dw1, s_lo * q_lo / dw2
    gp_up, gq_up = s_up * p_up / dw1, s_up * q_up / dw2

    g = np.zeros_like(values, dtype=float)
    # lower triangle: p = (b - a)/dw1, q = (c - b)/dw2
    g[:-1, :-1] -= gp_lo
    g[1:, :-1] += gp_lo - gq_lo
    g[1:, 1:] += gq_lo
    # upper triangle: p = (c - d)/dw1, q = (d - a)/dw2
    g[1:, 1:] += gp_up
    g[:-1, 1:] += gq_up - gp_up
    g[:-1, :-1] -= gq_up
    return g


# ---------------------------------------------------------------------------
# exact boundary integrals

def abs_linear_integral(a, b, length):
    """Exact integral of ``|linear|`` over a segment with end values ``a`` and ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.abs(a) + np.abs(b)
    same = a * b >= 0
    safe = np.where(s > 0, s, 1.0)
    opposite = (a * a + b * b) / (2.0 * safe)
    return length * np.where(same, 0.5 * s, opposite)


def abs_linear_integral_grad(a, b, length):
    """Partial derivatives of :func:`abs_linear_integral` in ``a`` and ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.abs(a) + np.abs(b)
    same = a * b >= 0
    safe = np.where(s > 0, s, 1.0)
    q = a * a + b * b
    da_opp = (2.0 * a * s - q * np.sign(a)) / (2.0 * safe**2)
    db_opp = (2.0 * b * s - q * np.sign(b)) / (2.0 * safe**2)
    da = np.where(same, 0.5 * np.sign(a), da_opp)
    db = np.where(same, 0.5 * np.sign(b), db_opp)
    return length * da, length * db


def _circle_primitive(y):
    y = np.clip(y, -1.0, 1.0)
    return 0.5 * (y * np.sqrt(1.0 - y * y) + np.arcsin(y))


def semicircle_misfit(y: np.ndarray, v: np.ndarray) -> float:
    """Exact ``int |v(y) - sqrt(1 - y^2)| dy`` for the linear interpolant of ``v`` on nodes ``y``."""
    y0, y1 = y[:-1], y[1:]
    v0, v1 = v[:-1], v[1:]
    m = (v1 - v0) / (y1 - y0)
    c = v0 - m * y0
    # crossings solve (1 + m^2) y^2 + 2 m c y + c^2 - 1 = 0 with m y + c >= 0
    qa = 1.0 + m * m
    qb = 2.0 * m * c
    qc = c * c - 1.0
    disc = qb * qb - 4.0 * qa * qc
    sq = np.sqrt(np.clip(disc, 0.0, None))
    cuts = []
    for root in ((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)):
        ok = (disc > 0) & (root > y0) & (root < y1) & (m * root + c >= 0)
        cuts.append(np.where(ok, root, y0))
    pts = np.sort(np.stack([y0, cuts[0], cuts[1], y1]), axis=0)
    total = 0.0
    for k in range(3):
        lo, hi = pts[k], pts[k + 1]
        mid = 0.5 * (lo + hi)
        sign = np.sign(m * mid + c - np.sqrt(np.clip(1.0 - mid * mid, 0.0, None)))
        prim = lambda t: 0.5 * m * t * t + c * t - _circle_primitive(t)
        total += float(np.sum(sign * (prim(hi) - prim(lo))))
    return total


def boundary_penalties(values: np.ndarray, grid: Grid) -> tuple[float, float]:
    """Dirichlet misfit on the lateral sides and bottom, and the trace integral on the top side."""
    w2 = grid.w2
    lateral = semicircle_misfit(w2, values[0, :]) + semicircle_misfit(w2, values[-1, :])
    bottom = float(np.sum(abs_linear_integral(values[:-1, 0], values[1:, 0], grid.dw1)))
    top = float(np.sum(abs_linear_integral(values[:-1, -1], values[1:, -1], grid.dw1)))
    return lateral + bottom, top


def complement_measure(h: ConvexProfile, grid: Grid) -> float:
    """Trapezoid rule for the measure of the region above the profile."""
    return float(np.sum(grid.trapezoid_weights() * (1.0 - h.values)))


def _check_pair(h: ConvexProfile, psi: SurfaceField) -> None:
    if h.values.shape != (psi.grid.nx,):
        raise ValueError("profile size does not match the field's grid")
    expected = subgraph_mask(psi.grid, h)
    if not np.array_equal(expected.values, psi.mask.values):
        raise ValueError("field mask was not built from this profile")


def f2l(h: ConvexProfile, psi: SurfaceField) -> EnergyBreakdown:
    """Discrete value of the functional with its individual terms."""
    _check_pair(h, psi)
    grid = psi.grid
    area = graph_area(psi)
    dirichlet, free = boundary_penalties(psi.values, grid)
    return EnergyBreakdown.from_terms(area, complement_measure(h, grid), dirichlet, free)


def total_and_gradient(values: np.ndarray, grid: Grid) -> tuple[float, np.ndarray]:
    """Terms of the functional that vary with the free nodes, and their full gradient.

    The free nodes never include the lateral or bottom boundary, so the only
    boundary term that moves is the top trace integral.  Fields are
    nonnegative, where that integral is linear (the trapezoid rule is exact),
    so its gradient is the one-sided derivative also at zero values.
    """
    area = area_of_values(values, grid)
    g = area_gradient(values, grid)
    top = values[:, -1]
    if np.any(top < 0):
        raise ValueError("fields must be nonnegative")
    weights = grid.trapezoid_weights()
    top_val = float(np.sum(weights * top))
    g[:, -1] += weights
    return area + top_val, g


def f2l_gradient_psi(h: ConvexProfile, psi: SurfaceField) -> np.ndarray:
    """Exact gradient of the discrete functional in the free nodal values; other slots are 0."""
    _check_pair(h, psi)
    _, g = total_and_gradient(psi.values, psi.grid)
    return np.where(psi.free_nodes(), g, 0.0)


def f2l_sensitivity_h(h: ConvexProfile, psi: SurfaceField) -> np.ndarray:
    """Derivative of the explicit profile dependence, i.e. of ``-int (1 - h)``.

    This is the vector of trapezoid weights.  The dependence through the mask
    is not differentiable and is handled by re-masking in the optimizer.
    """
    _check_pair(h, psi)
    return psi.grid.trapezoid_weights()


@dataclass(frozen=True)
class GradientCheck:
    seed: int
    pairs: int
    max_rel_error: float
    worst_grid: tuple

    def as_dict(self) -> dict:
        return {"seed": self.seed, "pairs": self.pairs, "max_rel_error": self.max_rel_error,
                "worst_grid": list(self.worst_grid)}


def random_pair(rng: np.random.Generator, max_n: int = 17) -> tuple[ConvexProfile, SurfaceField]:
    """A random admissible pair: projected convex profile and a positive field on the free nodes."""
    from .geometry import project_convex_symmetric

    nx = int(rng.choice(np.arange(5, max_n + 1, 2)))
    ny = int(rng.choice(np.arange(5, max_n + 1, 2)))
    grid = Grid(float(rng.uniform(0.2, 3.0)), nx, ny)
    raw = 1.0 - rng.uniform(0.0, 1.5) * np.sin(np.pi * grid.w1 / (2.0 * grid.l)) + 0.1 * rng.standard_normal(nx)
    h = project_convex_symmetric(raw)
    mask = subgraph_mask(grid, h)
    psi = SurfaceField.with_dirichlet(grid, mask, rng.uniform(0.05, 0.95, (nx, ny)))
    return h, psi


def gradient_check(seed: int = 0, pairs: int = 50, max_n: int = 17, step: float = 1e-6) -> GradientCheck:
    """Compare the analytic gradient with central differences of the full functional.

    The error of a pair is ``max |g - g_fd| / max |g|`` over its free nodes.
    """
    rng = np.random.default_rng(seed)
    worst, worst_grid = 0.0, (0, 0)
    for _ in range(pairs):
        h, psi = random_pair(rng, max_n)
        g = f2l_gradient_psi(h, psi)
        free = psi.free_nodes()
        if not free.any():
            continue
        fd = np.zeros_like(g)
        base = np.array(psi.values)
        for i, j in zip(*np.nonzero(free)):
            vp, vm = base.copy(), base.copy()
            vp[i, j] += step
            vm[i, j] -= step
            fp = f2l(h, SurfaceField(psi.grid, psi.mask, vp)).total
            fm = f2l(h, SurfaceField(psi.grid, psi.mask, vm)).total
            fd[i, j] = (fp - fm) / (2.0 * step)
        err = float(np.max(np.abs(g - fd)[free]) / max(np.max(np.abs(g[free])), 1e-300))
        if err > worst:
            worst, worst_grid = err, (psi.grid.nx, psi.grid.ny)
    return GradientCheck(seed=seed, pairs=pairs, max_rel_error=worst, worst_grid=worst_grid)
