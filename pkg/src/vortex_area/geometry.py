"""Discrete rectangle, convex symmetric profiles, subgraph masks and boundary data.

The rectangle is ``(0, 2l) x (-1, 1)`` sampled on a uniform tensor grid whose
node counts are odd, so that ``w1 = l`` and ``w2 = 0`` are grid lines.  Arrays
over the grid are indexed ``[i, j]`` with ``i`` along ``w1`` and ``j`` along
``w2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

CONVEXITY_SLACK = 1e-12
MASK_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[0, 2l] x [-1, 1]``."""

    l: float
    nx: int
    ny: int
    dw1: float = field(init=False)
    dw2: float = field(init=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.l) or self.l <= 0:
            raise ValueError(f"l must be positive, got {self.l}")
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if int(n) != n or n < 3 or n % 2 == 0:
                raise ValueError(f"{name} must be an odd integer >= 3, got {n}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "dw1", 2.0 * self.l / (self.nx - 1))
        object.__setattr__(self, "dw2", 2.0 / (self.ny - 1))

    @property
    def w1(self) -> np.ndarray:
        return np.arange(self.nx) * self.dw1

    @property
    def w2(self) -> np.ndarray:
        return -1.0 + np.arange(self.ny) * self.dw2

    @property
    def mid(self) -> int:
        """Column index of the symmetry line ``w1 = l``."""
        return (self.nx - 1) // 2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.w1, self.w2, indexing="ij")

    def trapezoid_weights(self) -> np.ndarray:
        """Trapezoid weights along ``w1``; they sum to ``2l``."""
        w = np.full(self.nx, self.dw1)
        w[0] = w[-1] = 0.5 * self.dw1
        return w

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.l, factor * (self.nx - 1) + 1, factor * (self.ny - 1) + 1)


def build_grid(l: float, nx: int, ny: int) -> Grid:
    return Grid(float(l), nx, ny)


@dataclass(frozen=True)
class ConvexProfile:
    """Nodal samples of a convex profile symmetric about ``w1 = l``, valued in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def check(self) -> None:
        """Raise ``ValueError`` if any profile invariant is violated."""
        v = self.values
        if v.ndim != 1 or v.size < 3:
            raise ValueError("profile must be a 1-d array with at least 3 samples")
        if np.any(v < -1.0) or np.any(v > 1.0):
            raise ValueError("profile leaves [-1, 1]")
        if not np.array_equal(v, v[::-1]):
            raise ValueError("profile is not symmetric")
        if np.any(second_differences(v) < -CONVEXITY_SLACK):
            raise ValueError("profile is not convex")

    @classmethod
    def constant(cls, nx: int, c: float) -> "ConvexProfile":
        return cls(np.full(nx, float(c)))

    def __call__(self, grid: Grid, w1) -> np.ndarray:
        """Piecewise linear interpolant at arbitrary ``w1``."""
        return np.interp(w1, grid.w1, self.values)

    def is_constant(self, tol: float = 0.0) -> bool:
        return float(np.ptp(self.values)) <= tol


def second_differences(v: np.ndarray) -> np.ndarray:
    return v[:-2] - 2.0 * v[1:-1] + v[2:]


def _second_difference_matrix(n: int) -> np.ndarray:
    d = np.zeros((n - 2, n))
    idx = np.arange(n - 2)
    d[idx, idx] = 1.0
    d[idx, idx + 1] = -2.0
    d[idx, idx + 2] = 1.0
    return d


def project_convex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto convex sequences ``{x : D2 x >= 0}``.

    Solved through the dual, a nonnegative least squares problem in the
    multipliers: ``x = y + D2^T lam`` with ``lam = argmin ||D2^T lam + y||``.
    """
    y = np.asarray(y, dtype=float)
    if y.size < 3 or np.all(second_differences(y) >= 0):
        return y.copy()
    d2 = _second_difference_matrix(y.size)
    lam, _ = nnls(d2.T, -y, maxiter=50 * y.size)
    return y + d2.T @ lam


def project_polyhedron(y: np.ndarray, g: np.ndarray, b: np.ndarray, weights=None) -> np.ndarray:
    """Weighted projection of ``y`` onto ``{x : g x >= b}`` via least distance programming.

    With ``z = sqrt(w) (x - y)`` the problem is ``min |z|`` subject to
    ``g' z >= b'``.  Its solution follows from one nonnegative least squares
    solve (Lawson and Hanson): with ``u = argmin_{u >= 0} |E u - f|`` for
    ``E = [g'^T; b'^T]`` and ``f = e_last``, the residual ``r = E u - f`` gives
    ``z = -r[:-1] / r[-1]``.
    """
    y = np.asarray(y, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    root_w = np.sqrt(w)
    gt = g / root_w[None, :]
    bt = b - g @ y
    if np.all(bt <= 0):
        return y.copy()
    e = np.vstack([gt.T, bt[None, :]])
    f = np.zeros(y.size + 1)
    f[-1] = 1.0
    u, _ = nnls(e, f, maxiter=50 * e.shape[1])
    r = e @ u - f
    if abs(r[-1]) < 1e-300:
        raise ValueError("constraints are infeasible")
    z = -r[:-1] / r[-1]
    return y + z / root_w


def _half_constraints(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``g x >= b`` on the left half ``x_0..x_m`` of a symmetric convex profile in [-1, 1].

    Convexity of the mirrored profile is convexity of the half plus
    ``x_{m-1} >= x_m``; the half is then nonincreasing, so the range
    constraint reduces to ``x_0 <= 1`` and ``x_m >= -1``.
    """
    n = m + 1
    rows = []
    for k in range(1, m):
        r = np.zeros(n)
        r[k - 1], r[k], r[k + 1] = 1.0, -2.0, 1.0
        rows.append(r)
    r = np.zeros(n)
    r[m - 1], r[m] = 1.0, -1.0
    rows.append(r)
    top = np.zeros(n)
    top[0] = -1.0
    bottom = np.zeros(n)
    bottom[m] = 1.0
    rows += [top, bottom]
    b = np.zeros(len(rows))
    b[-2] = -1.0
    b[-1] = -1.0
    return np.array(rows), b


def _rebuild_half(half: np.ndarray) -> np.ndarray:
    """Remove round-off from a near-feasible half profile.

    The half is rebuilt from its first differences ``d_k = x_k - x_{k+1}``,
    made nonnegative and nonincreasing, so the mirrored profile is convex and
    inside [-1, 1] by construction.  The change is at round-off level.
    """
    d = np.maximum(half[:-1] - half[1:], 0.0)
    d = np.maximum.accumulate(d[::-1])[::-1]
    base = float(np.clip(half[-1], -1.0, 1.0))
    total = float(np.sum(d))
    if base + total > 1.0 and total > 0:
        d *= (1.0 - base) / total
    tail = np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]])
    return base + tail


def _dykstra(x: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        y = project_convex(x + p)
        p = x + p - y
        x_new = np.clip(y + q, -1.0, 1.0)
        q = y + q - x_new
        done = np.max(np.abs(x_new - x)) < tol
        x = x_new
        if done:
            break
    return x


def project_convex_symmetric(
    raw: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000, method: str = "exact"
) -> ConvexProfile:
    """Least-squares projection onto symmetric convex profiles valued in [-1, 1].

    The input is first symmetrized (the constraint set lies in the symmetric
    subspace, so this is an orthogonal step).  ``method="exact"`` then solves
    the weighted half-profile problem in one least distance programming step;
    ``method="dykstra"`` alternates projections onto the convex cone and the
    box until successive iterates differ by less than ``tol``.
    """
    x = np.asarray(raw, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("raw profile must be a 1-d array with at least 3 entries")
    if x.size % 2 == 0:
        raise ValueError("profile length must be odd")
    x = 0.5 * (x + x[::-1])
    if method == "exact":
        m = (x.size - 1) // 2
        weights = np.full(m + 1, 2.0)
        weights[m] = 1.0
        g, b = _half_constraints(m)
        half = _rebuild_half(project_polyhedron(x[: m + 1], g, b, weights))
        x = np.concatenate([half, half[-2::-1]])
    elif method == "dykstra":
        x = _dykstra(x, tol, max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    # Round-off cleanup: exact mirror symmetry and exact range.
    x = np.clip(0.5 * (x + x[::-1]), -1.0, 1.0)
    return ConvexProfile(x)


@dataclass(frozen=True)
class SubgraphMask:
    """Boolean per node, true where ``w2 <= h(w1)``."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=bool)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def top_index(self) -> np.ndarray:
        """Index of the highest true node per column (-1 if the column is empty)."""
        v = self.values
        counts = v.sum(axis=1)
        return counts - 1


def subgraph_mask(grid: Grid, h: ConvexProfile) -> SubgraphMask:
    if h.values.shape != (grid.nx,):
        raise ValueError(
            f"profile has {h.values.size} samples, grid expects {grid.nx}"
        )
    # Nodes sit on the w1 grid lines, so the interpolant equals the nodal value.
    mask = grid.w2[None, :] <= h.values[:, None] + MASK_TOL
    return SubgraphMask(mask)


def phi_hat(w2) -> np.ndarray:
    """Extended boundary datum ``sqrt(1 - w2^2)``, independent of ``w1``."""
    w2 = np.asarray(w2, dtype=float)
    return np.sqrt(np.clip(1.0 - w2 * w2, 0.0, None))


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data on the lateral sides and the bottom of the rectangle."""

    grid: Grid

    def lateral(self) -> np.ndarray:
        return phi_hat(self.grid.w2)

    def extended(self) -> np.ndarray:
        """``phi_hat`` sampled on every node."""
        return np.broadcast_to(phi_hat(self.grid.w2), (self.grid.nx, self.grid.ny)).copy()

    def dirichlet_nodes(self) -> np.ndarray:
        d = np.zeros((self.grid.nx, self.grid.ny), dtype=bool)
        d[0, :] = d[-1, :] = True
        d[:, 0] = True
        return d

    def dirichlet_values(self, mask: SubgraphMask) -> np.ndarray:
        """Strongly enforced values: ``phi`` on lateral nodes inside the subgraph, else 0."""
        vals = np.zeros((self.grid.nx, self.grid.ny))
        lat = self.lateral()
        vals[0, :] = np.where(mask.values[0], lat, 0.0)
        vals[-1, :] = np.where(mask.values[-1], lat, 0.0)
        vals[:, 0] = 0.0
        return vals
