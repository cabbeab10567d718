"""Alternating minimization of the discrete functional over (profile, field) pairs.

Symmetry about ``w1 = l`` is built in: only columns ``0..mid`` are unknowns and
the other half is a mirror copy.  For a fixed profile the field is found by a
bound-constrained quasi-Newton solve on the nodes allowed by
:func:`support_nodes`, so the interpolated field vanishes above the profile.
The profile moves by projected descent steps built from finite-difference
probes of the reduced energy (hat-shaped bumps of one grid level, each followed
by a full field re-solve under the new mask).  Each seed is first solved on
coarser grids and then prolonged.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import linprog, minimize

from .baselines import catenoid_parameter, example_bounds, vortex_graph_area
from .functional import (
    EnergyBreakdown,
    SurfaceField,
    f2l,
    free_nodes,
    support_nodes,
    total_and_gradient,
)
from .geometry import (
    BoundaryData,
    ConvexProfile,
    Grid,
    build_grid,
    project_convex_symmetric,
    subgraph_mask,
)

logger = logging.getLogger(__name__)

SEEDS = ("discs", "cylinder", "catenoid")
COARSEST = 17


@dataclass
class SolveOptions:
    max_outer_iters: int = 200
    psi_tol: float = 1e-7
    h_step: float | None = None  # initial profile step; None means 0.05 * dw1
    f_tol: float = 1e-9
    seeds: tuple = SEEDS
    max_psi_iters: int = 20_000
    multilevel: bool = True

    def __post_init__(self) -> None:
        if self.psi_tol <= 0 or self.f_tol <= 0 or self.max_outer_iters <= 0:
            raise ValueError("tolerances and budgets must be positive")
        if self.h_step is not None and self.h_step <= 0:
            raise ValueError("h_step must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        unknown = set(self.seeds) - set(SEEDS)
        if unknown:
            raise ValueError(f"unknown seeds {sorted(unknown)}")
        self.seeds = tuple(self.seeds)


@dataclass
class SeedRun:
    seed: str
    initial_f: float
    f_value: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class MinimizerResult:
    h_star: ConvexProfile
    psi_star: SurfaceField
    f_value: float
    breakdown: EnergyBreakdown
    iterations: int
    converged: bool
    seed: str
    runs: list = field(default_factory=list)

    @property
    def grid(self) -> Grid:
        return self.psi_star.grid


# ---------------------------------------------------------------------------
# symmetry helpers

def mirror_columns(values: np.ndarray, mid: int) -> np.ndarray:
    """Overwrite columns right of ``mid`` with the mirror image of the left half."""
    out = np.array(values, dtype=float, copy=True)
    out[mid + 1:] = out[mid - 1::-1] if mid > 0 else out[mid + 1:]
    return out


def fold_gradient(g: np.ndarray, mid: int) -> np.ndarray:
    """Gradient with respect to the left-half unknowns of a mirrored field."""
    half = np.array(g[: mid + 1], dtype=float, copy=True)
    half[:mid] += g[: mid : -1]
    return half


def full_profile(half: np.ndarray) -> np.ndarray:
    return np.concatenate([half, half[-2::-1]])


# ---------------------------------------------------------------------------
# seeds and transfers

def seed_profile(name: str, grid: Grid) -> ConvexProfile | None:
    if name == "discs":
        return ConvexProfile.constant(grid.nx, -1.0)
    if name == "cylinder":
        return ConvexProfile.constant(grid.nx, 1.0)
    if name == "catenoid":
        cat = catenoid_parameter(grid.l)
        if not cat.exists:
            return None
        raw = np.clip(2.0 * cat.profile(grid.w1) - 1.0, -1.0, 1.0)
        return project_convex_symmetric(raw)
    raise ValueError(f"unknown seed {name!r}")


def shifted_circle_field(grid: Grid, h: ConvexProfile) -> np.ndarray:
    """Initial guess: in each column a half circle through ``w2 = -1`` and ``w2 = h``."""
    rho = 0.5 * (1.0 + h.values)[:, None]
    centre = 0.5 * (h.values - 1.0)[:, None]
    return np.sqrt(np.clip(rho**2 - (grid.w2[None, :] - centre) ** 2, 0.0, None))


def feasible_field(grid: Grid, h: ConvexProfile, guess: np.ndarray) -> SurfaceField:
    """Impose the support, the box and the Dirichlet data on ``guess``.

    Nodes outside :func:`support_nodes` are zeroed, including lateral nodes,
    so the interpolant vanishes above the profile.
    """
    mask = subgraph_mask(grid, h)
    support = support_nodes(grid, mask)
    vals = np.clip(np.where(support, guess, 0.0), 0.0, 1.0)
    bd = BoundaryData(grid)
    dn = bd.dirichlet_nodes()
    vals[dn] = np.where(support, bd.dirichlet_values(mask), 0.0)[dn]
    vals = mirror_columns(vals, grid.mid)
    return SurfaceField(grid, mask, vals)


def prolong(coarse: Grid, fine: Grid, h: ConvexProfile, psi: np.ndarray):
    h_f = project_convex_symmetric(np.interp(fine.w1, coarse.w1, h.values))
    interp = RegularGridInterpolator((coarse.w1, coarse.w2), psi)
    w1, w2 = fine.mesh()
    guess = interp(np.stack([w1, w2], axis=-1))
    return h_f, feasible_field(fine, h_f, guess)


# ---------------------------------------------------------------------------
# field solve

def minimize_psi_given_h(
    h: ConvexProfile, init: SurfaceField, opts: SolveOptions | None = None
) -> tuple[SurfaceField, bool]:
    """Minimize over the free nodal values for a fixed profile.

    Returns the field and a convergence flag (projected gradient max-norm
    below ``opts.psi_tol``).
    """
    opts = opts or SolveOptions()
    grid = init.grid
    mid = grid.mid
    base = feasible_field(grid, h, init.values).values.copy()
    mask = subgraph_mask(grid, h)
    free_half = (free_nodes(grid, mask) & support_nodes(grid, mask))[: mid + 1]
    n_free = int(free_half.sum())
    if n_free == 0:
        return SurfaceField(grid, subgraph_mask(grid, h), base), True

    def fun(x):
        vals = base.copy()
        vals[: mid + 1][free_half] = x
        vals = mirror_columns(vals, mid)
        e, g = total_and_gradient(vals, grid)
        return e, fold_gradient(g, mid)[free_half]

    x0 = base[: mid + 1][free_half]
    res = minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, 1.0)] * n_free,
        options={
            "maxiter": opts.max_psi_iters,
            "maxfun": 2 * opts.max_psi_iters,
            "gtol": opts.psi_tol,
            "ftol": 1e-15,
            "maxcor": 20,
        },
    )
    x = np.clip(res.x, 0.0, 1.0)
    e0, _ = fun(x0)
    e1, g1 = fun(x)
    if e1 > e0:
        # never accept an increase
        x, e1, g1 = x0, e0, fun(x0)[1]
    pg = np.where((x <= 0.0) & (g1 > 0), 0.0, g1)
    pg = np.where((x >= 1.0) & (pg < 0), 0.0, pg)
    converged = bool(np.max(np.abs(pg)) < opts.psi_tol)
    vals = base.copy()
    vals[: mid + 1][free_half] = x
    vals = mirror_columns(vals, mid)
    logger.debug("psi solve: %d free, %d iters, E=%.12g, converged=%s", n_free, res.nit, e1, converged)
    return SurfaceField(grid, subgraph_mask(grid, h), vals), converged


# ---------------------------------------------------------------------------
# profile probes

def hat_basis(n: int, count: int) -> np.ndarray:
    """Piecewise linear hat functions on ``n`` half-profile nodes with evenly spread peaks."""
    count = max(2, min(count, n))
    centres = np.linspace(0.0, n - 1.0, count)
    x = np.arange(n, dtype=float)
    return np.stack([np.interp(x, centres, np.eye(count)[k]) for k in range(count)])


def lowest_convex_profile(grid: Grid, h: ConvexProfile) -> ConvexProfile:
    """Smallest-integral symmetric convex profile whose mask contains the mask of ``h``.

    For a fixed field the functional decreases as the profile is lowered
    without uncovering masked-in nodes, so this is a free improvement.
    """
    mask = subgraph_mask(grid, h)
    z = grid.w2[mask.top_index()]
    mid = grid.mid
    n = mid + 1
    w = fold_gradient(grid.trapezoid_weights(), mid)
    # convexity of the full mirrored profile: second differences of the half,
    # plus the midline condition h[mid-1] >= h[mid]
    rows = []
    for k in range(1, mid):
        r = np.zeros(n)
        r[k - 1], r[k], r[k + 1] = -1.0, 2.0, -1.0
        rows.append(r)
    if mid >= 1:
        r = np.zeros(n)
        r[mid - 1], r[mid] = -1.0, 1.0
        rows.append(r)
    a_ub = np.array(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None
    lower = z[:n]
    res = linprog(w, A_ub=a_ub, b_ub=b_ub, bounds=list(zip(np.maximum(lower, -1.0), np.ones(n))), method="highs")
    if not res.success:
        return h
    cand = project_convex_symmetric(full_profile(np.maximum(res.x, lower)))
    if np.any(subgraph_mask(grid, cand).values < mask.values):
        return h
    return cand


# ---------------------------------------------------------------------------
# joint solve

def _transfer(grid: Grid, h_new: ConvexProfile, psi: SurfaceField) -> SurfaceField:
    return feasible_field(grid, h_new, psi.values)


class _ReducedEnergy:
    """The functional minimized over the field, as a function of the half profile.

    Raw profiles are projected, then lowered to the smallest convex profile
    with the same mask; the field is transferred from the current iterate and
    re-solved.  Results are cached per profile.
    """

    def __init__(self, grid: Grid, opts: SolveOptions):
        self.grid = grid
        self.opts = opts
        self.cache: dict = {}
        self.solves = 0

    def admissible(self, half: np.ndarray) -> ConvexProfile:
        h = project_convex_symmetric(full_profile(half))
        return lowest_convex_profile(self.grid, h)

    def __call__(self, h: ConvexProfile, start: SurfaceField):
        key = h.values.tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        psi = _transfer(self.grid, h, start)
        psi, ok = minimize_psi_given_h(h, psi, self.opts)
        self.solves += 1
        out = (f2l(h, psi).total, h, psi, ok)
        self.cache[key] = out
        return out


def _descend(grid: Grid, h: ConvexProfile, psi: SurfaceField, opts: SolveOptions, budget: int, n_hats: int):
    """Descent on the half profile driven by finite-difference probes.

    Each outer step probes the reduced energy with one-level bumps of hat
    functions and a uniform shift, builds a central-difference slope, and
    line-searches along the projected descent direction.  The best of all
    evaluated candidates is accepted if it lowers the functional.
    """
    mid = grid.mid
    reduced = _ReducedEnergy(grid, opts)
    f, h, psi, ok = reduced(reduced.admissible(h.values[: mid + 1]), psi)
    history = [f]
    basis = hat_basis(mid + 1, n_hats)
    probes = np.vstack([basis, np.ones(mid + 1)])
    delta = grid.dw2
    step = opts.h_step if opts.h_step is not None else 0.05 * grid.dw1
    converged = False
    it = 0
    while it < budget:
        it += 1
        half = h.values[: mid + 1]
        best = (f, h, psi, ok)
        slopes = np.zeros(len(basis))
        for k, b in enumerate(probes):
            f_up = reduced(reduced.admissible(half + delta * b), psi)
            f_dn = reduced(reduced.admissible(half - delta * b), psi)
            for cand in (f_up, f_dn):
                if cand[0] < best[0]:
                    best = cand
            if k < len(basis) and min(f_up[0], f_dn[0]) < f:
                slopes[k] = (f_up[0] - f_dn[0]) / (2.0 * delta)
        direction = -(slopes @ basis)
        dmax = float(np.max(np.abs(direction)))
        if dmax > 0:
            direction /= dmax
            s = step
            tried = 0
            while tried < 8 and s <= 4.0:
                h_try = reduced.admissible(half + s * direction)
                if np.array_equal(h_try.values, h.values):
                    s *= 2.0
                    continue
                tried += 1
                cand = reduced(h_try, psi)
                if cand[0] < best[0]:
                    best = cand
                    step = s
                    s *= 2.0
                else:
                    break
        if best[0] < f - opts.f_tol:
            f, h, psi, ok = best
            history.append(f)
            # keep memory bounded: cached fields are only useful near the iterate
            reduced.cache.clear()
        else:
            converged = True
            break
    logger.debug("descent on %dx%d: %d steps, %d field solves", grid.nx, grid.ny, it, reduced.solves)
    return h, psi, history, converged and ok, it


def _levels(grid: Grid, multilevel: bool) -> list[Grid]:
    grids = [grid]
    if multilevel:
        g = grid
        while (g.nx - 1) % 2 == 0 and (g.ny - 1) % 2 == 0 and (g.nx - 1) // 2 + 1 >= COARSEST and (g.ny - 1) // 2 + 1 >= COARSEST:
            g = Grid(g.l, (g.nx - 1) // 2 + 1, (g.ny - 1) // 2 + 1)
            grids.append(g)
    return grids[::-1]


def run_seed(name: str, grid: Grid, opts: SolveOptions) -> tuple[SeedRun, ConvexProfile, SurfaceField] | None:
    levels = _levels(grid, opts.multilevel)
    h = seed_profile(name, levels[0])
    if h is None:
        return None
    g0 = levels[0]
    psi = feasible_field(g0, h, shifted_circle_field(g0, h))
    # initial value of the seed on the target grid
    h_fine = seed_profile(name, grid)
    initial_f = f2l(h_fine, feasible_field(grid, h_fine, shifted_circle_field(grid, h_fine))).total
    history: list = []
    total_it = 0
    converged = False
    for k, g in enumerate(levels):
        if k > 0:
            h, psi = prolong(levels[k - 1], g, h, psi.values)
        n_hats = 9 if g.nx <= 33 else 5
        h, psi, hist, converged, it = _descend(g, h, psi, opts, opts.max_outer_iters, n_hats)
        total_it += it
        history.append([float(x) for x in hist])
        logger.info("seed %s level %dx%d: F=%.10f after %d outer steps", name, g.nx, g.ny, hist[-1], it)
    # the seed itself, solved on the target grid, is a valid competitor
    f_final = f2l(h, psi).total
    seed_field, _ = minimize_psi_given_h(h_fine, feasible_field(grid, h_fine, shifted_circle_field(grid, h_fine)), opts)
    f_seed = f2l(h_fine, seed_field).total
    if f_seed < f_final:
        h, psi, f_final = h_fine, seed_field, f_seed
    run = SeedRun(name, initial_f, f_final, total_it, converged, history)
    return run, h, psi


def minimize_joint(l: float, grid: Grid | None = None, opts: SolveOptions | None = None) -> MinimizerResult:
    """Minimize the discrete functional over symmetric convex profiles and fields."""
    opts = opts or SolveOptions()
    grid = grid or build_grid(l, 129, 129)
    if not math.isclose(grid.l, l, rel_tol=0, abs_tol=0):
        raise ValueError("grid length does not match l")
    best = None
    runs = []
    for name in opts.seeds:
        t0 = time.perf_counter()
        out = run_seed(name, grid, opts)
        if out is None:
            logger.info("seed %s unavailable at l=%g", name, l)
            continue
        run, h, psi = out
        runs.append(run)
        logger.info("seed %s: F=%.10f (%.2fs)", name, run.f_value, time.perf_counter() - t0)
        if best is None or run.f_value < best[0].f_value:
            best = (run, h, psi)
    if best is None:
        raise RuntimeError("no seed available")
    run, h, psi = best
    bd = f2l(h, psi)
    return MinimizerResult(
        h_star=h,
        psi_star=psi,
        f_value=bd.total,
        breakdown=bd,
        iterations=sum(r.iterations for r in runs),
        converged=all(r.converged for r in runs),
        seed=run.seed,
        runs=runs,
    )


# ---------------------------------------------------------------------------
# threshold and sweeps

@dataclass(frozen=True)
class ThresholdEstimate:
    """Bracket ``[lo, hi]`` for the radius where the minimum reaches the flat value.

    The predicate is evaluated on a fixed grid density, so the bracket
    locates the threshold of the discrete problem, not of the continuum one.
    """

    lo: float
    hi: float
    f_lo: float
    f_hi: float
    eps: float
    grid_density: int
    evaluations: tuple = ()

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def as_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "width": self.width,
            "f_lo": self.f_lo,
            "f_hi": self.f_hi,
            "eps": self.eps,
            "grid_density": self.grid_density,
            "evaluations": [list(e) for e in self.evaluations],
        }


def estimate_threshold(
    grid_density: int = 65,
    eps: float = 1e-3,
    bracket: tuple[float, float] = (0.3, 3.0),
    opts: SolveOptions | None = None,
    width: float = 0.01,
) -> ThresholdEstimate:
    """Bisect on ``P(l) = (min F < pi - eps)`` until the bracket is at most ``width`` wide."""
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")
    if eps <= 0 or width <= 0:
        raise ValueError("eps and width must be positive")
    evaluations = []

    def value(l: float) -> float:
        res = minimize_joint(l, build_grid(l, grid_density, grid_density), opts)
        evaluations.append((l, res.f_value))
        logger.info("threshold probe l=%.6f: F=%.10f", l, res.f_value)
        return res.f_value

    f_lo = value(lo)
    if not f_lo < math.pi - eps:
        raise ValueError(f"minimum at l={lo} is {f_lo:.6f}, not below pi - eps; choose a smaller lower end")
    f_hi = value(hi)
    if f_hi < math.pi - eps:
        raise ValueError(f"minimum at l={hi} is {f_hi:.6f}, still below pi - eps; choose a larger upper end")
    while hi - lo > width:
        m = 0.5 * (lo + hi)
        f_m = value(m)
        if f_m < math.pi - eps:
            lo, f_lo = m, f_m
        else:
            hi, f_hi = m, f_m
    return ThresholdEstimate(lo, hi, f_lo, f_hi, eps, grid_density, tuple(evaluations))


@dataclass(frozen=True)
class BoundReport:
    """One row of a bound table."""

    l: float
    nx: int
    ny: int
    classical: float
    f_value: float
    bound: float
    cylinder: float
    discs: float
    catenoid_flap: float | None
    converged: bool
    seed: str
    recovery_area: float | None = None

    def as_dict(self) -> dict:
        return {
            "l": self.l,
            "nx": self.nx,
            "ny": self.ny,
            "classical": self.classical,
            "f_value": self.f_value,
            "bound": self.bound,
            "cylinder": self.cylinder,
            "discs": self.discs,
            "catenoid_flap": self.catenoid_flap,
            "converged": self.converged,
            "seed": self.seed,
            "recovery_area": self.recovery_area,
        }


def bound_report(result: MinimizerResult) -> BoundReport:
    grid = result.grid
    ex = example_bounds(grid.l)
    classical = vortex_graph_area(grid.l)
    return BoundReport(
        l=grid.l,
        nx=grid.nx,
        ny=grid.ny,
        classical=classical,
        f_value=result.f_value,
        bound=classical + result.f_value,
        cylinder=ex.cylinder,
        discs=ex.discs,
        catenoid_flap=ex.catenoid_flap,
        converged=result.converged,
        seed=result.seed,
    )


def sweep(l_values, grid_density: int = 129, opts: SolveOptions | None = None) -> list[BoundReport]:
    """Solve at every ``l`` and tabulate the bound against the example values."""
    ls = [float(v) for v in l_values]
    if any(v <= 0 for v in ls):
        raise ValueError("all l must be positive")
    rows = []
    for l in ls:
        res = minimize_joint(l, build_grid(l, grid_density, grid_density), opts)
        if not res.converged:
            logger.warning("solver did not converge at l=%g", l)
        rows.append(bound_report(res))
    return rows
