import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortex_area.functional import SurfaceField, f2l, support_nodes
from vortex_area.geometry import ConvexProfile, Grid, build_grid, phi_hat, subgraph_mask
from vortex_area.optimizer import (
    SolveOptions,
    bound_report,
    estimate_threshold,
    feasible_field,
    fold_gradient,
    hat_basis,
    lowest_convex_profile,
    minimize_joint,
    minimize_psi_given_h,
    mirror_columns,
    seed_profile,
    sweep,
)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 1000))
def test_fold_gradient_is_adjoint_of_mirroring(m, seed):
    rng = np.random.default_rng(seed)
    n = 2 * m + 1
    x_half = rng.standard_normal((m + 1, 3))
    g = rng.standard_normal((n, 3))
    full = mirror_columns(np.vstack([x_half, np.zeros((m, 3))]), m)
    assert np.sum(full * g) == pytest.approx(np.sum(x_half * fold_gradient(g, m)), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("bad", [dict(psi_tol=0), dict(seeds=()), dict(seeds=("torus",)), dict(h_step=-1.0)])
def test_solve_options_validation(bad):
    with pytest.raises(ValueError):
        SolveOptions(**bad)


@pytest.mark.parametrize("name", ["discs", "cylinder", "catenoid"])
def test_seed_profiles_are_admissible(name):
    g = Grid(0.4, 17, 17)
    seed_profile(name, g).check()


def test_catenoid_seed_absent_for_wide_rectangles():
    assert seed_profile("catenoid", Grid(1.0, 17, 17)) is None
    with pytest.raises(ValueError):
        seed_profile("sphere", Grid(1.0, 17, 17))


def test_hat_basis_partition_of_unity():
    b = hat_basis(9, 4)
    np.testing.assert_allclose(b.sum(axis=0), 1.0)


def test_feasible_field_respects_support_and_data():
    g = Grid(0.5, 9, 9)
    h = ConvexProfile(np.array([1.0, 0.5, 0.1, -0.2, -0.3, -0.2, 0.1, 0.5, 1.0]))
    psi = feasible_field(g, h, np.full((9, 9), 2.0))
    sup = support_nodes(g, psi.mask)
    assert np.all(psi.values[~sup] == 0.0)
    assert np.all((psi.values >= 0) & (psi.values <= 1))
    np.testing.assert_allclose(psi.values[0][sup[0]], phi_hat(g.w2)[sup[0]])
    np.testing.assert_array_equal(psi.values, psi.values[::-1])


def test_lowest_convex_profile_keeps_mask_and_lowers_integral():
    g = Grid(0.5, 9, 9)
    h = ConvexProfile(np.array([1.0, 0.9, 0.85, 0.82, 0.8, 0.82, 0.85, 0.9, 1.0]))
    low = lowest_convex_profile(g, h)
    low.check()
    assert np.all(subgraph_mask(g, low).values >= subgraph_mask(g, h).values)
    assert low.values.sum() <= h.values.sum() + 1e-12


def field_solve(l, n):
    g = Grid(l, n, n)
    h = ConvexProfile.constant(n, 1.0)
    psi, ok = minimize_psi_given_h(h, SurfaceField.with_dirichlet(g, subgraph_mask(g, h)))
    return g, psi, ok


def test_midline_height_decreases_under_refinement_for_long_rectangle():
    tops = []
    for n in (17, 33, 65):
        g, psi, ok = field_solve(3.0, n)
        assert ok
        tops.append(psi.values[g.mid].max())
    assert tops[0] > tops[1] > tops[2]
    assert tops[-1] < 0.02


@pytest.mark.parametrize("n", [17, 33])
def test_field_stays_below_datum(n):
    g, psi, ok = field_solve(0.3, n)
    assert ok
    free = psi.free_nodes()
    assert np.all(psi.values[free] < phi_hat(g.w2)[None, :].repeat(g.nx, 0)[free] + 1e-6)


def test_field_solve_lowers_energy():
    g = Grid(0.4, 17, 17)
    h = ConvexProfile.constant(17, 1.0)
    init = SurfaceField.with_dirichlet(g, subgraph_mask(g, h))
    psi, ok = minimize_psi_given_h(h, init)
    assert f2l(h, psi).total < f2l(h, init).total


def test_joint_rejects_mismatched_grid():
    with pytest.raises(ValueError):
        minimize_joint(1.0, build_grid(2.0, 17, 17))


def test_joint_small_grid_beats_every_seed_value():
    res = minimize_joint(0.3, build_grid(0.3, 17, 17))
    assert res.converged
    assert res.f_value <= min(r.initial_f for r in res.runs) + 1e-12
    assert res.f_value == pytest.approx(f2l(res.h_star, res.psi_star).total, abs=1e-14)
    res.h_star.check()
    assert res.psi_star.vanishes_above_profile()


def test_large_radius_minimizer_is_two_discs(joint):
    res, _ = joint(3.0)
    assert res.f_value == pytest.approx(math.pi, rel=0.01)
    inner = res.h_star.values[1:-1]
    assert np.max(np.abs(inner + 1.0)) <= 0.05


def test_bound_report_rows(joint):
    res, _ = joint(3.0)
    rep = bound_report(res)
    assert rep.bound == pytest.approx(rep.classical + math.pi, rel=0.01)
    assert rep.catenoid_flap is None
    assert rep.as_dict()["nx"] == 129


def test_small_radius_row_is_below_discs(joint):
    res, _ = joint(0.2)
    rep = bound_report(res)
    assert rep.bound < rep.classical + math.pi


def test_sweep_coarse():
    rows = sweep([0.3, 2.0], grid_density=17)
    assert [r.l for r in rows] == [0.3, 2.0]
    assert rows[1].f_value == pytest.approx(math.pi, abs=1e-9)
    assert rows[0].f_value < math.pi
    with pytest.raises(ValueError):
        sweep([0.3, -1.0], grid_density=17)


def test_threshold_predicate_at_ends(joint):
    assert joint(0.2)[0].f_value < math.pi - 1e-3
    assert not joint(3.0)[0].f_value < math.pi - 1e-3


def test_threshold_coarse_bracket():
    est = estimate_threshold(grid_density=17, bracket=(0.3, 3.0), width=0.05)
    assert 0.5 < est.lo < est.hi < 3.0
    assert est.width <= 0.05
    assert len(est.evaluations) >= 2


@pytest.mark.parametrize("bracket,msg", [((0.9, 3.0), "smaller lower end"), ((0.2, 0.3), "larger upper end")])
def test_threshold_bad_brackets(bracket, msg):
    with pytest.raises(ValueError, match=msg):
        estimate_threshold(grid_density=17, bracket=bracket)
