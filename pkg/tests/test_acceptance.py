"""Acceptance criteria 1 to 9, each reported as one line in the terminal summary."""

import json
import math
import time

import numpy as np
import pytest

from vortex_area import cli
from vortex_area.baselines import (
    catenoid_parameter,
    critical_half_separation,
    example_bounds,
    vortex_graph_area,
)
from vortex_area.functional import gradient_check
from vortex_area.geometry import phi_hat
from vortex_area.optimizer import bound_report, estimate_threshold
from vortex_area.recovery import (
    AnalyticStandIn,
    DiscreteStar,
    RecoveryParams,
    RegionDecomposition,
    RegularizedPair,
    cone_area_w_form,
    convergence_study,
    example_decomposition,
    graph_area_quadrature,
    recovery_decomposition,
)
from vortex_area.recovery.study import NEGLIGIBLE_GROUPS, recovery_area

from seams import interface_points

KS = (8, 16, 32, 64)


# 1 ------------------------------------------------------------------------

def test_criterion_1_large_radius_value(joint, criterion):
    res, wall = joint(3.0)
    rep = bound_report(res)
    in_band = abs(res.f_value - math.pi) <= 0.01 * math.pi
    sums = rep.bound == vortex_graph_area(3.0) + res.f_value
    fast = wall < 60.0
    ok = criterion(1, in_band and sums and fast,
                   f"l=3, 129x129: F={res.f_value:.6f} (pi={math.pi:.6f}), bound={rep.bound:.6f}, {wall:.1f}s")
    assert ok


# 2 ------------------------------------------------------------------------

def test_criterion_2_sub_pi_regime(joint, criterion):
    res, _ = joint(0.2)
    g = res.grid
    free = res.psi_star.free_nodes()
    datum = np.broadcast_to(phi_hat(g.w2), (g.nx, g.ny))
    below = res.f_value < math.pi - 1e-3
    end = abs(res.h_star.values[0] - 1.0) <= 0.05
    under = bool(np.all(res.psi_star.values[free] < datum[free] + 1e-6))
    ok = criterion(2, below and end and under,
                   f"l=0.2: F={res.f_value:.6f}, h(0)={res.h_star.values[0]:.4f}, psi below datum: {under}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the discrete minimizer at l=0.2 has the constant profile h=1")
def test_criterion_2_profile_is_not_constant(joint, criterion):
    res, _ = joint(0.2)
    spread = float(np.ptp(res.h_star.values))
    nonconstant = spread > 1e-6
    criterion(2, nonconstant, f"h* spread {spread:.2e}")
    assert nonconstant


# 3 ------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_3_threshold_bracket(criterion):
    t0 = time.perf_counter()
    est = estimate_threshold(grid_density=65, eps=1e-3, bracket=(0.3, 3.0), width=0.01)
    wall = time.perf_counter() - t0
    ok = criterion(3, est.lo > 0.5 and est.width <= 0.01 and wall < 900,
                   f"bracket ({est.lo:.5f}, {est.hi:.5f}), width {est.width:.4f}, {wall:.0f}s")
    assert ok


# 4 ------------------------------------------------------------------------

def test_criterion_4_closed_form_oracles(frozen, criterion):
    radii = ("0.1", "0.5", "1", "2", "5")
    vortex_err = max(abs(vortex_graph_area(float(l)) / frozen["vortex_area"][l] - 1) for l in radii)
    residuals = [catenoid_parameter(float(l)).residual for l in ("0.3", "0.5", "0.6")]
    lc = critical_half_separation()
    lc_err = abs(lc - frozen["critical_half_separation"])
    absent = not catenoid_parameter(1.0).exists and lc < 1.0 and frozen["catenoid"]["1.0"] is None
    ok = criterion(4, vortex_err < 1e-10 and max(residuals) < 1e-10 and lc_err < 1e-4 and absent,
                   f"vortex rel err {vortex_err:.1e}, catenoid residual {max(residuals):.1e}, "
                   f"critical half-separation {lc:.6f} (err {lc_err:.1e}), none at l=1: {absent}")
    assert ok


# 5 ------------------------------------------------------------------------

@pytest.mark.parametrize("which,l,attr", [("two_discs", 3.0, "discs"), ("cylinder", 1.0, "cylinder")])
def test_criterion_5_example_sequences(which, l, attr, criterion):
    res = graph_area_quadrature(example_decomposition(which, l, 100))
    target = getattr(example_bounds(l), attr)
    rel = res.total / target - 1
    ok = criterion(5, res.converged and abs(rel) < 0.01,
                   f"{which} l={l:g} k=100: {res.total:.5f} vs {target:.5f} ({rel:+.2%})")
    assert ok


# 6 ------------------------------------------------------------------------

def test_criterion_6_gradient_suite(criterion):
    chk = gradient_check(seed=2024, pairs=50, max_n=17)
    ok = criterion(6, chk.max_rel_error < 1e-6 and chk.pairs == 50,
                   f"{chk.pairs} pairs up to 17x17: max rel error {chk.max_rel_error:.1e}")
    assert ok


# 7 ------------------------------------------------------------------------

@pytest.fixture(scope="module")
def analytic_rows():
    return convergence_study(1.0, KS)


@pytest.fixture(scope="module")
def discrete_star(joint):
    res, _ = joint(0.3)
    assert res.converged
    return DiscreteStar.from_result(res)


def negligible_shares(star):
    res = recovery_area(star, KS[-1])
    return {r.name: r.value / res.total for r in res.regions if r.group in NEGLIGIBLE_GROUPS}


def test_criterion_7_analytic_gap_shrinks(analytic_rows, criterion):
    gaps = [abs(r.rel_gap) for r in analytic_rows]
    shrinking = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = criterion(7, all(r.converged for r in analytic_rows) and shrinking and gaps[-1] < 0.02,
                   "analytic l=1 rel gaps " + ", ".join(f"{r.rel_gap:+.2%}" for r in analytic_rows))
    assert ok


@pytest.mark.xfail(strict=True, reason="the analytic recovery areas increase toward the bound from below")
def test_criterion_7_analytic_area_decreasing(analytic_rows, criterion):
    areas = [r.area for r in analytic_rows]
    decreasing = all(b < a for a, b in zip(areas, areas[1:]))
    criterion(7, decreasing, "analytic areas " + ", ".join(f"{a:.4f}" for a in areas))
    assert decreasing


def test_criterion_7_analytic_negligible_regions(criterion):
    shares = negligible_shares(AnalyticStandIn(1.0))
    worst = max(shares, key=shares.get)
    ok = criterion(7, shares[worst] < 0.01, f"analytic k=64 largest negligible region {worst} {shares[worst]:.2%}")
    assert ok


def test_criterion_7_discrete_gap(discrete_star, criterion):
    rows = convergence_study(0.3, KS, discrete_star)
    gaps = [abs(r.rel_gap) for r in rows]
    ok = criterion(7, all(r.converged for r in rows) and gaps[-1] < 0.02,
                   "discrete l=0.3 rel gaps " + ", ".join(f"{r.rel_gap:+.2%}" for r in rows))
    assert ok


@pytest.mark.xfail(strict=True, reason="at l=0.3 the cone annulus still holds about 1.8% of the area at k=64")
def test_criterion_7_discrete_negligible_regions(discrete_star, criterion):
    shares = negligible_shares(discrete_star)
    worst = max(shares, key=shares.get)
    criterion(7, shares[worst] < 0.01, f"discrete k=64 largest negligible region {worst} {shares[worst]:.2%}")
    assert shares[worst] < 0.01


# 8 ------------------------------------------------------------------------

def test_criterion_8_change_of_variables(criterion):
    params = RecoveryParams.default(16, 1.0)
    pair = RegularizedPair(AnalyticStandIn(1.0), params)
    cone = recovery_decomposition(params, pair).region("cone_far+")
    polar = graph_area_quadrature(RegionDecomposition(1.0, (cone,)), rel_tol=1e-9, max_level=6)
    w_form, w_ok = cone_area_w_form(pair, rel_tol=1e-9, max_level=6)
    rel = abs(polar.total / w_form - 1)
    ok = criterion(8, polar.converged and w_ok and rel < 1e-6,
                   f"k=16: (r,alpha) {polar.total:.10f} vs (w1,w2) {w_form:.10f}, rel diff {rel:.1e}")
    assert ok


# 9 ------------------------------------------------------------------------

def test_criterion_9_structural_invariants(capsys, criterion):
    worst_cover = 0.0
    for k, l in ((8, 1.0), (64, 1.0), (16, 0.3)):
        params = RecoveryParams.default(k, l)
        d = recovery_decomposition(params, RegularizedPair(AnalyticStandIn(l), params))
        worst_cover = max(worst_cover, abs(d.total_measure() / (math.pi * l * l) - 1))

    params = RecoveryParams.default(16, 1.0)
    d = recovery_decomposition(params, RegularizedPair(AnalyticStandIn(1.0), params))
    pts, n_seams, per = interface_points(d, 1000, np.random.default_rng(9))
    jump = max(float(np.max(np.linalg.norm(ua - ub, axis=1))) for ua, ub, *_ in pts)

    argv = ["recovery", "--l", "1.0", "--k-list", "8,16", "--no-timing"]
    outputs = []
    for _ in range(2):
        assert cli.main(argv) == 0
        outputs.append(capsys.readouterr().out)
    same = outputs[0] == outputs[1] and json.loads(outputs[0])["converged"]

    ok = criterion(9, worst_cover < 1e-10 and jump < 1e-6 and n_seams * per >= 1000 and same,
                   f"cover rel err {worst_cover:.1e}; {n_seams * per} seam points, max jump {jump:.1e}; "
                   f"repeated JSON identical: {same}")
    assert ok
