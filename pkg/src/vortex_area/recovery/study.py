"""Convergence of the recovery areas toward the bound, and the cone area in rectangle coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..baselines import vortex_graph_area
from .maps import build_maps_T
from .pair import AnalyticStandIn, RecoveryParams, RegularizedPair
from .quadrature import QuadratureResult, graph_area_quadrature, refine, tensor_nodes
from .regions import recovery_decomposition

NEGLIGIBLE_GROUPS = ("cone_annulus", "cone_core", "transition_inner", "transition_outer")


@dataclass
class ConvergenceRow:
    k: int
    area: float
    bound: float
    groups: dict
    converged: bool

    @property
    def gap(self) -> float:
        return self.area - self.bound

    @property
    def rel_gap(self) -> float:
        return self.gap / self.bound

    def as_dict(self) -> dict:
        return {"k": self.k, "area": self.area, "bound": self.bound, "gap": self.gap,
                "rel_gap": self.rel_gap, "converged": self.converged, "groups": dict(self.groups)}


def recovery_area(star, k: int, order: int = 4, rel_tol: float = 1e-4, max_level: int = 4,
                  workers: int = 1) -> QuadratureResult:
    params = RecoveryParams.default(k, star.l)
    pair = RegularizedPair(star, params)
    return graph_area_quadrature(recovery_decomposition(params, pair), order=order,
                                 rel_tol=rel_tol, max_level=max_level, workers=workers)


def convergence_study(l: float, ks, star=None, order: int = 4, rel_tol: float = 1e-4,
                      max_level: int = 4, workers: int = 1) -> list[ConvergenceRow]:
    """Recovery area for each ``k`` against ``classical + F`` of the pair (default: the analytic stand-in)."""
    ks = [int(k) for k in ks]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k list must be strictly increasing")
    star = AnalyticStandIn(l) if star is None else star
    if not math.isclose(star.l, l, rel_tol=0.0, abs_tol=1e-15):
        raise ValueError("pair source uses a different l")
    bound = vortex_graph_area(l) + star.f_value
    rows = []
    for k in ks:
        res = recovery_area(star, k, order, rel_tol, max_level, workers)
        rows.append(ConvergenceRow(k=k, area=res.total, bound=bound, groups=res.by_group(),
                                   converged=res.converged))
    return rows


def cone_area_w_form(pair: RegularizedPair, order: int = 4, rel_tol: float = 1e-10,
                     max_level: int = 4) -> tuple[float, bool]:
    """Graph area over the far cone piece, integrated over the subgraph of ``h_k`` in ``(w1, w2)``.

    The integrand is ``sqrt(I + II + III + IV + V + VI)`` with the six terms
    below; the Jacobian of the change of variables is already absorbed.
    """
    params = pair.params
    maps = build_maps_T(params, pair)
    c = maps.c
    th = params.theta

    def level(L: int) -> float:
        W1, W2, W, *_ = tensor_nodes(
            (0.0, params.l), pair.w1_breaks(), None, (), pair.slice_kinks, order, L,
            y_bounds=lambda x: (-1.0, float(pair.h_k(x))))
        hk = pair.h_k(W1)
        dh = pair.h_k_slope(W1)
        q = th / (1.0 + hk)
        H = maps.H(W1)
        m = (1.0 + W2) / (1.0 + hk)
        p1, p2 = pair.psi_k_grad(W1, W2)
        terms = (
            (c * q * H) ** 2,
            (q * m * H * dh) ** 2,
            (q * H) ** 2 * (m * m * dh * dh * p2 * p2 + 2.0 * m * dh * p2 * p1 + p1 * p1),
            np.full_like(W1, c * c),
            (c * p2) ** 2,
            p1 * p1,
        )
        return float(np.sum(W * np.sqrt(sum(terms))))

    value, _, ok = refine(level, rel_tol, max_level)
    return value, ok
