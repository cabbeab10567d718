"""Polar-rectangle regions of the disc and the recovery maps defined on them.

Angles are taken in ``[0, 2*pi]``.  The lower half of the cone around
``alpha = 0`` is represented near ``2*pi`` and evaluated by mirroring the upper
half: ``u(r, alpha) = (u1, -u2)(r, 2*pi - alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .maps import build_maps_T, unit
from .pair import RecoveryParams, RegularizedPair

TWO_PI = 2.0 * math.pi

Evaluator = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def _angle(beta):
    return np.cos(beta), np.sin(beta)


@dataclass(frozen=True)
class Region:
    """A map on the closed polar rectangle ``[r0, r1] x [a0, a1]``.

    ``r_breaks`` and ``a_breaks`` list interior lines across which the map is
    only Lipschitz; ``a_breaks_at(r)`` adds angular kinks whose position moves
    with ``r``.  Quadrature cells never straddle any of them.
    """

    name: str
    group: str
    r: tuple[float, float]
    a: tuple[float, float]
    fn: Evaluator
    r_breaks: tuple = ()
    a_breaks: tuple = ()
    a_breaks_at: Callable[[float], np.ndarray] | None = field(default=None, compare=False)

    def measure(self) -> float:
        (r0, r1), (a0, a1) = self.r, self.a
        return 0.5 * (r1 * r1 - r0 * r0) * (a1 - a0)

    def contains(self, r, a) -> np.ndarray:
        (r0, r1), (a0, a1) = self.r, self.a
        return (r >= r0) & (r <= r1) & (a >= a0) & (a <= a1)

    def __call__(self, r, a) -> np.ndarray:
        u1, u2 = self.fn(np.asarray(r, dtype=float), np.asarray(a, dtype=float))
        return np.stack(np.broadcast_arrays(u1, u2), axis=-1)

    def mirrored(self, name: str) -> "Region":
        """The reflected region ``alpha -> 2*pi - alpha`` with the conjugated map."""
        fn = self.fn

        def g(r, a):
            u1, u2 = fn(r, TWO_PI - a)
            return u1, -u2

        at = None
        if self.a_breaks_at is not None:
            inner = self.a_breaks_at
            at = lambda r: TWO_PI - np.asarray(inner(r))
        return Region(
            name=name,
            group=self.group,
            r=self.r,
            a=(TWO_PI - self.a[1], TWO_PI - self.a[0]),
            fn=g,
            r_breaks=self.r_breaks,
            a_breaks=tuple(TWO_PI - np.asarray(self.a_breaks)),
            a_breaks_at=at,
        )


@dataclass(frozen=True)
class RegionDecomposition:
    l: float
    regions: tuple

    def total_measure(self) -> float:
        return math.fsum(reg.measure() for reg in self.regions)

    def region(self, name: str) -> Region:
        for reg in self.regions:
            if reg.name == name:
                return reg
        raise KeyError(name)

    def evaluate(self, r, a) -> np.ndarray:
        """Evaluate the map, dispatching each point to the first region containing it."""
        r, a = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(a, dtype=float))
        if np.any(~np.isfinite(r)) or np.any(~np.isfinite(a)):
            raise ValueError("non-finite polar coordinates")
        if np.any(r < 0.0) or np.any(r > self.l) or np.any(a < 0.0) or np.any(a > TWO_PI):
            raise ValueError("point outside [0, l] x [0, 2*pi]")
        out = np.full(r.shape + (2,), np.nan)
        todo = np.ones(r.shape, dtype=bool)
        for reg in self.regions:
            hit = todo & reg.contains(r, a)
            if np.any(hit):
                out[hit] = reg(r[hit], a[hit])
                todo &= ~hit
        if np.any(todo):
            raise ValueError("decomposition does not cover the point")
        return out


def _in_range(x, lo, hi):
    x = np.asarray(x, dtype=float)
    return x[(x > lo) & (x < hi)]


def recovery_decomposition(params: RecoveryParams, pair: RegularizedPair) -> RegionDecomposition:
    """Twelve regions: outer part (split at ``r_k/2``), three cone pieces and two transition pieces per side."""
    P = params
    l, rk, th, thb, dl = P.l, P.r_k, P.theta, P.theta_bar, P.delta
    maps = build_maps_T(params, pair)
    lateral = pair.slice_kinks(0.0)

    def outer_far(r, a):
        return _angle(a)

    def outer_core(r, a):
        return _angle((2.0 * r / rk) * (a - math.pi) + math.pi)

    def cone_far(r, a):
        tau = maps.tau(r)
        s = maps.s(r, a)
        return s, pair.psi_k(tau, -s)

    def cone_annulus(r, a):
        sig = 2.0 * a / th - 1.0
        p1, p2 = sig, pair.psi_k(0.0, -sig)
        q1, q2 = unit(p1, p2)
        t = 2.0 * r / rk
        return (2.0 - t) * q1 + (t - 1.0) * p1, (2.0 - t) * q2 + (t - 1.0) * p2

    def cone_core(r, a):
        sig = 4.0 * r * a / (rk * th) - 1.0
        return unit(sig, pair.psi_k(0.0, -sig))

    def alpha_k(r):
        x = 4.0 * r / rk - 1.0
        c, _ = unit(x, pair.psi_k(0.0, -x))
        return np.arccos(np.clip(c, -1.0, 1.0))

    def t_inner(r, a):
        w = (thb - a) / dl
        beta = w * alpha_k(r) + (1.0 - w) * ((2.0 * r / rk) * (thb - math.pi) + math.pi)
        return _angle(beta)

    def t_outer(r, a):
        return _angle(thb * (a - th) / dl)

    def cone_far_breaks(r):
        tau = float(maps.tau(r))
        hk = float(pair.h_k(tau))
        w2 = pair.slice_kinks(tau)
        w2 = w2[w2 < hk]
        return th * (hk - w2) / (1.0 + hk)

    def cone_core_breaks(r):
        if r <= 0.0:
            return np.empty(0)
        return (1.0 - lateral) * rk * th / (4.0 * r)

    far_r_breaks = tuple(_in_range(maps.H(pair.w1_breaks()), rk, l))
    upper = [
        Region("cone_far+", "cone_far", (rk, l), (0.0, th), cone_far,
               r_breaks=far_r_breaks, a_breaks_at=cone_far_breaks),
        Region("cone_annulus+", "cone_annulus", (rk / 2, rk), (0.0, th), cone_annulus,
               a_breaks=tuple(_in_range(th * (1.0 - lateral) / 2.0, 0.0, th))),
        Region("cone_core+", "cone_core", (0.0, rk / 2), (0.0, th), cone_core,
               a_breaks_at=cone_core_breaks),
        Region("transition_inner+", "transition_inner", (0.0, rk / 2), (th, thb), t_inner,
               r_breaks=tuple(_in_range(rk * (1.0 - lateral) / 4.0, 0.0, rk / 2))),
        Region("transition_outer+", "transition_outer", (rk / 2, l), (th, thb), t_outer),
    ]
    regions = [
        Region("outer_far", "outer", (rk / 2, l), (thb, TWO_PI - thb), outer_far),
        Region("outer_core", "outer", (0.0, rk / 2), (thb, TWO_PI - thb), outer_core),
    ]
    for reg in upper:
        regions.append(reg)
        regions.append(reg.mirrored(reg.name[:-1] + "-"))
    return RegionDecomposition(l=l, regions=tuple(regions))


def eval_u_k(r, alpha, params: RecoveryParams, pair: RegularizedPair) -> np.ndarray:
    """Value of the recovery map at polar coordinates ``(r, alpha)``; trailing axis holds the two components."""
    return recovery_decomposition(params, pair).evaluate(r, alpha)
