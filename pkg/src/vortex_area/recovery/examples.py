"""Explicit approximating sequences of the vortex map: cylinder, two discs, catenoid union a flap."""

from __future__ import annotations

import math

import numpy as np

from ..baselines import catenoid_parameter
from .regions import TWO_PI, Region, RegionDecomposition, _angle

EXAMPLES = ("cylinder", "two_discs", "catenoid_flap")


def _check(l: float, k: int) -> None:
    if not l > 0:
        raise ValueError("l must be positive")
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    if not 1.0 / k < l:
        raise ValueError("need 1/k < l")


def vortex_decomposition(l: float, eps: float) -> RegionDecomposition:
    """The vortex map itself on the annulus ``eps <= r <= l``."""
    if not 0 < eps < l:
        raise ValueError("need 0 < eps < l")
    reg = Region("vortex", "outer", (eps, l), (0.0, TWO_PI), lambda r, a: _angle(a))
    return RegionDecomposition(l=l, regions=(reg,))


def cylinder_decomposition(l: float, k: int, r_k: float | None = None,
                           alpha_k: float | None = None) -> RegionDecomposition:
    """Degree-zero sequence whose graphs approach the vortex graph plus the lateral cylinder."""
    _check(l, k)
    rk = 1.0 / k if r_k is None else float(r_k)
    ak = 1.0 / k**2 if alpha_k is None else float(alpha_k)
    if not (0 < rk < l and 0 < ak < math.pi):
        raise ValueError("need 0 < r_k < l and 0 < alpha_k < pi")
    slope = (ak - math.pi) / ak

    def outer(r, a):
        return _angle(a)

    def core(r, a):
        return _angle((r / rk) * (a - math.pi) + math.pi)

    def sector(r, a):
        return _angle(slope * a + math.pi)

    def sector_core(r, a):
        return _angle((r / rk) * slope * a + math.pi)

    upper = [
        Region("sector+", "sector", (rk, l), (0.0, ak), sector),
        Region("sector_core+", "sector_core", (0.0, rk), (0.0, ak), sector_core),
    ]
    regions = [
        Region("outer", "outer", (rk, l), (ak, TWO_PI - ak), outer),
        Region("core", "core", (0.0, rk), (ak, TWO_PI - ak), core),
    ]
    for reg in upper:
        regions += [reg, reg.mirrored(reg.name[:-1] + "-")]
    return RegionDecomposition(l=l, regions=tuple(regions))


def two_discs_decomposition(l: float, k: int) -> RegionDecomposition:
    """``phi_k(r) u`` with ``phi_k`` the linear ramp from 0 at ``1/k^2`` to 1 at ``1/k``."""
    _check(l, k)
    r0, r1 = 1.0 / k**2, 1.0 / k

    def zero(r, a):
        z = np.zeros(np.broadcast(r, a).shape)
        return z, z

    def ramp(r, a):
        phi = (r - r0) / (r1 - r0)
        c, s = _angle(a)
        return phi * c, phi * s

    def outer(r, a):
        return _angle(a)

    return RegionDecomposition(l=l, regions=(
        Region("outer", "outer", (r1, l), (0.0, TWO_PI), outer),
        Region("ramp", "ramp", (r0, r1), (0.0, TWO_PI), ramp),
        Region("zero", "zero", (0.0, r0), (0.0, TWO_PI), zero),
    ))


def catenoid_flap_decomposition(l: float, k: int) -> RegionDecomposition:
    """Sequence whose graphs approach the vortex graph plus half a catenoid and a doubled flap.

    Each slice ``r = t`` of the sector ``0 < alpha < theta_k`` is sent, at
    constant speed, along the flap segment from ``(1, 0)`` to ``(rho, 0)`` and
    then along the upper half of the circle of radius ``rho``; the mirrored
    sector covers the lower half, so the slice loop has winding number zero.
    """
    _check(l, k)
    cat = catenoid_parameter(l)
    if not cat.exists:
        raise ValueError(f"no catenoid spans the rings for l = {l}")
    rk = 1.0 / k
    th = 1.0 / k**2
    thb = th + 1.0 / k
    dl = thb - th

    def rho(t):
        return cat.profile((t - rk) * l / (l - rk))

    def flap_slice(rh, a):
        length = (1.0 - rh) + math.pi * rh
        s = (th - a) / th * length
        on_seg = s <= 1.0 - rh
        phi = np.where(on_seg, 0.0, (s - (1.0 - rh)) / rh)
        x = np.where(on_seg, 1.0 - s, rh * np.cos(phi))
        y = np.where(on_seg, 0.0, rh * np.sin(phi))
        return x, y

    def sector_angle_at_rk(a):
        # at t = r_k the neck radius is 1 and the slice runs along the unit circle
        return np.where(a <= th, math.pi * (th - a) / th, thb * (a - th) / dl)

    def outer(r, a):
        return _angle(a)

    def core(r, a):
        return _angle((r / rk) * (a - math.pi) + math.pi)

    def cone(r, a):
        return flap_slice(rho(r), a)

    def cone_breaks(r):
        rh = float(rho(r))
        length = (1.0 - rh) + math.pi * rh
        return np.array([th * (1.0 - (1.0 - rh) / length)])

    def transition(r, a):
        return _angle(thb * (a - th) / dl)

    def sector_core(r, a):
        return _angle(math.pi + (r / rk) * (sector_angle_at_rk(a) - math.pi))

    upper = [
        Region("cone+", "cone", (rk, l), (0.0, th), cone, a_breaks_at=cone_breaks),
        Region("transition+", "transition", (rk, l), (th, thb), transition),
        Region("sector_core+", "sector_core", (0.0, rk), (0.0, thb), sector_core, a_breaks=(th,)),
    ]
    regions = [
        Region("outer", "outer", (rk, l), (thb, TWO_PI - thb), outer),
        Region("core", "core", (0.0, rk), (thb, TWO_PI - thb), core),
    ]
    for reg in upper:
        regions += [reg, reg.mirrored(reg.name[:-1] + "-")]
    return RegionDecomposition(l=l, regions=tuple(regions))


def example_decomposition(which: str, l: float, k: int) -> RegionDecomposition:
    if which == "cylinder":
        return cylinder_decomposition(l, k)
    if which == "two_discs":
        return two_discs_decomposition(l, k)
    if which == "catenoid_flap":
        return catenoid_flap_decomposition(l, k)
    raise ValueError(f"unknown example {which!r}; expected one of {EXAMPLES}")


def eval_example_sequence(which: str, r, alpha, k: int, l: float) -> np.ndarray:
    return example_decomposition(which, l, k).evaluate(r, alpha)
