"""Reference values: the classical vortex graph area and the example surfaces.

The catenoid spanning two unit rings at ``t = 0`` and ``t = 2l`` has profile
``a * cosh((t - l) / a)`` with ``a * cosh(l / a) = 1``.  Writing ``x = l / a``
this becomes ``l * cosh(x) = x``, which has two roots below the critical
half-separation and none above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

X_TOL = 1e-15


def vortex_graph_area(l: float) -> float:
    """Area of the graph of ``x / |x|`` over the disc of radius ``l``."""
    if not l > 0:
        raise ValueError("l must be positive")
    return math.pi * (l * math.sqrt(1.0 + l * l) + math.asinh(l))


def _newton_bracketed(f, df, lo: float, hi: float, x0: float, max_iter: int = 200) -> float:
    """Newton iteration kept inside a sign-changing bracket, bisecting when it escapes."""
    f_lo = f(lo)
    x = x0
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx < 0) == (f_lo < 0):
            lo, f_lo = x, fx
        else:
            hi = x
        d = df(x)
        step_ok = d != 0.0
        if step_ok:
            x_new = x - fx / d
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= X_TOL * max(1.0, abs(x)) or hi - lo <= X_TOL * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def critical_x() -> float:
    """Root of ``x * tanh(x) = 1``: where ``x / cosh(x)`` peaks."""
    f = lambda x: x * math.tanh(x) - 1.0
    df = lambda x: math.tanh(x) + x / math.cosh(x) ** 2
    return _newton_bracketed(f, df, 0.5, 2.0, 1.2)


def critical_half_separation() -> float:
    """Largest ``l`` for which a catenoid joins rings at ``0`` and ``2l``."""
    x = critical_x()
    return x / math.cosh(x)


@dataclass(frozen=True)
class CatenoidSolution:
    """Catenoid between the unit rings at ``t = 0`` and ``t = 2l``.

    ``catenoid_area`` and ``flap_area`` are taken over the whole interval
    ``[0, 2l]``; the ``*_half`` properties restrict to ``[0, l]``.
    """

    l: float
    exists: bool
    a: float = math.nan
    catenoid_area: float = math.nan
    flap_area: float = math.nan

    @property
    def residual(self) -> float:
        return abs(self.a * math.cosh(self.l / self.a) - 1.0) if self.exists else math.nan

    @property
    def catenoid_area_half(self) -> float:
        return 0.5 * self.catenoid_area

    @property
    def flap_area_half(self) -> float:
        return 0.5 * self.flap_area

    def profile(self, t):
        import numpy as np

        return self.a * np.cosh((np.asarray(t) - self.l) / self.a)


def catenoid_areas(l: float, a: float) -> tuple[float, float]:
    """Closed-form lateral area and flap area over ``[0, 2l]``."""
    cat = math.pi * a * (2.0 * l + a * math.sinh(2.0 * l / a))
    flap = 2.0 * l - 2.0 * a * a * math.sinh(l / a)
    return cat, flap


def catenoid_roots(l: float) -> tuple[float, float] | None:
    """Both roots ``x_small <= x_large`` of ``l cosh x = x``, or None."""
    if l <= 0:
        raise ValueError("l must be positive")
    xc = critical_x()
    f = lambda x: x - l * math.cosh(x)
    df = lambda x: 1.0 - l * math.sinh(x)
    if f(xc) < 0:
        return None
    # f(0) = -l < 0 and f grows to f(xc) >= 0, then decreases to -inf.
    x_small = _newton_bracketed(f, df, 0.0, xc, 0.5 * xc)
    hi = xc + 1.0
    while f(hi) > 0:
        hi *= 2.0
    x_large = _newton_bracketed(f, df, xc, hi, hi)
    return x_small, x_large


def catenoid_parameter(l: float) -> CatenoidSolution:
    """Stable catenoid (the larger neck parameter ``a``), or a nonexistence record."""
    roots = catenoid_roots(l)
    if roots is None:
        return CatenoidSolution(l=l, exists=False)
    a = l / roots[0]
    cat, flap = catenoid_areas(l, a)
    return CatenoidSolution(l=l, exists=True, a=a, catenoid_area=cat, flap_area=flap)


@dataclass(frozen=True)
class ExampleBounds:
    l: float
    classical: float
    cylinder: float
    discs: float
    catenoid_flap: float | None

    def as_dict(self) -> dict:
        return {
            "l": self.l,
            "classical": self.classical,
            "cylinder": self.cylinder,
            "discs": self.discs,
            "catenoid_flap": self.catenoid_flap,
        }


def example_bounds(l: float) -> ExampleBounds:
    """Limit areas of the three explicit approximating sequences."""
    if l <= 0:
        raise ValueError("l must be positive")
    classical = vortex_graph_area(l)
    cat = catenoid_parameter(l)
    cf = None
    if cat.exists:
        cf = classical + cat.catenoid_area_half + 2.0 * cat.flap_area_half
    return ExampleBounds(
        l=l,
        classical=classical,
        cylinder=classical + 2.0 * math.pi * l,
        discs=classical + math.pi,
        catenoid_flap=cf,
    )
