"""High-precision oracles built on mpmath quadrature and bisection."""

import mpmath as mp

mp.mp.dps = 40


def vortex_area(l):
    """2 pi int_0^l sqrt(1 + r^2) dr by adaptive quadrature."""
    return 2 * mp.pi * mp.quad(lambda r: mp.sqrt(1 + r * r), [0, l])


def vortex_annulus_area(l, eps):
    """Closed-form antiderivative of 2 pi r sqrt(1 + 1/r^2) = 2 pi sqrt(1 + r^2)."""
    F = lambda r: (r * mp.sqrt(1 + r * r) + mp.asinh(r)) / 2
    return 2 * mp.pi * (F(mp.mpf(l)) - F(mp.mpf(eps)))


def catenoid_large_a(l):
    """Larger root a in (0, 1) of a cosh(l / a) = 1 by bisection, or None.

    g(a) = a cosh(l/a) - 1 has a single interior minimum; the larger root lies
    between the minimizer and a = 1 where g(1) = cosh(l) - 1 > 0.
    """
    l = mp.mpf(l)
    g = lambda a: a * mp.cosh(l / a) - 1
    lo, hi = mp.mpf("1e-6"), mp.mpf(1)
    # minimizer of g: golden-section search on (0, 1)
    a0, a1 = lo, hi
    for _ in range(300):
        m1, m2 = a0 + (a1 - a0) / 3, a1 - (a1 - a0) / 3
        if g(m1) < g(m2):
            a1 = m2
        else:
            a0 = m1
    amin = (a0 + a1) / 2
    if g(amin) > 0:
        return None
    lo, hi = amin, mp.mpf(1)
    for _ in range(300):
        mid = (lo + hi) / 2
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def critical_half_separation():
    """Largest l with a solution: tangency l = a arccosh(1/a) maximized over a."""
    f = lambda a: a * mp.acosh(1 / a)
    a0, a1 = mp.mpf("1e-6"), mp.mpf(1) - mp.mpf("1e-30")
    for _ in range(400):
        m1, m2 = a0 + (a1 - a0) / 3, a1 - (a1 - a0) / 3
        if f(m1) > f(m2):
            a1 = m2
        else:
            a0 = m1
    return f((a0 + a1) / 2)


def catenoid_areas(l, a):
    """Lateral area and flap area over [0, 2l] by quadrature of the profile."""
    l, a = mp.mpf(l), mp.mpf(a)
    rho = lambda t: a * mp.cosh((t - l) / a)
    lateral = 2 * mp.pi * mp.quad(lambda t: rho(t) * mp.sqrt(1 + mp.sinh((t - l) / a) ** 2), [0, l, 2 * l])
    flap = mp.quad(lambda t: 1 - rho(t), [0, l, 2 * l])
    return lateral, flap
