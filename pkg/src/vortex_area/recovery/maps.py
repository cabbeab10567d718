"""Change of variables between the cone sector and the half rectangle, and the retraction onto the circle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pair import RecoveryParams, RegularizedPair


def retraction_upsilon(p) -> np.ndarray:
    """Radial retraction ``p / |p|`` of the closed upper half plane minus the origin onto the circle.

    Accepts a point of shape ``(2,)`` or an array of points of shape ``(..., 2)``.
    """
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (2,):
        raise ValueError("points must have a trailing axis of length 2")
    x, y = p[..., 0], p[..., 1]
    if np.any(y < 0.0):
        raise ValueError("retraction is defined on the closed upper half plane")
    n = np.hypot(x, y)
    if np.any(n == 0.0):
        raise ValueError("retraction is undefined at the origin")
    return np.stack([x / n, y / n], axis=-1)


def unit(x, y):
    """Component form of :func:`retraction_upsilon` without the domain checks."""
    n = np.hypot(x, y)
    return x / n, y / n


@dataclass(frozen=True)
class ConeMaps:
    """The maps ``tau``, ``H``, ``s``, ``Theta`` and ``T = (tau, -s)`` for one index ``k``.

    ``T`` sends the truncated sector ``{r_k <= r <= l, 0 <= alpha <= theta_k}`` onto
    ``{0 <= w1 <= l, -1 <= w2 <= h_k(w1)}``; ``(H, Theta)`` is its inverse.
    """

    params: RecoveryParams
    pair: RegularizedPair

    @property
    def c(self) -> float:
        p = self.params
        return (p.l - p.r_k) / p.l

    def tau(self, r):
        p = self.params
        return p.l * (np.asarray(r, dtype=float) - p.r_k) / (p.l - p.r_k)

    def H(self, w1):
        return self.c * np.asarray(w1, dtype=float) + self.params.r_k

    def s(self, r, alpha):
        hk = self.pair.h_k(self.tau(r))
        return (1.0 + hk) * np.asarray(alpha, dtype=float) / self.params.theta - hk

    def Theta(self, w1, w2):
        hk = self.pair.h_k(w1)
        return self.params.theta * (hk - np.asarray(w2, dtype=float)) / (1.0 + hk)

    def T(self, r, alpha):
        return self.tau(r), -self.s(r, alpha)

    def T_inv(self, w1, w2):
        return self.H(w1), self.Theta(w1, w2)

    def jacobian(self, w1):
        """``|det D(H, Theta)|``, which depends on ``w1`` only."""
        return self.c * self.params.theta / (1.0 + self.pair.h_k(w1))


def build_maps_T(params: RecoveryParams, pair: RegularizedPair) -> ConeMaps:
    if pair.params != params:
        raise ValueError("pair was regularized with different parameters")
    w1 = np.unique(np.concatenate([np.linspace(0.0, params.l, 513), pair.w1_breaks()]))
    if np.any(pair.h_k(w1) <= -1.0):
        raise ValueError("h_k reaches -1, where the angle map is undefined")
    return ConeMaps(params, pair)
