"""Compactly supported C-infinity weights built from one glue function.

All bumps share the smooth step ``h(t) = g(t) / (g(t) + g(1 - t))`` with
``g(t) = exp(-1/t)`` for ``t > 0``.  Because ``h(t) + h(1 - t) == 1``, a falling
edge and a rising edge placed on the same interval sum to one, which is how
the dyadic partition telescopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidArgument

__all__ = [
    "smooth_step",
    "SmoothBump",
    "make_bump",
    "NuFunction",
    "make_nu",
    "dyadic_partition",
    "weight_w_K",
]


def _g(t):
    """exp(-1/t) for t > 0 and its first two derivatives, zero for t <= 0."""
    t = np.asarray(t, dtype=np.float64)
    pos = t > 0
    ts = np.where(pos, t, 1.0)
    e = np.where(pos, np.exp(-1.0 / ts), 0.0)
    d1 = np.where(pos, e / ts**2, 0.0)
    d2 = np.where(pos, e * (1.0 - 2.0 * ts) / ts**4, 0.0)
    return e, d1, d2


def smooth_step(t, order: int = 0):
    """Smooth step h rising from 0 at t <= 0 to 1 at t >= 1, or its derivative."""
    t = np.clip(np.asarray(t, dtype=np.float64), -1.0, 2.0)
    a, a1, a2 = _g(t)
    b, b1, b2 = _g(1.0 - t)
    # d/dt of g(1 - t) flips the sign of odd derivatives
    b1 = -b1
    s = a + b
    if order == 0:
        return a / s
    s1 = a1 + b1
    if order == 1:
        return (a1 * s - a * s1) / s**2
    if order == 2:
        s2 = a2 + b2
        return (a2 * s - a * s2) / s**2 - 2.0 * s1 * (a1 * s - a * s1) / s**3
    raise InvalidArgument(f"smooth_step supports order 0..2, got {order}")


@dataclass(frozen=True)
class SmoothBump:
    """Weight equal to ``height`` on [p0, p1], zero outside [s0, s1].

    The rising edge is ``h((x - s0)/(p0 - s0))`` and the falling edge is
    ``h((s1 - x)/(s1 - p1))``.
    """

    s0: float
    p0: float
    p1: float
    s1: float
    height: float = 1.0

    def __post_init__(self):
        if not (self.s0 < self.p0 <= self.p1 < self.s1):
            raise InvalidArgument(
                f"need s0 < p0 <= p1 < s1, got {(self.s0, self.p0, self.p1, self.s1)}"
            )
        if not self.height > 0:
            raise InvalidArgument(f"height must be positive, got {self.height}")

    @property
    def support(self) -> tuple[float, float]:
        return (self.s0, self.s1)

    @property
    def plateau(self) -> tuple[float, float]:
        return (self.p0, self.p1)

    @property
    def transition_width(self) -> float:
        """Width of the narrower edge, the scale in the derivative bounds."""
        return min(self.p0 - self.s0, self.s1 - self.p1)

    def __call__(self, x, order: int = 0):
        """Value (order 0) or derivative of the given order at ``x``."""
        if order > 2:
            return self._fd_derivative(x, order)
        x = np.asarray(x, dtype=np.float64)
        wl = self.p0 - self.s0
        wr = self.s1 - self.p1
        left = smooth_step((x - self.s0) / wl, order) / wl**order
        right = smooth_step((self.s1 - x) / wr, order) * (-1.0 / wr) ** order
        if order == 0:
            val = np.where(x < self.p0, left, np.where(x > self.p1, right, 1.0))
        else:
            val = np.where(x < self.p0, left, np.where(x > self.p1, right, 0.0))
        val = self.height * val
        return val if val.ndim else float(val)

    def derivative(self, x, order: int = 1):
        return self(x, order)

    def _fd_derivative(self, x, order):
        # central differences applied to the analytic second derivative
        h = 1e-3 * self.transition_width
        x = np.asarray(x, dtype=np.float64)
        f = lambda y: self(y, order - 1) if order - 1 <= 2 else self._fd_derivative(y, order - 1)
        return (f(x + h) - f(x - h)) / (2.0 * h)

    def integral(self) -> float:
        """Closed form: plateau plus half of each edge (since int_0^1 h = 1/2)."""
        return self.height * ((self.p1 - self.p0) + 0.5 * (self.p0 - self.s0) + 0.5 * (self.s1 - self.p1))

    def quad_integral(self) -> float:
        """Adaptive quadrature of the bump, split at the kinks of the piecewise formula."""
        pts = [self.s0, self.p0, self.p1, self.s1]
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if b > a:
                total += integrate.quad(lambda y: float(self(y)), a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
        return total

    def scaled(self, factor: float) -> "SmoothBump":
        return SmoothBump(self.s0, self.p0, self.p1, self.s1, self.height * factor)


def make_bump(s0: float, p0: float, p1: float, s1: float, height: float = 1.0) -> SmoothBump:
    return SmoothBump(float(s0), float(p0), float(p1), float(s1), float(height))


@dataclass(frozen=True)
class NuFunction:
    """Circle-method bump on [-Delta, -Delta/2] normalised so int nu = 2 Delta."""

    delta: float
    bump: SmoothBump

    @property
    def height(self) -> float:
        return self.bump.height

    def __call__(self, x, order: int = 0):
        return self.bump(x, order)

    def periodic(self, x):
        """Period-one extension nu*(x)."""
        x = np.asarray(x, dtype=np.float64)
        y = x - np.floor(x + 0.5)
        return self.bump(y)


def make_nu(delta: float) -> NuFunction:
    """Single up-down bump on [-Delta, -Delta/2], peak at -3 Delta/4."""
    if not 0 < delta < 1.0 / 3.0:
        raise InvalidArgument(f"Delta must lie in (0, 1/3), got {delta}")
    mid = -0.75 * delta
    unit = make_bump(-delta, mid, mid, -0.5 * delta, 1.0)
    height = 2.0 * delta / unit.quad_integral()
    return NuFunction(float(delta), unit.scaled(height))


def dyadic_partition(U1: float) -> list[SmoothBump]:
    """Bumps g_delta on [1, 2] whose widths double away from both endpoints.

    The j-th bump from the left (delta_j = 2^j U1) rises on
    [a_j, a_j + delta_j], is flat for another delta_j and falls on the
    rising interval of bump j+1, of width 2 delta_j, where
    a_j = 1 + 2 U1 (2^j - 1).  The right-hand chain mirrors this about 3/2 and
    a middle bump joins the two chains.  The sum is exactly 1 on
    [1 + U1, 2 - U1].
    """
    if not 0 < U1 <= 0.25:
        raise InvalidArgument(f"U1 must lie in (0, 1/4], got {U1}")
    J = 0
    while U1 * (3 * 2 ** (J + 1) - 2) <= 0.5:
        J += 1

    def a(j):
        return 1.0 + 2.0 * U1 * (2**j - 1)

    left = []
    for j in range(J):
        dj = 2**j * U1
        left.append(make_bump(a(j), a(j) + dj, a(j + 1), a(j + 1) + 2 * dj))
    right = [make_bump(3.0 - b.s1, 3.0 - b.p1, 3.0 - b.p0, 3.0 - b.s0) for b in left]
    dJ = 2**J * U1
    middle = make_bump(a(J), a(J) + dJ, 3.0 - a(J) - dJ, 3.0 - a(J))
    return left + [middle] + right[::-1]


def dyadic_scales(U1: float) -> list[float]:
    """delta label of each bump returned by :func:`dyadic_partition`, same order."""
    bumps = dyadic_partition(U1)
    J = (len(bumps) - 1) // 2
    scales = [2**j * U1 for j in range(J)]
    return scales + [2**J * U1] + scales[::-1]


def weight_w_K(K: float, B: float = 0.5, C: float = 3.0) -> SmoothBump:
    """Generic w_K: 1 on [K, 2K], supported in [B K, C K]."""
    if not (K > 0 and 0 < B < 1 and C > 2):
        raise InvalidArgument("need K > 0, 0 < B < 1 and C > 2")
    return make_bump(B * K, K, 2.0 * K, C * K)


def bump_integral_check(bump: SmoothBump) -> float:
    """Relative gap between closed-form and quadrature integrals (diagnostic)."""
    exact = bump.integral()
    return abs(bump.quad_integral() - exact) / exact if exact else math.nan
