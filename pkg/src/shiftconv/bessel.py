"""Bessel functions and the Kuznetsov-type transforms built on them.

Integral representations used here:

* ``K_{2ir}(x) = int_0^inf exp(-x cosh u) cos(2 r u) du``
* ``cosh(pi r) K_{2ir}(x) = int_0^inf cos(x sinh xi) cos(2 r xi) d xi``
* ``(J_{2ir}(x) - J_{-2ir}(x)) / sinh(pi r) = (4 / (pi i)) int_0^inf cos(x cosh xi) cos(2 r xi) d xi``

The last two are oscillatory and only conditionally convergent.  They are
evaluated with Gauss-Legendre panels matched to half periods of the fast
oscillation, followed by a two-term integration-by-parts tail.

For the transforms of a compactly supported psi the x-integral is done
first: ``Psi(u) = int cos(u x) psi(x) / x dx`` decays quickly in u, so
``psi_hat(r) = 2 int_0^inf cos(2 r xi) Psi(cosh xi) d xi`` converges absolutely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidArgument, QuadratureError
from .weights import SmoothBump

__all__ = [
    "bessel_J",
    "bessel_J_series",
    "bessel_J_asymptotic",
    "bessel_J_integral",
    "bessel_J_schlafli",
    "bessel_J_complex_series",
    "bessel_K_imag",
    "bessel_K_imag_watson",
    "j_minus_combination",
    "TransformSpec",
    "psi_hat",
    "psi_hat_minus",
    "psi_hat_many",
    "psi_hat_minus_direct",
    "psi_hat_holomorphic",
    "hyperbolic_cosine_transform",
    "CosTransformTable",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_K_EXP_CUT = 36.85  # exp(-36.85) < 1e-16


def _gl_panels(edges, nodes=_GL_NODES, weights=_GL_WEIGHTS):
    """Nodes and weights of composite Gauss-Legendre over consecutive edges."""
    edges = np.asarray(edges, dtype=np.float64)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * nodes[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * weights[None, :]
    return x.ravel(), w.ravel()


# --- J of real order ----------------------------------------------------------

def bessel_J_series(order: float, x) -> np.ndarray:
    """Power series of J_order(x) summed in extended precision."""
    nu = float(order)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if nu < 0 and nu == int(nu):
        return (-1) ** int(-nu) * bessel_J_series(-nu, x)
    half = x.astype(np.longdouble) / 2
    term = np.power(half, nu) * np.longdouble(special.rgamma(nu + 1.0))
    total = term.copy()
    z = -half * half
    k = 0
    while True:
        k += 1
        term = term * z / (k * (k + nu))
        total = total + term
        if k > 5 and np.all(np.abs(term) <= 1e-21 * np.maximum(np.abs(total), 1e-300)) and k > np.max(half):
            break
        if k > 2000:
            raise QuadratureError("J series did not converge", (float(np.max(np.abs(term))),))
    return total.astype(np.float64)


def bessel_J_asymptotic(order: float, x) -> np.ndarray:
    """Hankel large-argument expansion, truncated at its smallest term."""
    nu = float(order)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    mu = 4.0 * nu * nu
    out = np.empty(len(x))
    for i, xv in enumerate(x):
        P, Qs = 0.0, 0.0
        a = 1.0  # a_k(nu) / x^k
        prev = math.inf
        k = 0
        while True:
            if abs(a) > prev or k > 200:
                break
            if k % 4 == 0:
                P += a
            elif k % 4 == 1:
                Qs += a
            elif k % 4 == 2:
                P -= a
            else:
                Qs -= a
            prev = abs(a)
            if prev < 1e-17:
                break
            k += 1
            a = a * (mu - (2 * k - 1) ** 2) / (k * 8.0 * xv)
        omega = xv - (0.5 * nu + 0.25) * math.pi
        out[i] = math.sqrt(2.0 / (math.pi * xv)) * (P * math.cos(omega) - Qs * math.sin(omega))
    return out


def bessel_J_integral(order: int, x) -> np.ndarray:
    """Bessel's integral (1/pi) int_0^pi cos(n theta - x sin theta) d theta for integer n.

    The integrand is a trigonometric polynomial in theta after periodic
    extension, so the trapezoid rule with enough points is exact to round-off.
    """
    n = int(order)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    N = 2 * int(np.max(x) + abs(n)) + 64
    theta = 2 * np.pi * np.arange(N) / N
    vals = np.cos(n * theta[None, :] - x[:, None] * np.sin(theta)[None, :])
    return vals.mean(axis=1)


def bessel_J_schlafli(order: float, x) -> np.ndarray:
    """Schlafli's integral for order >= 0:

    J_nu(x) = (1/pi) int_0^pi cos(nu theta - x sin theta) d theta
              - (sin(nu pi)/pi) int_0^inf exp(-x sinh t - nu t) dt.
    """
    nu = float(order)
    if nu < 0:
        raise InvalidArgument("Schlafli's integral is used for order >= 0 only")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty(len(x))
    s = math.sin(nu * math.pi)
    for i, xv in enumerate(x):
        th, wth = _gl_panels(np.linspace(0.0, math.pi, math.ceil((xv + nu) / 2.0) + 8))
        first = math.fsum(wth * np.cos(nu * th - xv * np.sin(th))) / math.pi
        second = 0.0
        if s != 0.0:
            T = math.asinh(40.0 / xv) if nu == 0 else min(math.asinh(40.0 / xv), 40.0 / nu)
            n_pan = max(8, math.ceil(T * (xv + nu)))
            t, wt = _gl_panels(np.linspace(0.0, T, n_pan + 1))
            second = math.fsum(wt * np.exp(-xv * np.sinh(t) - nu * t)) * s / math.pi
        out[i] = first - second
    return out


def _series_log_peak(nu: float, x: np.ndarray) -> np.ndarray:
    """log of the largest power-series term of J_nu(x)."""
    half = x / 2.0
    k = np.floor(0.5 * (-nu + np.sqrt(nu * nu + x * x)))
    return 2.0 * k * np.log(half) + nu * np.log(half) - special.gammaln(k + 1.0) - special.gammaln(k + nu + 1.0)


def bessel_J(order: float, x):
    """J_order(x) for x > 0.

    The power series is used while its largest term stays below 1e4 (so
    extended precision keeps ~1e-14 absolute accuracy) and the Hankel
    expansion for x > 20 + order^2.  In between, Bessel's integral serves
    integer orders and Schlafli's integral non-integer ones.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(xa <= 0):
        raise InvalidArgument("bessel_J needs x > 0")
    nu = float(order)
    if nu < 0 and nu == int(nu):
        out = (-1) ** int(-nu) * np.atleast_1d(bessel_J(-nu, xa))
        return out if np.ndim(x) else float(out[0])
    out = np.empty(len(xa))
    series = _series_log_peak(abs(nu), xa) <= math.log(1e4) if nu >= 0 else np.ones(len(xa), dtype=bool)
    asym = ~series & (xa > 20.0 + nu * nu)
    middle = ~series & ~asym
    if np.any(series):
        out[series] = bessel_J_series(nu, xa[series])
    if np.any(asym):
        out[asym] = bessel_J_asymptotic(nu, xa[asym])
    if np.any(middle):
        out[middle] = bessel_J_integral(int(nu), xa[middle]) if nu == int(nu) else bessel_J_schlafli(nu, xa[middle])
    return out if np.ndim(x) else float(out[0])


def bessel_J_complex_series(order: complex, x: float) -> complex:
    """J_order(x) for complex order by the power series (moderate x only)."""
    nu = complex(order)
    half = x / 2.0
    term = np.exp(nu * math.log(half)) * complex(special.rgamma(nu + 1.0))
    total = term
    k = 0
    while True:
        k += 1
        term = term * (-half * half) / (k * (k + nu))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300) and k > half:
            return complex(total)
        if k > 1000:
            raise QuadratureError("complex-order series did not converge", (abs(term),))


# --- imaginary order --------------------------------------------------------

def bessel_K_imag(r: float, x: float, panel_width: float = 0.125) -> float:
    """K_{2ir}(x) = int_0^inf exp(-x cosh u) cos(2 r u) du, truncated where the integrand drops below 1e-16."""
    if not x > 0:
        raise InvalidArgument("bessel_K_imag needs x > 0")
    umax = math.acosh(max(_K_EXP_CUT / x, 1.0)) + 0.5
    h = min(panel_width, math.pi / (4.0 * abs(r) + 1e-300))
    estimates = []
    for refine in (1, 2):
        n = max(1, math.ceil(umax / (h / refine)))
        u, w = _gl_panels(np.linspace(0.0, umax, n + 1))
        estimates.append(math.fsum(w * np.exp(-x * np.cosh(u)) * np.cos(2.0 * r * u)))
    if abs(estimates[1] - estimates[0]) > 1e-13 * max(1.0, abs(estimates[1])):
        raise QuadratureError("K integral did not converge", tuple(estimates))
    return estimates[1]


def _oscillatory_cos_integral(g, dg, x: float, s0: float, bound: float, tol: float = 1e-13) -> float:
    """int_{s0}^inf g(s) cos(x s) ds for slowly varying g with |g''| <= bound / s^3.

    Panels are half periods of cos(x s); the tail beyond S, a zero of sin(x s),
    is -g'(S) cos(x S) / x^2 with error at most bound / (S x)^3.
    """
    S = max(s0 + math.pi / x, (bound / tol) ** (1.0 / 3.0) / x)
    k0 = math.ceil(s0 * x / math.pi)
    k1 = math.ceil(S * x / math.pi)
    S = k1 * math.pi / x
    edges = np.concatenate([[s0], np.arange(k0, k1 + 1) * math.pi / x])
    edges = edges[np.concatenate([[True], np.diff(edges) > 0])]
    s, w = _gl_panels(edges)
    body = math.fsum(w * g(s) * np.cos(x * s))
    tail = -dg(S) * math.cos(x * S) / x**2
    return body + tail


def bessel_K_imag_watson(r: float, x: float) -> float:
    """K_{2ir}(x) from cosh(pi r) K_{2ir}(x) = int_0^inf cos(x sinh xi) cos(2 r xi) d xi.

    With s = sinh xi the integral becomes int_0^inf cos(x s) g(s) ds where
    g(s) = cos(2 r asinh s) / sqrt(1 + s^2).
    """
    if not x > 0:
        raise InvalidArgument("bessel_K_imag_watson needs x > 0")

    def g(s):
        return np.cos(2.0 * r * np.arcsinh(s)) / np.sqrt(1.0 + s * s)

    def dg(s):
        p2 = 1.0 / (1.0 + s * s)
        A = math.asinh(s)
        return -2.0 * r * math.sin(2.0 * r * A) * p2 - s * p2**1.5 * math.cos(2.0 * r * A)

    val = _oscillatory_cos_integral(g, dg, x, 0.0, 4.0 * r * r + 3.0)
    return val / math.cosh(math.pi * r)


def _cos_cosh_integral(r: float, x: float) -> float:
    """int_0^inf cos(x cosh xi) cos(2 r xi) d xi."""
    xi0 = math.acosh(2.0)
    h = min(0.05, math.pi / (4.0 * max(2.0 * abs(r), 2.0 * x, 1e-300)))
    n = max(4, math.ceil(xi0 / h))
    u, w = _gl_panels(np.linspace(0.0, xi0, n + 1))
    head = math.fsum(w * np.cos(x * np.cosh(u)) * np.cos(2.0 * r * u))

    def g(s):
        return np.cos(2.0 * r * np.arccosh(s)) / np.sqrt(s * s - 1.0)

    def dg(s):
        q = s * s - 1.0
        A = math.acosh(s)
        return -2.0 * r * math.sin(2.0 * r * A) / q - s * math.cos(2.0 * r * A) / q**1.5

    # |g''| <= (4 r^2 + 3) * (4/3)^{5/2} / s^3 on s >= 2
    tail = _oscillatory_cos_integral(g, dg, x, 2.0, (4.0 * r * r + 3.0) * 2.06)
    return head + tail


def j_minus_combination(r: float, x: float) -> float:
    """(J_{2ir}(x) - J_{-2ir}(x)) / (i sinh(pi r)), which is real.

    Equal to -(4/pi) int_0^inf cos(x cosh xi) cos(2 r xi) d xi; even in r.
    """
    if r == 0:
        raise InvalidArgument("j_minus_combination is not implemented at r = 0")
    if not x > 0:
        raise InvalidArgument("j_minus_combination needs x > 0")
    return -4.0 / math.pi * _cos_cosh_integral(abs(r), x)


# --- transforms of compactly supported test functions -------------------------

def _cos_transform(g, s0: float, s1: float, u: np.ndarray) -> np.ndarray:
    """G(u) = int_{s0}^{s1} g(s) cos(u s) ds for g vanishing to all orders at both ends.

    The trapezoid rule is spectrally accurate here once the grid resolves the
    highest frequency, so the node count scales with max(u).
    """
    u = np.asarray(u, dtype=np.float64)
    width = s1 - s0
    N = int(1.5 * (np.max(np.abs(u)) if u.size else 0.0) * width / math.pi) + 256
    s = s0 + width * np.arange(1, N) / N
    gs = g(s) * (width / N)
    out = np.empty(u.shape)
    step = max(1, 4_000_000 // N)
    for i in range(0, u.size, step):
        uu = u.ravel()[i : i + step]
        out.ravel()[i : i + step] = np.cos(np.multiply.outer(uu, s)) @ gs
    return out


class CosTransformTable:
    """G(u) = int_{s0}^{s1} g(s) cos(u s) ds tabulated once for many u.

    The envelope H(u) = int g(s) exp(i u (s - c)) ds with c the midpoint of
    the support only oscillates at frequency (s1 - s0)/2, so it is sampled on
    a coarse grid and read back by 14-point Lagrange interpolation;
    G(u) = Re(exp(i u c) H(u)).  The grid grows on demand.
    """

    _P = 14

    def __init__(self, g, s0: float, s1: float):
        self.g, self.s0, self.s1 = g, float(s0), float(s1)
        self.c = 0.5 * (self.s0 + self.s1)
        half = 0.5 * (self.s1 - self.s0)
        self.h = min(0.5, 0.5 / half)
        j = np.arange(self._P)
        self._lam = np.array([1.0 / np.prod([(a - b) for b in j if b != a]) for a in j])
        self._H = np.zeros(0, dtype=np.complex128)
        self._k0 = -self._P  # grid index of _H[0]

    def _extend(self, k_max: int):
        have = self._k0 + len(self._H) - 1
        if k_max <= have:
            return
        k_lo = self._k0 if len(self._H) == 0 else have + 1
        k_hi = max(k_max, 2 * have if have > 0 else 256)
        ks = np.arange(k_lo, k_hi + 1)
        u = ks * self.h
        width = self.s1 - self.s0
        N = int(1.5 * np.max(np.abs(u)) * width / math.pi) + 256
        s = self.s0 + width * np.arange(1, N) / N
        gs = self.g(s) * (width / N)
        phase = np.exp(1j * np.multiply.outer(u, s - self.c))
        self._H = np.concatenate([self._H, phase @ gs])

    def __call__(self, u) -> np.ndarray:
        u = np.abs(np.asarray(u, dtype=np.float64))
        t = u / self.h
        base = np.floor(t).astype(np.int64) - self._P // 2 + 1
        self._extend(int(base.max()) + self._P if u.size else 0)
        idx = (base - self._k0)[..., None] + np.arange(self._P)
        vals = self._H[idx]
        d = t[..., None] - (base[..., None] + np.arange(self._P))
        exact = d == 0.0
        d = np.where(exact, 1.0, d)
        wts = self._lam / d
        H = np.sum(wts * vals, axis=-1) / np.sum(wts, axis=-1)
        hit = exact.any(axis=-1)
        if np.any(hit):
            H = np.where(hit, np.sum(np.where(exact, vals, 0.0), axis=-1), H)
        return np.real(np.exp(1j * u * self.c) * H)


def _hyperbolic_nodes(g, s0, s1, r_max, kind, beta, tol, max_u, table=None):
    """Nodes xi, weights and G(beta h(xi)) covering the whole decay range of G."""
    if kind == "cosh":
        h, hinv, u0 = np.cosh, np.arccosh, beta
    elif kind == "sinh":
        h, hinv, u0 = np.sinh, np.arcsinh, 0.0
    else:
        raise InvalidArgument(f"kind must be 'cosh' or 'sinh', got {kind!r}")
    du = math.pi / (2.0 * s1)
    max_xi_width = min(0.25, math.pi / (4.0 * abs(r_max) + 1e-300))
    block = 64
    xs, ws, Gs = [], [], []
    # ||g||_1 bounds |G| everywhere; it sets the floor when G starts out small
    sg = np.linspace(s0, s1, 2049)
    gmax = float(np.abs(g(sg)).mean()) * (s1 - s0)
    k = 0
    while True:
        uk = u0 + du * np.arange(k, k + block + 1)
        edges = hinv(uk / beta)
        fine = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            m = max(1, math.ceil((b - a) / max_xi_width))
            fine.extend(a + (b - a) * np.arange(1, m + 1) / m)
        xi, w = _gl_panels(np.asarray(fine))
        G = table(beta * h(xi)) if table is not None else _cos_transform(g, s0, s1, beta * h(xi))
        xs.append(xi)
        ws.append(w)
        Gs.append(G)
        blk = float(np.max(np.abs(G)))
        gmax = max(gmax, blk)
        k += block
        if blk <= tol * gmax and k > block:
            return np.concatenate(xs), np.concatenate(ws), np.concatenate(Gs)
        if uk[-1] > max_u:
            raise QuadratureError("transform did not decay", (blk, gmax))


def hyperbolic_cosine_transform(
    g, s0: float, s1: float, r, kind: str = "cosh", beta: float = 1.0, tol: float = 1e-12, max_u: float = 1e7,
    table: CosTransformTable | None = None,
):
    """int_0^inf cos(2 r xi) G(beta h(xi)) d xi with h = cosh or sinh and G the cosine transform of g on [s0, s1].

    Panels are placed at equal steps in u = beta h(xi) (a quarter period of
    cos(u s1)), subdivided to resolve cos(2 r xi).  Integration stops once
    G has stayed below ``tol`` times max(||g||_1, running max of |G|) for a
    whole block.
    ``r`` may be an array; the node set is then shared by all entries.
    A :class:`CosTransformTable` for the same g may be passed to reuse G.
    """
    rs = np.atleast_1d(np.asarray(r, dtype=np.float64))
    xi, w, G = _hyperbolic_nodes(g, s0, s1, float(np.max(np.abs(rs))), kind, beta, tol, max_u, table)
    wG = w * G
    out = np.array([math.fsum(wG * np.cos(2.0 * rv * xi)) for rv in rs])
    return out if np.ndim(r) else float(out[0])


@dataclass(frozen=True)
class TransformSpec:
    """Test function psi with compact support in (0, inf), spectral point r and tolerance."""

    psi: SmoothBump
    r: float
    tol: float = 1e-12

    def __post_init__(self):
        if not self.psi.s0 > 0:
            raise InvalidArgument("psi must be supported in (0, inf)")


def _psi_over_x(psi: SmoothBump):
    return lambda x: psi(x) / x


def psi_hat(spec: TransformSpec) -> float:
    """psi_hat(r) = (pi i / 2) int (J_{2ir} - J_{-2ir})(x) / sinh(pi r) psi(x) x^{-1} dx.

    Computed as 2 int_0^inf cos(2 r xi) Psi(cosh xi) d xi; the limit at r = 0 is
    returned as well.
    """
    p = spec.psi
    return 2.0 * hyperbolic_cosine_transform(_psi_over_x(p), p.s0, p.s1, spec.r, "cosh", 1.0, spec.tol)


def psi_hat_many(psi: SmoothBump, rs, minus: bool = False, tol: float = 1e-12) -> np.ndarray:
    """psi_hat (or psi_hat^-) at every r in ``rs`` on one shared node set."""
    kind = "sinh" if minus else "cosh"
    return 2.0 * hyperbolic_cosine_transform(_psi_over_x(psi), psi.s0, psi.s1, np.asarray(rs, dtype=float), kind, 1.0, tol)


def psi_hat_minus(spec: TransformSpec) -> float:
    """psi_hat^-(r) = 2 cosh(pi r) int K_{2ir}(x) psi(x) x^{-1} dx via the sinh form."""
    p = spec.psi
    return 2.0 * hyperbolic_cosine_transform(_psi_over_x(p), p.s0, p.s1, spec.r, "sinh", 1.0, spec.tol)


def psi_hat_minus_direct(spec: TransformSpec, order_panels: int = 8) -> float:
    """Same quantity from the exponential K representation (cross-check; loses accuracy as r grows)."""
    p = spec.psi
    r = spec.r
    umax = math.acosh(max(_K_EXP_CUT / p.s0, 1.0)) + 0.5
    h = min(0.05, math.pi / (8.0 * abs(r) + 1e-300))
    u, wu = _gl_panels(np.linspace(0.0, umax, math.ceil(umax / h) + 1))
    x, wx = _gl_panels(np.linspace(p.s0, p.s1, order_panels + 1))
    fx = wx * p(x) / x
    inner = np.exp(-np.multiply.outer(np.cosh(u), x)) @ fx
    return 2.0 * math.cosh(math.pi * r) * math.fsum(wu * np.cos(2.0 * r * u) * inner)


def psi_hat_holomorphic(psi: SmoothBump, k: int, panels: int = 16) -> float:
    """psi_hat((1 - k) i / 2) for even k from the integral form of J_{k-1}.

    Uses (-1)^{1+k/2} int_0^pi sin(x sin theta) sin((1 - k) theta) d theta for the
    kernel, which equals pi J_{k-1}(x) (-1)^{k/2}.  Diagnostic only.
    """
    if k % 2:
        raise InvalidArgument("k must be even")
    nth = 2 * int(psi.s1 + k) + 64
    theta = (np.arange(nth) + 0.5) * math.pi / nth
    x, wx = _gl_panels(np.linspace(psi.s0, psi.s1, panels + 1))
    kern = (np.sin(np.multiply.outer(x, np.sin(theta))) @ np.sin((1 - k) * theta)) * (math.pi / nth)
    sign = (-1) ** (1 + k // 2)
    return sign * math.fsum(wx * kern * psi(x) / x)
