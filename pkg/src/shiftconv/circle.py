"""Circle-method approximation chi* of the constant 1 on the unit circle.

Conventions used throughout:

* ``nu*(x) = sum_beta a_beta e(-beta x)``, i.e. ``a_beta = int_0^1 nu*(x) e(beta x) dx``.
* ``E = 1 - chi* = sum_{xi != 0} c_xi e(-xi x)`` with
  ``c_xi = -a_{-xi} G(xi) / lambda`` and ``G(xi) = sum_q w(q) c_q(xi)``.
* ``psi(x) = sum_h b_h e(h x)``, so ``b_f = int psi(x) e(-f x) dx`` and
  ``b*_f = int chi* psi e(-f x) dx = b_f - sum_xi c_xi b_{f + xi}``.
* ``d_xi(k)`` are the coefficients of ``E + E^2 + ... + E^k`` in the same basis,
  which gives ``b_f = b*_f + sum_xi d_xi b*_{f + xi}`` up to the E^{k+1} term.

Coefficient arrays are stored on the symmetric window ``-B..B`` where B is
the bandwidth beyond which ``|a_beta|`` is negligible.  Grid evaluations
are split into fixed chunks that are reduced in chunk order, so results do
not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arith import build_tables
from .errors import InvalidArgument, QuadratureError
from .forms import HeckeCoeffTable
from .kloosterman import exp_sum_S
from .weights import NuFunction, SmoothBump, make_bump, make_nu

__all__ = [
    "CircleApprox",
    "ShiftedCoeffProblem",
    "ReconstructionResult",
    "TruncationWarning",
    "build_circle_approx",
    "chi_star",
    "chi_star_grid",
    "variance_V",
    "parseval_variance",
    "e_sup_norm",
    "b_f_direct",
    "b_f_star",
    "b_f_star_direct",
    "lemma1_residual",
    "standard_problem",
]

A_REL_TOL = 1e-15   # |a_beta| / a_0 below this is dropped from the bandwidth
CHUNK = 2048        # rationals per scatter chunk, fixed for reproducibility


class TruncationWarning(UserWarning):
    """Emitted when a frequency cutoff drops terms above tolerance."""


@dataclass(frozen=True, eq=False)
class CircleApprox:
    """A configured approximation with its cached Fourier data.

    Attributes:
        Q: size parameter, q runs over the support of ``w`` in [Q, 2Q].
        delta2: exponent with Delta = Q^{-1 + delta2}.
        Delta: bump width parameter.
        w: weight on the moduli.
        nu: the bump on [-Delta, -Delta/2].
        Lambda: sum_q w(q) phi(q).
        lam: 2 Delta Lambda.
        k: largest depth for which ``d`` is cached.
        xi_cutoff: |xi| range used in the b* and reconstruction sums.
        bandwidth: B, coefficient arrays are indexed by xi + B.
        a: a_beta for |beta| <= B.
        c: c_xi for |xi| <= B (c_0 = 0).
        d: ``d[j]`` holds d_xi(j) for |xi| <= B, j = 1..k.
        rationals, weights: the points a/q in [0, 1) and w(q) per point.
    """

    Q: float
    delta2: float
    Delta: float
    w: SmoothBump
    nu: NuFunction
    Lambda: float
    lam: float
    k: int
    xi_cutoff: int
    bandwidth: int
    a: np.ndarray
    c: np.ndarray
    d: dict = field(repr=False)
    G: np.ndarray = field(repr=False)
    rationals: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    fft_size: int = 0

    @property
    def lambda_(self) -> float:
        return self.lam

    def a_beta(self, beta: int) -> complex:
        return complex(self.a[beta + self.bandwidth]) if abs(beta) <= self.bandwidth else 0j

    def c_xi(self, xi: int) -> complex:
        return complex(self.c[xi + self.bandwidth]) if abs(xi) <= self.bandwidth else 0j

    def d_xi(self, xi: int, k: int | None = None) -> complex:
        k = self.k if k is None else k
        return complex(self.d[k][xi + self.bandwidth]) if abs(xi) <= self.bandwidth else 0j

    def c_window(self, lo: int, hi: int) -> np.ndarray:
        """c_xi for lo <= xi <= hi, zero outside the bandwidth."""
        return _window(self.c, self.bandwidth, lo, hi)

    def Lambda_over_Q2(self) -> float:
        return self.Lambda / self.Q**2

    def c_bound_constant(self) -> float:
        """max over 0 < |xi| <= B of |c_xi| / (Q |a_xi| d(xi) / lambda), where a_xi != 0."""
        B = self.bandwidth
        xi = np.arange(-B, B + 1)
        dc = build_tables(B).divisor_count
        denom = self.Q * np.abs(self.a) * dc[np.abs(xi)] / self.lam
        ok = (xi != 0) & (np.abs(self.a) > 0)
        return float(np.max(np.abs(self.c[ok]) / denom[ok]))

    def d_bound_constant(self, k: int | None = None) -> float:
        """max over 0 < |xi| <= xi_cutoff of |d_xi(k)| Q / d(xi)."""
        k = self.k if k is None else k
        X = min(self.xi_cutoff, self.bandwidth)
        dc = build_tables(max(X, 1)).divisor_count
        xi = np.arange(1, X + 1)
        vals = np.maximum(np.abs(self.d[k][self.bandwidth + xi]), np.abs(self.d[k][self.bandwidth - xi]))
        return float(np.max(vals * self.Q / dc[xi]))


def _window(arr, B, lo, hi):
    out = np.zeros(hi - lo + 1, dtype=arr.dtype)
    s, e = max(lo, -B), min(hi, B)
    if s <= e:
        out[s - lo : e - lo + 1] = arr[s + B : e + B + 1]
    return out


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _a_coefficients(nu: NuFunction, max_size: int = 1 << 22) -> np.ndarray:
    """a_beta on the full FFT grid by the periodic trapezoid rule, refined until the tail is negligible."""
    M = _next_pow2(int(64 / nu.delta))
    while True:
        samples = nu.periodic(np.arange(M) / M)
        a = np.fft.ifft(samples)
        tail = np.abs(a[M // 4 : 3 * M // 4 + 1]).max()
        if tail <= A_REL_TOL * abs(a[0]):
            return a
        if M >= max_size:
            raise QuadratureError("a_beta did not converge", (tail, abs(a[0])))
        M *= 2


def _moduli_weights(w: SmoothBump, Q: float):
    qs = np.arange(math.ceil(Q), math.floor(2 * Q) + 1)
    wq = w(qs.astype(np.float64))
    keep = wq > 0
    return qs[keep], wq[keep]


def _G_table(qs, wq, B: int, mobius) -> np.ndarray:
    """G(xi) for 0 <= xi <= B via G(xi) = sum_{d | xi} d g(d), g(d) = sum_r w(d r) mu(r)."""
    qmax = int(qs.max())
    wfull = np.zeros(qmax + 1)
    wfull[qs] = wq
    G = np.zeros(B + 1)
    for d in range(1, qmax + 1):
        r = np.arange(1, qmax // d + 1)
        g = math.fsum(wfull[d * r] * mobius[r])
        if g != 0.0:
            G[::d] += d * g
    return G


def _rationals(qs, wq):
    pts, wts = [], []
    for q, wv in zip(qs, wq):
        q = int(q)
        a = np.array([x for x in range(q) if math.gcd(x, q) == 1], dtype=np.float64)
        pts.append(a / q)
        wts.append(np.full(len(a), wv))
    pts = np.concatenate(pts)
    wts = np.concatenate(wts)
    order = np.argsort(pts, kind="stable")
    return pts[order], wts[order]


def build_circle_approx(
    Q: float,
    delta2: float = 0.1,
    k: int = 3,
    xi_cutoff: int | None = None,
    w: SmoothBump | None = None,
) -> CircleApprox:
    """Build chi* and cache a_beta, c_xi and d_xi(1..k).

    Args:
        Q: size parameter, at least 4.
        delta2: Delta = Q^{-1 + delta2} must land in (0, 1/3).
        k: convolution depth for d_xi.
        xi_cutoff: |xi| range for b* sums, default 4 ceil(Q).
        w: weight on moduli, default bump on [Q, 2Q] with plateau [1.25Q, 1.75Q].
    """
    if not Q >= 4:
        raise InvalidArgument(f"Q must be at least 4, got {Q}")
    if int(k) != k or k < 1:
        raise InvalidArgument(f"depth k must be a positive integer, got {k}")
    if not delta2 > 0:
        raise InvalidArgument(f"delta2 must be positive, got {delta2}")
    Delta = Q ** (-1.0 + delta2)
    if not 0 < Delta < 1.0 / 3.0:
        raise InvalidArgument(f"Delta = Q^(-1+delta2) = {Delta} is not in (0, 1/3)")
    xi_cutoff = 4 * math.ceil(Q) if xi_cutoff is None else int(xi_cutoff)
    if xi_cutoff < Q:
        warnings.warn(f"xi_cutoff={xi_cutoff} is below Q={Q}", TruncationWarning, stacklevel=2)

    nu = make_nu(Delta)
    if w is None:
        w = make_bump(Q, 1.25 * Q, 1.75 * Q, 2 * Q)
    qs, wq = _moduli_weights(w, Q)
    if len(qs) == 0:
        raise InvalidArgument("w vanishes on every integer modulus")
    tables = build_tables(int(qs.max()) + 1)
    Lambda = math.fsum(wq * tables.totient[qs])
    lam = 2.0 * Delta * Lambda

    a_full = _a_coefficients(nu)
    Ma = len(a_full)
    idx = np.nonzero(np.abs(a_full) > A_REL_TOL * abs(a_full[0]))[0]
    signed = np.where(idx <= Ma // 2, idx, idx - Ma)
    B = max(int(np.abs(signed).max()) + 1, xi_cutoff + 1)
    beta = np.arange(-B, B + 1)
    a = np.where(np.abs(beta) < Ma // 2, a_full[beta % Ma], 0.0)

    G = _G_table(qs, wq, B, tables.mobius)
    c = -a[::-1] * G[np.abs(beta)] / lam  # a[::-1] is a_{-xi}
    c[B] = 0.0

    # powers of E on a grid large enough that E^j has no aliasing on |xi| <= B
    Mg = _next_pow2((k + 1) * (2 * B + 1))
    carr = np.zeros(Mg, dtype=np.complex128)
    carr[beta % Mg] = c
    E = np.fft.fft(carr)
    d = {}
    Ej = np.ones(Mg, dtype=np.complex128)
    acc = np.zeros(Mg, dtype=np.complex128)
    for j in range(1, k + 1):
        Ej = Ej * E
        acc = acc + np.fft.ifft(Ej)
        dj = acc[beta % Mg].copy()
        if j == 1:
            dj = c.copy()  # E itself, without FFT round-off
        d[j] = dj

    pts, wts = _rationals(qs, wq)
    return CircleApprox(
        Q=float(Q), delta2=float(delta2), Delta=Delta, w=w, nu=nu, Lambda=Lambda, lam=lam,
        k=int(k), xi_cutoff=xi_cutoff, bandwidth=B, a=a, c=c, d=d, G=G,
        rationals=pts, weights=wts, fft_size=Mg,
    )


# --- evaluation of chi* ------------------------------------------------------

def chi_star(approx: CircleApprox, x):
    """chi*(x) = lambda^{-1} sum_q w(q) sum_{(a,q)=1} nu*(a/q - x).

    Only rationals with a/q in [x - Delta, x - Delta/2] (mod 1) contribute;
    they are located by binary search in the sorted list.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty(len(xs))
    pts, wts = approx.rationals, approx.weights
    D = approx.Delta
    for i, xv in enumerate(xs):
        total = 0.0
        for shift in (-1.0, 0.0, 1.0):
            lo = np.searchsorted(pts, xv - D + shift, side="left")
            hi = np.searchsorted(pts, xv - 0.5 * D + shift, side="right")
            if hi > lo:
                y = pts[lo:hi] - xv - shift
                total += math.fsum(wts[lo:hi] * approx.nu(y))
        out[i] = total / approx.lam
    return out if np.ndim(x) else float(out[0])


def _scatter_chunk(approx, M, start, stop):
    pts = approx.rationals[start:stop]
    wts = approx.weights[start:stop]
    D = approx.Delta
    # grid points x_i = i/M with rho - x_i in [-D, -D/2], i.e. x_i in [rho + D/2, rho + D]
    i0 = np.ceil((pts + 0.5 * D) * M).astype(np.int64)
    width = int(math.floor(0.5 * D * M)) + 2
    idx = i0[:, None] + np.arange(width)[None, :]
    y = pts[:, None] - idx / M
    vals = wts[:, None] * approx.nu(y)
    return np.bincount((idx % M).ravel(), weights=vals.ravel(), minlength=M)


def chi_star_grid(approx: CircleApprox, M: int, workers: int = 1) -> np.ndarray:
    """chi* at x_i = i/M, i = 0..M-1, by scattering each rational's bump onto the grid."""
    n = len(approx.rationals)
    bounds = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _scatter_chunk(approx, M, *b), bounds))
    else:
        parts = [_scatter_chunk(approx, M, *b) for b in bounds]
    total = np.zeros(M)
    for p in parts:  # fixed chunk order
        total += p
    return total / approx.lam


def variance_V(
    approx: CircleApprox, M0: int = 1 << 12, rtol: float = 1e-10, max_points: int = 1 << 20, workers: int = 1
) -> float:
    """V = int_0^1 (chi* - 1)^2 by the periodic trapezoid rule with grid doubling."""
    M = _next_pow2(max(M0, int(8 / approx.Delta)))
    prev = None
    estimates = []
    while M <= max_points:
        e = chi_star_grid(approx, M, workers) - 1.0
        V = math.fsum(e * e) / M
        estimates.append(V)
        if prev is not None and abs(V - prev) <= rtol * abs(V):
            return V
        prev = V
        M *= 2
    raise QuadratureError("variance quadrature did not converge", tuple(estimates[-2:]))


def parseval_variance(approx: CircleApprox, cutoff: int | None = None) -> float:
    """sum_{|xi| <= cutoff} |c_xi|^2, the L^2 norm of E seen through its coefficients."""
    B = approx.bandwidth
    X = B if cutoff is None else min(int(cutoff), B)
    return math.fsum(np.abs(approx.c[B - X : B + X + 1]) ** 2)


def e_sup_norm(approx: CircleApprox, grid: int = 1 << 16, workers: int = 1) -> float:
    """max over x_i = i/grid of |1 - chi*(x_i)|."""
    return float(np.abs(1.0 - chi_star_grid(approx, grid, workers)).max())


def e_on_grid(approx: CircleApprox, M: int) -> np.ndarray:
    """E(i/M) from the coefficients c_xi (independent of the scatter path when M > 2B)."""
    B = approx.bandwidth
    xi = np.arange(-B, B + 1)
    carr = np.zeros(M, dtype=np.complex128)
    np.add.at(carr, xi % M, approx.c)
    return np.fft.fft(carr)


# --- shifted convolution coefficients -----------------------------------------

@dataclass(frozen=True, eq=False)
class ShiftedCoeffProblem:
    """psi_n(x) = S(W0, x) S(W, -x) for one coefficient table and base point n."""

    coeffs: HeckeCoeffTable
    n: int
    W: SmoothBump
    W0: SmoothBump
    L: float | None = None
    delta: float | None = None
    F: int | None = None

    def __post_init__(self):
        top = max(self.W.s1, self.W0.s1)
        if min(self.W.s0, self.W0.s0) < 1 or top > self.coeffs.n_max:
            raise InvalidArgument(f"weight supports exceed coefficient table range [1, {self.coeffs.n_max}]")

    @property
    def m_range(self) -> np.ndarray:
        return np.arange(math.ceil(self.W.s0), math.floor(self.W.s1) + 1)

    @property
    def frequency_window(self) -> tuple[int, int]:
        """All h with possibly nonzero b_h."""
        return (math.ceil(self.W0.s0) - math.floor(self.W.s1), math.floor(self.W0.s1) - math.ceil(self.W.s0))

    def b_vector(self) -> tuple[int, np.ndarray]:
        """(h_min, array of b_h for h_min <= h <= h_max)."""
        lo, hi = self.frequency_window
        return lo, np.array([b_f_direct(self, h) for h in range(lo, hi + 1)])

    def psi(self, x):
        return exp_sum_S(self.W0, self.coeffs, x) * exp_sum_S(self.W, self.coeffs, -np.asarray(x))

    def psi_sup(self, grid: int = 4096) -> float:
        """sup |psi| from a uniform grid through the trigonometric polynomial of b_h."""
        lo, b = self.b_vector()
        hs = np.arange(lo, lo + len(b))
        if not np.any(b):
            return 0.0
        M = max(grid, _next_pow2(4 * len(b)))
        arr = np.zeros(M)
        np.add.at(arr, hs % M, b)
        # sum_h b_h e(h x_i) = M * ifft
        return float(np.abs(np.fft.ifft(arr) * M).max())


def standard_problem(coeffs: HeckeCoeffTable, n: int = 1000, L: int = 64, delta: float = 0.125) -> ShiftedCoeffProblem:
    """W on [n + L, n + (1 + delta) L] and W0 covering it with F = delta L of room for shifts."""
    dL = delta * L
    F = int(round(dL))
    W = make_bump(n + L, n + L + dL / 4, n + L + 3 * dL / 4, n + (1 + delta) * L)
    W0 = make_bump(n + L - dL / 2, n + L, n + (1 + delta) * L + F, n + (1 + delta) * L + F + dL / 2)
    return ShiftedCoeffProblem(coeffs, n, W, W0, L, delta, F)


def b_f_direct(problem: ShiftedCoeffProblem, f: int) -> float:
    """b_f = sum_m t(m) t(m + f) W(m) W0(m + f)."""
    m = problem.m_range
    mf = m + int(f)
    ok = (mf >= 1) & (mf <= problem.coeffs.n_max)
    m, mf = m[ok], mf[ok]
    t = problem.coeffs.t
    terms = t[m] * t[mf] * problem.W(m.astype(np.float64)) * problem.W0(mf.astype(np.float64))
    return math.fsum(terms)


def _b_star_many(approx: CircleApprox, hmin: int, b: np.ndarray, gs: np.ndarray) -> np.ndarray:
    """b*_g = b_g - sum_h c_{h - g} b_h for each g in gs."""
    hs = np.arange(hmin, hmin + len(b))
    diff = hs[None, :] - gs[:, None]
    B = approx.bandwidth
    inside = np.abs(diff) <= B
    cmat = np.where(inside, approx.c[np.clip(diff + B, 0, 2 * B)], 0.0)
    bg = np.where((gs >= hmin) & (gs < hmin + len(b)), b[np.clip(gs - hmin, 0, len(b) - 1)], 0.0)
    return bg - cmat @ b


def b_f_star(problem: ShiftedCoeffProblem, approx: CircleApprox, f: int, tol: float = 1e-12) -> complex:
    """b*_f = b_f - sum_{0 < |xi| <= xi_cutoff} c_xi b_{f + xi}.

    b_h vanishes outside a finite window, so the sum is finite; when the
    cutoff excludes part of that window the dropped mass is estimated and a
    :class:`TruncationWarning` is emitted if it exceeds ``tol``.
    The value is complex in general since nu is not even.
    """
    hmin, b = problem.b_vector()
    hs = np.arange(hmin, hmin + len(b))
    xi = hs - f
    keep = (np.abs(xi) <= approx.xi_cutoff) & (xi != 0)
    cs = np.array([approx.c_xi(int(s)) for s in xi])
    dropped = float(np.sum(np.abs(cs[~keep & (xi != 0)] * b[~keep & (xi != 0)])))
    if dropped > tol:
        warnings.warn(f"xi_cutoff drops terms of total size {dropped:.3e}", TruncationWarning, stacklevel=2)
    bf = b[f - hmin] if hmin <= f < hmin + len(b) else 0.0
    return complex(bf - np.sum(cs[keep] * b[keep]))


def b_f_star_direct(problem: ShiftedCoeffProblem, approx: CircleApprox, f: int, panels: int = 8, order: int = 24) -> complex:
    """b*_f from the (a, q) double sum of nu-integrals; for small configurations only.

    b*_f = lambda^{-1} sum_q w(q) sum_a int nu(a/q - x) psi(x) e(-f x) dx, each
    integral over x in [a/q + Delta/2, a/q + Delta] by composite Gauss-Legendre.
    """
    nodes, wts = np.polynomial.legendre.leggauss(order)
    D = approx.Delta
    edges = np.linspace(0.5 * D, D, panels + 1)
    u = np.concatenate([0.5 * (e1 - e0) * nodes + 0.5 * (e1 + e0) for e0, e1 in zip(edges[:-1], edges[1:])])
    uw = np.concatenate([0.5 * (e1 - e0) * wts for e0, e1 in zip(edges[:-1], edges[1:])])
    nu_vals = approx.nu(-u) * uw
    total = 0j
    for rho, wq in zip(approx.rationals, approx.weights):
        x = rho + u
        integrand = problem.psi(x) * np.exp(-2j * np.pi * np.mod(f * x, 1.0))
        total += wq * np.sum(nu_vals * integrand)
    return complex(total / approx.lam)


@dataclass(frozen=True)
class ReconstructionResult:
    residual: float
    psi_sup: float
    k: int
    f: int

    @property
    def normalized(self) -> float:
        return self.residual / self.psi_sup if self.psi_sup else 0.0

    def __float__(self):
        return self.residual


def lemma1_residual(problem: ShiftedCoeffProblem, approx: CircleApprox, f: int, k: int | None = None) -> ReconstructionResult:
    """|b_f - b*_f - sum_{|xi| <= xi_cutoff} d_xi(k) b*_{f + xi}| together with sup |psi|."""
    k = approx.k if k is None else int(k)
    if not 1 <= k <= approx.k:
        raise InvalidArgument(f"depth {k} not cached (have 1..{approx.k})")
    hmin, b = problem.b_vector()
    X = approx.xi_cutoff
    xis = np.arange(-X, X + 1)
    gs = f + xis
    bstar = _b_star_many(approx, hmin, b, np.concatenate([[f], gs]))
    dk = _window(approx.d[k], approx.bandwidth, -X, X)
    bf = b[f - hmin] if hmin <= f < hmin + len(b) else 0.0
    rec = bstar[0] + np.sum(dk * bstar[1:])
    return ReconstructionResult(float(abs(bf - rec)), problem.psi_sup(), k, int(f))
