"""Kloosterman sums, Ramanujan sums and the weighted sums S(W, x).

Complete sums are evaluated through a histogram of the integer residues
``(m a + n abar) mod q``: the phase of residue ``r`` is the exact rational
``r/q`` reduced before scaling by 2 pi, and the final accumulation runs over
residues in increasing order.  Two argument pairs producing the same residue
multiset (e.g. (m, n) and (n, m)) therefore give bit-identical results.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .arith import build_tables, mod_inverse
from .errors import ConsistencyError, InvalidArgument
from .forms import HeckeCoeffTable
from .weights import SmoothBump, make_bump

__all__ = [
    "kloosterman",
    "kloosterman_matrix",
    "ramanujan_sum",
    "ramanujan_divisor_formula",
    "exp_sum_S",
    "weil_ratio",
    "twisted_multiplicativity_gap",
    "iwaniec_triple_sum_ratio",
]

IMAG_TOL = 1e-8


@lru_cache(maxsize=512)
def _units(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced residues a mod q and their inverses (a = 1 stands in for q = 1)."""
    if q == 1:
        return np.array([1], dtype=np.int64), np.array([1], dtype=np.int64)
    a = np.array([x for x in range(1, q) if math.gcd(x, q) == 1], dtype=np.int64)
    inv = np.array([mod_inverse(int(x), q) for x in a], dtype=np.int64)
    return a, inv


@lru_cache(maxsize=512)
def _trig(q: int) -> tuple[np.ndarray, np.ndarray]:
    theta = 2.0 * np.pi * (np.arange(q) / q)
    return np.cos(theta), np.sin(theta)


def _check_q(q):
    if int(q) != q or q < 1:
        raise InvalidArgument(f"modulus must be a positive integer, got {q!r}")
    return int(q)


def kloosterman(m: int, n: int, q: int) -> float:
    """S(m, n; q) = sum over a mod q, (a, q) = 1, of e((m a + n abar)/q)."""
    q = _check_q(q)
    a, inv = _units(q)
    r = (int(m) % q * a + int(n) % q * inv) % q
    counts = np.bincount(r, minlength=q).astype(np.float64)
    cos_t, sin_t = _trig(q)
    re = math.fsum(counts * cos_t)
    im = math.fsum(counts * sin_t)
    if abs(im) >= IMAG_TOL * len(a):
        raise ConsistencyError(f"S({m},{n};{q}) has imaginary part {im:.3e}")
    return re


def kloosterman_matrix(ms, ns, q: int) -> np.ndarray:
    """Array S[i, j] = S(ms[i], ns[j]; q), same arithmetic as :func:`kloosterman`."""
    q = _check_q(q)
    ms = np.asarray(ms, dtype=np.int64) % q
    ns = np.asarray(ns, dtype=np.int64) % q
    a, inv = _units(q)
    cos_t, _ = _trig(q)
    out = np.empty((len(ms), len(ns)))
    for i, m in enumerate(ms):
        r = (m * a[None, :] + ns[:, None] * inv[None, :]) % q
        idx = (np.arange(len(ns))[:, None] * q + r).ravel()
        counts = np.bincount(idx, minlength=len(ns) * q).reshape(len(ns), q).astype(np.float64)
        out[i] = (counts * cos_t[None, :]).sum(axis=1)
    return out


def _mobius_small(n: int) -> int:
    mu, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            mu = -mu
        p += 1
    return -mu if n > 1 else mu


def ramanujan_divisor_formula(q: int, f: int) -> int:
    """c_q(f) = sum_{d | (q, f)} d mu(q/d), exact integer."""
    q = _check_q(q)
    g = math.gcd(q, int(f))  # gcd(q, 0) = q
    return sum(d * _mobius_small(q // d) for d in range(1, g + 1) if g % d == 0)


def ramanujan_sum(q: int, f: int, check: bool = True) -> int:
    """Ramanujan sum c_q(f), cross-checked against S(f, 0; q) unless ``check`` is off."""
    value = ramanujan_divisor_formula(q, f)
    if check:
        s = kloosterman(f, 0, q)
        if abs(s - value) > 1e-6:
            raise ConsistencyError(f"c_{q}({f}) = {value} but S({f},0;{q}) = {s!r}")
    return value


def _support_range(W: SmoothBump, coeffs: HeckeCoeffTable) -> np.ndarray:
    lo, hi = math.ceil(W.s0), math.floor(W.s1)
    if lo < 1 or hi > coeffs.n_max:
        raise InvalidArgument(f"weight support [{W.s0}, {W.s1}] exceeds table range [1, {coeffs.n_max}]")
    return np.arange(lo, hi + 1)


def exp_sum_S(W: SmoothBump, coeffs: HeckeCoeffTable, x):
    """S(W, x) = sum_m W(m) t(m) e(m x); vectorised over ``x``."""
    m = _support_range(W, coeffs)
    amp = W(m.astype(np.float64)) * coeffs.t[m]
    x = np.asarray(x, dtype=np.float64)
    # reduce m x modulo 1 before scaling by 2 pi
    ph = np.mod(np.multiply.outer(x, m), 1.0)
    val = (np.exp(2j * np.pi * ph) * amp).sum(axis=-1)
    return complex(val) if val.ndim == 0 else val


def weil_ratio(p_max: int) -> tuple[float, int]:
    """max over primes p <= p_max of |S(1, 1; p)| / (2 sqrt p), with the maximising p."""
    primes = build_tables(max(p_max, 2)).primes
    best, arg = 0.0, 2
    for p in primes:
        r = abs(kloosterman(1, 1, int(p))) / (2.0 * math.sqrt(p))
        if r > best:
            best, arg = r, int(p)
    return best, arg


def twisted_multiplicativity_gap(m: int, n: int, q1: int, q2: int) -> float:
    """|S(m, n; q1 q2) - S(m q2bar^2, n; q1) S(m q1bar^2, n; q2)| for coprime q1, q2."""
    if math.gcd(q1, q2) != 1:
        raise InvalidArgument("q1 and q2 must be coprime")
    i2 = mod_inverse(q2 % q1, q1) if q1 > 1 else 0
    i1 = mod_inverse(q1 % q2, q2) if q2 > 1 else 0
    lhs = kloosterman(m, n, q1 * q2)
    rhs = kloosterman(m * i2 * i2, n, q1) * kloosterman(m * i1 * i1, n, q2)
    return abs(lhs - rhs)


def iwaniec_triple_sum_ratio(
    M: int = 8, N: int = 8, Q: int = 8, sign: int = 1, trials: int = 20, seed: int = 0, eps: float = 0.05
) -> float:
    """Largest ratio of the weighted Kloosterman triple sum to its envelope.

    The weight is g = g_M(m) g_N(n) g_Q(q) with each factor a bump on the
    dyadic interval, and a_m, b_n are random unit complex numbers.  The
    envelope is Q^{1+eps} (MN)^{1/2} ||a|| ||b||.
    """
    rng = np.random.default_rng(seed)
    ms = np.arange(M, 2 * M + 1)
    ns = np.arange(N, 2 * N + 1)
    qs = np.arange(Q, 2 * Q + 1)
    gm = make_bump(M, 1.25 * M, 1.75 * M, 2 * M)(ms.astype(float))
    gn = make_bump(N, 1.25 * N, 1.75 * N, 2 * N)(ns.astype(float))
    gq = make_bump(Q, 1.25 * Q, 1.75 * Q, 2 * Q)(qs.astype(float))
    kernel = np.zeros((len(ms), len(ns)))
    for q, w in zip(qs, gq):
        if w:
            kernel += w * kloosterman_matrix(ms, sign * ns, int(q))
    kernel *= gm[:, None] * gn[None, :]
    best = 0.0
    for _ in range(trials):
        a = np.exp(2j * np.pi * rng.random(len(ms)))
        b = np.exp(2j * np.pi * rng.random(len(ns)))
        total = abs(a @ kernel @ b)
        env = Q ** (1 + eps) * math.sqrt(M * N) * math.sqrt(len(ms) * len(ns))
        best = max(best, total / env)
    return best
