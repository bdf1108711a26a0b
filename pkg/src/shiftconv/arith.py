"""Exact arithmetic kernels: sieve tables, divisor sums, Ramanujan's tau.

Everything here is integer-exact except :func:`sigma_2ir` and the
normalisation of tau, which are floating point by nature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import InvalidArgument, NoInverseError

__all__ = [
    "ArithTables",
    "build_tables",
    "divisors",
    "sigma_2ir",
    "ramanujan_tau_table",
    "normalized_hecke_holomorphic",
    "holomorphic_hecke_table",
    "mod_inverse",
]


@dataclass(frozen=True)
class ArithTables:
    """Multiplicative-function tables for 0 <= n <= n_max (entry 0 is unused).

    Attributes:
        n_max: largest tabulated argument.
        mobius: mu(n), int8.
        totient: phi(n), int64.
        divisor_count: d(n), int64.
        smallest_prime_factor: spf(n), with spf(1) = 1.
        primes: all primes <= n_max in increasing order.
    """

    n_max: int
    mobius: np.ndarray
    totient: np.ndarray
    divisor_count: np.ndarray
    smallest_prime_factor: np.ndarray
    primes: np.ndarray

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorisation of ``n`` as ``[(p, e), ...]`` with increasing p."""
        if not 1 <= n <= self.n_max:
            raise InvalidArgument(f"n={n} outside table range [1, {self.n_max}]")
        out: list[tuple[int, int]] = []
        spf = self.smallest_prime_factor
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def divisors(self, n: int) -> list[int]:
        """Sorted divisors of ``n`` built from the factorisation."""
        divs = [1]
        for p, e in self.factorize(n):
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)


def build_tables(n_max: int) -> ArithTables:
    """Linear sieve filling mu, phi, d and the smallest-prime-factor table."""
    if int(n_max) != n_max or n_max < 1:
        raise InvalidArgument(f"n_max must be a positive integer, got {n_max!r}")
    n_max = int(n_max)
    spf = [0] * (n_max + 1)
    mu = [0] * (n_max + 1)
    phi = [0] * (n_max + 1)
    dc = [0] * (n_max + 1)
    # exponent of spf(n) in n, needed to update d(n) when p == spf(n)
    ex = [0] * (n_max + 1)
    primes: list[int] = []
    spf[1], mu[1], phi[1], dc[1] = 1, 1, 1, 1
    for i in range(2, n_max + 1):
        if spf[i] == 0:
            spf[i] = i
            primes.append(i)
            mu[i], phi[i], dc[i], ex[i] = -1, i - 1, 2, 1
        si = spf[i]
        for p in primes:
            ip = i * p
            if p > si or ip > n_max:
                break
            spf[ip] = p
            if p == si:
                mu[ip] = 0
                phi[ip] = phi[i] * p
                ex[ip] = ex[i] + 1
                dc[ip] = dc[i] // (ex[i] + 1) * (ex[i] + 2)
            else:
                mu[ip] = -mu[i]
                phi[ip] = phi[i] * (p - 1)
                ex[ip] = 1
                dc[ip] = dc[i] * 2
    spf_arr = np.asarray(spf, dtype=np.int64)
    spf_arr[0] = 0
    return ArithTables(
        n_max=n_max,
        mobius=np.asarray(mu, dtype=np.int8),
        totient=np.asarray(phi, dtype=np.int64),
        divisor_count=np.asarray(dc, dtype=np.int64),
        smallest_prime_factor=spf_arr,
        primes=np.asarray(primes, dtype=np.int64),
    )


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of ``n`` by trial division."""
    if n < 1:
        raise InvalidArgument(f"n must be positive, got {n}")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def sigma_2ir(n: int, r: float) -> complex:
    """sum_{d | n} d^{2ir}."""
    if n < 1:
        raise InvalidArgument(f"n must be positive, got {n}")
    phases = [2.0 * r * math.log(d) for d in divisors(n)]
    return complex(math.fsum(math.cos(p) for p in phases), math.fsum(math.sin(p) for p in phases))


# --- Ramanujan tau ---------------------------------------------------------

def _jacobi_terms(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponents and coefficients of prod (1 - q^n)^3 = sum (-1)^j (2j+1) q^{j(j+1)/2}."""
    exps, coefs = [], []
    j = 0
    while j * (j + 1) // 2 <= n_max:
        exps.append(j * (j + 1) // 2)
        coefs.append((-1) ** j * (2 * j + 1))
        j += 1
    return np.asarray(exps, dtype=np.int64), np.asarray(coefs, dtype=np.int64)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24 with these bases
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _moduli(count: int, top: int = 1 << 40) -> list[int]:
    out = []
    m = top - 1
    while len(out) < count:
        if _is_probable_prime(m):
            out.append(m)
        m -= 2
    return out


def _power_mod(exps, coefs, length, power, p):
    """Coefficients of (sparse series)^power mod p, truncated to ``length``."""
    base = np.zeros(length, dtype=np.int64)
    keep = exps < length
    base[exps[keep]] = coefs[keep] % p
    acc = base.copy()
    cmax = int(np.abs(coefs).max())
    # how many products c*a (a < p) fit into int64 on top of a reduced value
    batch = max(1, ((1 << 62) // (p * cmax)) - 1)
    for _ in range(power - 1):
        out = np.zeros(length, dtype=np.int64)
        pending = 0
        for e, c in zip(exps[keep], coefs[keep]):
            e = int(e)
            if c >= 0:
                out[e:] += int(c) * acc[: length - e]
            else:
                out[e:] -= int(-c) * acc[: length - e]
            pending += 1
            if pending == batch:
                out %= p
                pending = 0
        out %= p
        acc = out
    return acc


def ramanujan_tau_table(n_max: int) -> np.ndarray:
    """Exact tau(n) for 0 <= n <= n_max as an object array of Python ints (tau[0] = 0).

    Uses Delta = q * (prod (1 - q^n)^3)^8 with Jacobi's sparse cube, computed
    modulo several primes and recombined by CRT.  The number of primes comes
    from the l1 bound (sum |jacobi coefficients|)^8, so reconstruction is exact.
    """
    if int(n_max) != n_max or n_max < 1:
        raise InvalidArgument(f"n_max must be a positive integer, got {n_max!r}")
    n_max = int(n_max)
    length = n_max  # coefficient of q^{n-1} in the eighth power gives tau(n)
    exps, coefs = _jacobi_terms(length)
    l1 = int(np.abs(coefs[exps < length]).sum())
    bound = l1**8
    moduli = _moduli(1)
    while reduce(lambda a, b: a * b, moduli) <= 2 * bound:
        moduli = _moduli(len(moduli) + 1)
    big_m = reduce(lambda a, b: a * b, moduli)
    if big_m <= 2 * bound:  # pragma: no cover - guarded by the loop above
        raise OverflowError("CRT modulus too small for the coefficient bound")
    residues = [_power_mod(exps, coefs, length, 8, p) for p in moduli]

    total = np.zeros(length, dtype=object)
    for p, res in zip(moduli, residues):
        mi = big_m // p
        w = mi * pow(mi, -1, p) % big_m
        total = total + res.astype(object) * w
    total = total % big_m
    half = big_m // 2
    total = np.where(total > half, total - big_m, total)
    tau = np.zeros(n_max + 1, dtype=object)
    tau[1:] = total
    tau[0] = 0
    return tau


def normalized_hecke_holomorphic(n: int, tau_table) -> float:
    """t(n) = tau(n) / n^{11/2}."""
    if not 1 <= n < len(tau_table):
        raise InvalidArgument(f"n={n} outside tau table range [1, {len(tau_table) - 1}]")
    return float(tau_table[n]) / (float(n) ** 5 * math.sqrt(n))


def holomorphic_hecke_table(tau_table) -> np.ndarray:
    """Vector of t(n) for the whole tau table; entry 0 is 0."""
    n = np.arange(len(tau_table), dtype=np.float64)
    t = np.zeros(len(tau_table))
    t[1:] = np.array([float(v) for v in tau_table[1:]]) / (n[1:] ** 5 * np.sqrt(n[1:]))
    return t


def mod_inverse(a: int, q: int) -> int:
    """Inverse of ``a`` modulo ``q``.  Every residue inverts to 0 modulo 1."""
    if q < 1:
        raise InvalidArgument(f"modulus must be positive, got {q}")
    if math.gcd(a, q) != 1:
        raise NoInverseError(f"{a} has no inverse modulo {q}")
    return pow(a, -1, q)
