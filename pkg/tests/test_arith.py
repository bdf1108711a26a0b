import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftconv.arith import (
    build_tables,
    divisors,
    holomorphic_hecke_table,
    mod_inverse,
    normalized_hecke_holomorphic,
    ramanujan_tau_table,
    sigma_2ir,
)
from shiftconv.errors import InvalidArgument, NoInverseError

# tau(1..20), from expanding q prod (1 - q^n)^24 with integer polynomial arithmetic
TAU_20 = [
    1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920,
    534612, -370944, -577738, 401856, 1217160, 987136, -6905934, 2727432, 10661420, -7109760,
]


def brute_tau(n_max):
    poly = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        for _ in range(24):
            for i in range(n_max, n - 1, -1):
                poly[i] -= poly[i - n]
    return [0] + poly[:n_max]


@pytest.fixture(scope="module")
def T():
    return build_tables(20000)


def test_trivial_table():
    t = build_tables(1)
    assert (t.mobius[1], t.totient[1], t.divisor_count[1]) == (1, 1, 1)


def test_small_values():
    t = build_tables(12)
    assert t.divisor_count[12] == 6
    assert t.totient[10] == 4
    assert list(t.primes) == [2, 3, 5, 7, 11]


def test_mobius_sum_vanishes(T):
    mu = T.mobius.astype(np.int64)
    acc = np.zeros(T.n_max + 1, dtype=np.int64)
    for d in range(1, T.n_max + 1):
        acc[d::d] += mu[d]
    assert acc[1] == 1
    assert not np.any(acc[2:])


def test_totient_product_formula(T):
    for n in range(1, T.n_max + 1):
        num, den = n, 1
        for p, _ in T.factorize(n) if n > 1 else []:
            num *= p - 1
            den *= p
        assert num // den == T.totient[n] and num % den == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 140), st.integers(1, 140))
def test_divisor_count_multiplicative(m, n):
    t = build_tables(140 * 140)
    if math.gcd(m, n) == 1:
        assert t.divisor_count[m * n] == t.divisor_count[m] * t.divisor_count[n]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5000))
def test_divisors_agree(n):
    t = build_tables(5000)
    d = divisors(n)
    assert d == t.divisors(n) == [k for k in range(1, n + 1) if n % k == 0]
    assert len(d) == t.divisor_count[n]


def test_factorize_out_of_range():
    with pytest.raises(InvalidArgument):
        build_tables(10).factorize(11)


def test_sigma_2ir():
    assert sigma_2ir(1, 3.7) == 1
    assert sigma_2ir(12, 0.0) == 6
    # sum over d | 6 of d^{2i}, mpmath at 30 digits
    assert abs(sigma_2ir(6, 1.0) - complex(-0.30672746395669682613, 1.3654728843769813189)) < 1e-14


def test_tau_matches_brute_force():
    tau = ramanujan_tau_table(60)
    assert [int(v) for v in tau[1:21]] == TAU_20
    assert [int(v) for v in tau[1:61]] == brute_tau(60)[1:]
    assert tau[6] == tau[2] * tau[3]


def test_tau_exceeds_int64_exactly():
    tau = ramanujan_tau_table(20000)
    big = max(abs(int(v)) for v in tau[1:])
    assert big > 2**63
    p = 19997
    assert tau[p] * tau[p] <= 4 * p**11


def test_tau_multiplicative_and_recursion():
    tau = ramanujan_tau_table(3000)
    for m in range(2, 60):
        for n in range(2, 3000 // m + 1):
            if math.gcd(m, n) == 1:
                assert tau[m * n] == tau[m] * tau[n]
    for p in build_tables(3000).primes:
        p = int(p)
        q = p
        while q * p <= 3000:
            assert tau[q * p] == tau[p] * tau[q] - p**11 * tau[q // p]
            q *= p


def test_normalized_values():
    tau = ramanujan_tau_table(100)
    assert normalized_hecke_holomorphic(1, tau) == 1.0
    assert normalized_hecke_holomorphic(2, tau) == pytest.approx(-24 / 2**5.5, rel=1e-15)
    t = holomorphic_hecke_table(tau)
    dc = build_tables(100).divisor_count
    assert np.all(np.abs(t[1:]) <= dc[1:])


def test_mod_inverse():
    assert mod_inverse(1, 9) == 1
    assert mod_inverse(3, 7) == 5
    with pytest.raises(NoInverseError):
        mod_inverse(2, 4)


@given(st.integers(-10**6, 10**6), st.integers(2, 10**4))
def test_mod_inverse_property(a, q):
    if math.gcd(a, q) == 1:
        b = mod_inverse(a, q)
        assert 1 <= b < q and (a * b) % q == 1
    else:
        with pytest.raises(NoInverseError):
            mod_inverse(a, q)
