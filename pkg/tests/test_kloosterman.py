import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftconv.arith import build_tables
from shiftconv.errors import InvalidArgument
from shiftconv.forms import delta_form
from shiftconv.kloosterman import (
    exp_sum_S,
    iwaniec_triple_sum_ratio,
    kloosterman,
    kloosterman_matrix,
    ramanujan_divisor_formula,
    ramanujan_sum,
    twisted_multiplicativity_gap,
    weil_ratio,
)
from shiftconv.weights import make_bump


def naive_kloosterman(m, n, q):
    total = 0j
    for a in range(q):
        if math.gcd(a, q) == 1:
            abar = pow(a, -1, q) if q > 1 else 0
            total += cmath.exp(2j * math.pi * (m * a + n * abar) / q)
    return total


def test_trivial_values():
    assert kloosterman(5, 7, 1) == 1
    assert kloosterman(0, 0, 12) == 4
    assert kloosterman(1, 1, 2) == 1
    phi = build_tables(60).totient
    for q in range(1, 61):
        assert kloosterman(0, 0, q) == phi[q]


def test_bad_modulus():
    with pytest.raises(InvalidArgument):
        kloosterman(1, 1, 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(-500, 500), st.integers(-500, 500), st.integers(1, 120))
def test_against_naive_complex_sum(m, n, q):
    ref = naive_kloosterman(m, n, q)
    assert abs(ref.imag) < 1e-9
    assert kloosterman(m, n, q) == pytest.approx(ref.real, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4), st.integers(1, 300))
def test_symmetry_bit_exact(m, n, q):
    assert kloosterman(m, n, q) == kloosterman(n, m, q)


def test_matrix_matches_scalar():
    ms, ns = [1, 2, 5, -3], [0, 4, 7]
    for q in (1, 7, 12, 30):
        M = kloosterman_matrix(ms, ns, q)
        for i, m in enumerate(ms):
            for j, n in enumerate(ns):
                assert M[i, j] == pytest.approx(kloosterman(m, n, q), abs=1e-10)


def test_ramanujan_values():
    assert all(ramanujan_sum(1, f) == 1 for f in range(-5, 6))
    assert ramanujan_sum(2, 1) == -1
    phi = build_tables(100).totient
    assert all(ramanujan_sum(q, 0) == phi[q] for q in range(1, 101))
    # c_q(1) = mu(q)
    mu = build_tables(100).mobius
    assert all(ramanujan_divisor_formula(q, 1) == mu[q] for q in range(1, 101))


@settings(max_examples=100, deadline=None)
@given(st.integers(-1000, 1000), st.integers(1, 150))
def test_ramanujan_vs_kloosterman(f, q):
    assert kloosterman(f, 0, q) == pytest.approx(ramanujan_divisor_formula(q, f), abs=1e-9)


def test_twisted_multiplicativity():
    worst = 0.0
    for q1 in range(1, 51, 7):
        for q2 in range(1, 51, 5):
            if math.gcd(q1, q2) == 1:
                for m, n in [(1, 1), (3, 7), (0, 5), (-2, 9)]:
                    worst = max(worst, twisted_multiplicativity_gap(m, n, q1, q2))
    assert worst < 1e-9
    with pytest.raises(InvalidArgument):
        twisted_multiplicativity_gap(1, 1, 4, 6)


def test_weil_monitor():
    ratio, p = weil_ratio(2000)
    assert ratio <= 1.0
    assert ratio > 0.9  # the maximum is nearly attained


def test_exp_sum_S():
    f = delta_form(200)
    W = make_bump(10, 12, 14, 16)
    m = np.arange(11, 16)
    assert exp_sum_S(W, f, 0.0) == pytest.approx(math.fsum(W(m.astype(float)) * f.t[m]), abs=1e-14)
    x = 0.1234
    assert exp_sum_S(W, f, -x) == pytest.approx(exp_sum_S(W, f, x).conjugate(), abs=1e-13)
    vec = exp_sum_S(W, f, np.array([0.0, 0.25, x]))
    assert vec.shape == (3,)


def test_exp_sum_three_point_oracle():
    f = delta_form(20)
    W = make_bump(4.5, 5.5, 5.5, 7.5)  # nonzero at m = 5, 6, 7
    ref = 0j
    for m in (5, 6, 7):
        ref += float(W(m)) * f.t[m] * cmath.exp(2j * math.pi * m * 0.25)
    assert exp_sum_S(W, f, 0.25) == pytest.approx(ref, abs=1e-14)


def test_exp_sum_range_check():
    with pytest.raises(InvalidArgument):
        exp_sum_S(make_bump(10, 12, 14, 30), delta_form(20), 0.0)


def test_iwaniec_envelope_ratio():
    for sign in (1, -1):
        assert iwaniec_triple_sum_ratio(sign=sign, trials=10, seed=3) < 1.0
    assert iwaniec_triple_sum_ratio(seed=5) == iwaniec_triple_sum_ratio(seed=5)
