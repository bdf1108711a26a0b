import math
import warnings

import numpy as np
import pytest

from shiftconv.circle import (
    ShiftedCoeffProblem,
    TruncationWarning,
    b_f_direct,
    b_f_star,
    b_f_star_direct,
    build_circle_approx,
    chi_star,
    chi_star_grid,
    e_on_grid,
    e_sup_norm,
    lemma1_residual,
    parseval_variance,
    standard_problem,
    variance_V,
)
from shiftconv.errors import InvalidArgument
from shiftconv.forms import delta_form
from shiftconv.weights import make_bump


@pytest.fixture(scope="module")
def ap8():
    return build_circle_approx(8, 0.1, 3)


@pytest.fixture(scope="module")
def form():
    return delta_form(2000)


def brute_chi(Q, w, nu, Delta, x):
    """chi* by enumerating every (a, q) with a generic gcd test."""
    num = den = 0.0
    for q in range(1, int(2 * Q) + 2):
        wq = float(w(q))
        if wq == 0:
            continue
        for a in range(q):
            if math.gcd(a, q) == 1:
                den += wq
                num += wq * float(nu.periodic(a / q - x))
    return num / (2 * Delta * den)


def test_argument_checks():
    with pytest.raises(InvalidArgument):
        build_circle_approx(2)
    with pytest.raises(InvalidArgument):
        build_circle_approx(8, k=0)
    with pytest.raises(InvalidArgument):
        build_circle_approx(8, delta2=0.9)
    with pytest.warns(TruncationWarning):
        build_circle_approx(8, xi_cutoff=4)


def test_structural_constants(ap8):
    assert ap8.a_beta(0).real == pytest.approx(2 * ap8.Delta, abs=1e-10)
    assert ap8.lam == 2 * ap8.Delta * ap8.Lambda
    assert ap8.c_xi(0) == 0
    assert ap8.c_xi(ap8.bandwidth + 5) == 0
    assert np.array_equal(ap8.d[1], ap8.c)
    assert ap8.d_xi(0, 1) == 0


def test_a_beta_tail_decay():
    for Q in (8, 32):
        ap = build_circle_approx(Q, 0.1, 1)
        B = ap.bandwidth
        a = np.maximum(np.abs(ap.a[B:]), np.abs(ap.a[: B + 1][::-1]))
        tail = np.maximum.accumulate(a[::-1])[::-1]
        for b in range(math.ceil(1 / ap.Delta), B // 2):
            if tail[b] > 1e-14 * a[0]:
                assert tail[2 * b] <= 0.7 * tail[b]


def test_c_and_d_bounds(ap8):
    assert ap8.c_bound_constant() < 50
    assert ap8.d_bound_constant() < 50


def test_chi_star_brute_force():
    Q, Delta = 10, 0.2
    ap = build_circle_approx(Q, 1 + math.log(Delta) / math.log(Q), 1)
    assert ap.Delta == pytest.approx(Delta, rel=1e-14)
    for x in (0.3, 0.0, 0.77):
        assert chi_star(ap, x) == pytest.approx(brute_chi(Q, ap.w, ap.nu, ap.Delta, x), abs=1e-12)


def test_chi_star_mean_and_sign(ap8):
    xs = (np.arange(20000) + 0.5) / 20000
    vals = chi_star(ap8, xs)
    assert np.all(vals >= 0)
    assert vals.mean() == pytest.approx(1.0, abs=1e-8)
    grid = chi_star_grid(ap8, 4096)
    assert np.allclose(grid, chi_star(ap8, np.arange(4096) / 4096), atol=1e-12)


def test_variance_dual_routes(ap8):
    V = variance_V(ap8)
    assert V >= 0
    xs = (np.arange(1 << 16) + 0.5) / (1 << 16)
    riemann = np.mean((chi_star(ap8, xs) - 1) ** 2)
    assert V == pytest.approx(riemann, abs=1e-6)
    assert V == pytest.approx(parseval_variance(ap8), rel=1e-10)
    assert parseval_variance(ap8, ap8.xi_cutoff) <= V + 1e-12


def test_e_on_grid_matches_scatter(ap8):
    M = 1 << 13
    assert np.allclose(e_on_grid(ap8, M).real, 1 - chi_star_grid(ap8, M), atol=1e-11)


def test_sup_norm(ap8):
    s = e_sup_norm(ap8)
    assert s >= 0
    xs = np.linspace(0, 1, 50001)
    assert s == pytest.approx(np.abs(1 - chi_star(ap8, xs)).max(), abs=1e-3)
    sups = [e_sup_norm(build_circle_approx(Q, 0.1, 1)) for Q in (32, 128)]
    assert sups[1] < sups[0]


def test_worker_invariance(ap8):
    assert np.array_equal(chi_star_grid(ap8, 1 << 14, 1), chi_star_grid(ap8, 1 << 14, 4))


def test_b_f_direct(form):
    p = standard_problem(form, n=1000, L=32, delta=0.125)
    lo, hi = p.frequency_window
    assert b_f_direct(p, hi + 1) == 0.0 and b_f_direct(p, lo - 1) == 0.0
    M = 1 << 14
    x = np.arange(M) / M
    psi = p.psi(x)
    for f in (2, -3, 0):
        fourier = np.mean(psi * np.exp(-2j * np.pi * np.mod(f * x, 1.0)))
        assert isinstance(b_f_direct(p, f), float)
        assert b_f_direct(p, f) == pytest.approx(fourier.real, abs=1e-6)
        assert abs(fourier.imag) < 1e-6


def test_problem_range_check(form):
    with pytest.raises(InvalidArgument):
        ShiftedCoeffProblem(form, 1990, make_bump(1990, 1995, 2000, 2010), make_bump(1990, 1995, 2000, 2010))


def test_b_star_two_routes(ap8, form):
    p = standard_problem(form, n=1000, L=32, delta=0.25)
    for f in (0, 1, 2, 5):
        assert abs(b_f_star(p, ap8, f) - b_f_star_direct(p, ap8, f)) < 1e-5


def test_b_star_zero_table(ap8, form):
    zero = form.with_coefficients(np.zeros_like(form.t))
    p = standard_problem(zero, n=1000, L=32, delta=0.25)
    assert b_f_star(p, ap8, 2) == 0
    r = lemma1_residual(p, ap8, 2, 3)
    assert r.residual == 0 and r.normalized == 0


def test_b_star_truncation_warning(form):
    ap = build_circle_approx(8, 0.1, 1, xi_cutoff=8)
    p = standard_problem(form, n=1000, L=64, delta=0.25)
    with warnings.catch_warnings():
        warnings.simplefilter("error", TruncationWarning)
        with pytest.raises(TruncationWarning):
            b_f_star(p, ap, 0)


def test_reconstruction_depth_improves():
    form = delta_form(1200)
    p = standard_problem(form)
    ap = build_circle_approx(32, 0.4, 3)
    res = [lemma1_residual(p, ap, 2, k).normalized for k in (1, 2, 3)]
    assert res[0] >= res[1] >= res[2]
    # measured once and frozen
    assert res[0] == pytest.approx(2.98e-3, rel=0.01)
    with pytest.raises(InvalidArgument):
        lemma1_residual(p, ap, 2, 4)


def test_reconstruction_improves_with_Q_at_small_delta2():
    # at Delta = Q^-0.9 sup|E| > 1 at these Q, yet the residual still falls with Q
    p = standard_problem(delta_form(1200))
    for k in (1, 3):
        res = [lemma1_residual(p, build_circle_approx(Q, 0.1, 3), 2, k).normalized for Q in (32, 64, 128)]
        assert res[0] > res[1] > res[2], (k, res)
