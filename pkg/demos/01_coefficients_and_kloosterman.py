"""Coefficients of Delta and Kloosterman sums.

Run with ``python demos/01_coefficients_and_kloosterman.py``.
"""

# %%
# Ramanujan's tau function is the coefficient sequence of the weight 12 cusp
# form Delta.  The table is exact (Python integers), so Hecke relations can be
# checked with no tolerance at all.
import numpy as np

from shiftconv.arith import build_tables, ramanujan_tau_table
from shiftconv.forms import deligne_holds, delta_form, exact_hecke_violation
from shiftconv.kloosterman import kloosterman, ramanujan_divisor_formula

tau = [int(v) for v in ramanujan_tau_table(2000)]
print("tau(1..10) =", tau[1:11])
print("first Hecke violation:", exact_hecke_violation(tau))
print("first Deligne violation:", deligne_holds(tau))

# %%
# Normalised eigenvalues t(n) = tau(n) / n^(11/2) obey |t(n)| <= d(n).
form = delta_form(2000)
d = build_tables(2000).divisor_count
ratio = np.abs(form.t[1:]) / d[1:]
print(f"max |t(n)|/d(n) for n <= 2000: {ratio.max():.4f} at n = {1 + int(ratio.argmax())}")

# %%
# Kloosterman sums are real, symmetric in (m, n), and reduce to Ramanujan sums
# when one frequency vanishes.
for q in (12, 30, 97):
    print(f"q={q:3d}  S(1,1;q)={kloosterman(1, 1, q):+.6f}  S(5,0;q)={kloosterman(5, 0, q):+.6f}"
          f"  c_q(5)={ramanujan_divisor_formula(q, 5):+d}")

# %%
# The Weil bound |S(m,n;p)| <= 2 sqrt(p) in action.
worst = max(abs(kloosterman(1, 1, p)) / (2 * p**0.5) for p in build_tables(500).primes)
print(f"max |S(1,1;p)| / 2 sqrt(p) over p < 500: {worst:.4f}")
