"""A smoothed circle method: chi*, its variance, and reconstruction of b_f.

Run with ``python demos/02_circle_method.py``.
"""

# %%
# chi* is a weighted sum of narrow bumps nu centred at the rationals a/q with
# q ~ Q.  Its Fourier coefficients are a_beta G(beta) / lambda with G a
# Ramanujan-sum average, so the distance to the constant 1 is measurable.
import math

from shiftconv.circle import build_circle_approx, lemma1_residual, standard_problem, variance_V
from shiftconv.forms import delta_form

print("  Q        V   V lambda / log^3(1/Delta)")
for Q in (32, 64, 128):
    ap = build_circle_approx(Q, 0.1, 3)
    V = variance_V(ap)
    print(f"{Q:3d}  {V:.5f}   {V * ap.lam / math.log(1 / ap.Delta) ** 3:.5f}")

# %%
# The coefficient b_f of the shifted product can be rebuilt from the
# "starred" coefficients b*_{f + xi} with weights d_xi, the k-fold
# convolution powers of c_xi.  Depth 3 beats depth 1 at every Q, though the
# intermediate depths need not be ordered; doubling Q shrinks the residual.
prob = standard_problem(delta_form(1200), n=1000, L=64, delta=0.125)
for Q in (32, 64, 128):
    ap = build_circle_approx(Q, 0.4, 3)
    res = [lemma1_residual(prob, ap, 2, k).normalized for k in (1, 2, 3)]
    print(f"Q={Q:3d}  normalised residual at depth k=1,2,3: " + "  ".join(f"{r:.2e}" for r in res))
