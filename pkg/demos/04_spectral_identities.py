"""Summation formulas and inequalities behind the spectral argument.

Run with ``python demos/04_spectral_identities.py``.  With a Maass form
dataset in ``$SHIFTCONV_DATA/maass.txt`` the Kuznetsov check uses it;
otherwise it reports ``skipped-no-data``.
"""

# %%
# Voronoi summation for Delta: a smooth sum of t(n) e(an/q) equals a dual
# sum over m of t(m) e(-abar m/q) against a J-Bessel transform.  The residual
# falls as the dual sum grows.
import os
from pathlib import Path

import numpy as np

from shiftconv.forms import delta_form, load_spectral_dataset
from shiftconv.identities import (
    continuous_sieve_ratio,
    duality_check,
    kuznetsov_residual,
    voronoi_residual,
    zeta_one_plus_it,
)
from shiftconv.weights import make_bump

W = make_bump(50, 55, 60, 70)
form = delta_form(4000)
for M in (16, 64, 256, 1024):
    rep = voronoi_residual(form, W, 1, 3, M)
    print(f"Voronoi a/q = 1/3, M={M:5d}: residual {rep.residual:.3e}")

# %%
# Kuznetsov's formula relates Kloosterman sums to the spectrum.  Without
# Maass data only the geometric and continuous parts are available.
root = os.environ.get("SHIFTCONV_DATA")
path = Path(root) / "maass.txt" if root else None
ds = load_spectral_dataset(path) if path is not None and path.exists() else None
print(kuznetsov_residual(1, 1, 1, make_bump(1.0, 1.25, 1.75, 2.0), ds).to_json())

# %%
# zeta(1 + it) enters through the continuous spectrum.
for t in (5.0, 50.0):
    z = zeta_one_plus_it(t)
    print(f"zeta(1 + {t:g}i) = {z.real:+.12f} {z.imag:+.12f}i")

# %%
# Large sieve style inequalities on random data.
rng = np.random.default_rng(0)
Phi = rng.standard_normal((6, 9)) + 1j * rng.standard_normal((6, 9))
print("duality:", duality_check(Phi, rng.standard_normal(6)))
print("continuous sieve ratio at K=10, Delta=2, M=32:", continuous_sieve_ratio(10, 2, 32))
