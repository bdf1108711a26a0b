"""Mean squares of shifted convolution sums against their bound envelopes.

Run with ``python demos/03_mean_value_sweep.py``.
"""

# %%
# The measured quantity is the triple sum
#     sum_{f ~ F} sum_{n ~ N} | sum_{l ~ L} t(n+l) t(n+l+f) |^2
# for the normalised coefficients of Delta.  It is compared with the
# envelope N^2 sqrt(F) + N L F times a fixed N^0.05.
import math

from shiftconv.forms import delta_form
from shiftconv.meanvalue import MeanValueSpec, envelope_sweep, records_to_csv, triple_sum, triple_sum_naive

form = delta_form(2 * 2**15 + 2 * 182 + 2 * 23 + 10)
spec = MeanValueSpec(form, 16, 4, 2, theorem="3")
print("tiny instance, fast vs nested loops:", triple_sum(spec), triple_sum_naive(spec))

# %%
# An N-doubling chain with L = N^(1/2), F = N^(3/10).  The measured sums
# should grow no faster than the envelope.
specs = [
    MeanValueSpec(form, N, math.ceil(N**0.5), math.ceil(N**0.3), theorem="2", chain="demo")
    for N in (2**j for j in range(10, 16))
]
records, fits = envelope_sweep(specs, workers=4)
print(records_to_csv(records), end="")
for fit in fits:
    print(f"fitted exponent {fit.exponent:.3f}, envelope exponent {fit.envelope_exponent:.3f}, "
          f"worst ratio growth per doubling {fit.max_ratio_growth:.3f}, flagged={fit.flagged}")

# %%
# The conjectured shape N^2 + N L F is much smaller when L is large; the
# ratio tells how far the data sit from it.
conj = [MeanValueSpec(form, N, 2 * math.ceil(N**0.5), 4, theorem="conj") for N in (2**12, 2**14)]
for r in envelope_sweep(conj)[0]:
    print(f"conjecture shape, N={r.spec['N']}: ratio {r.ratio:.4f}")
