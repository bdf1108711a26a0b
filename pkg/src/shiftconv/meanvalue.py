"""Triple sums of shifted convolutions and their bound envelopes.

The measured quantity is

    sum_{f ~ F} sum_{n ~ N} | sum_{l ~ L} t(n+l) t(n+l+f) [W_n(n+l)] |^2

with ``m ~ M`` meaning M < m <= 2M.  The inner l-sum is accumulated
sequentially in l (vectorised over n), which is bit-identical to a plain
nested loop.  All squares are reduced with one exactly rounded ``math.fsum``,
so the result does not depend on summation order or on the number of workers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circle import CircleApprox, _b_star_many, _window, standard_problem
from .errors import InvalidArgument
from .forms import HeckeCoeffTable
from .weights import SmoothBump, make_bump

__all__ = [
    "MeanValueSpec",
    "ExperimentRecord",
    "ChainFit",
    "triple_sum",
    "triple_sum_naive",
    "envelope",
    "envelope_exponent",
    "run_experiment",
    "envelope_sweep",
    "records_to_csv",
    "weighted_bf_meansquare",
    "CSV_COLUMNS",
]

EPS_POWER = 0.05
CSV_COLUMNS = ("theorem", "N", "L", "F", "delta", "weighted", "measured", "envelope", "ratio", "runtime_ms")
THEOREMS = ("1", "2", "3", "conj")


@dataclass(frozen=True, eq=False)
class MeanValueSpec:
    """Parameters of one triple-sum experiment.

    Attributes:
        form: coefficient table.
        N, L, F: dyadic sizes.
        delta: relative width of the weight (weighted runs only).
        weighted: include W_n(n + l).
        theorem: which envelope applies, one of "1", "2", "3", "conj".
        B, C: the weight lives on [B L + n, C L + n]; C defaults to B + delta.
        chain: label grouping specs into N-doubling chains for fits.
        two_sided: f ranges over |f| ~ F instead of f ~ F.
        eps_power: exponent of the N^eps factor in envelopes.
    """

    form: HeckeCoeffTable
    N: int
    L: int
    F: int
    delta: float | None = None
    weighted: bool = False
    theorem: str = "2"
    B: float = 1.0
    C: float | None = None
    chain: str | None = None
    eps_power: float = EPS_POWER
    two_sided: bool = False

    def __post_init__(self):
        for name in ("N", "L", "F"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidArgument(f"{name} must be a positive integer, got {v!r}")
        object.__setattr__(self, "theorem", str(self.theorem))
        if self.theorem not in THEOREMS:
            raise InvalidArgument(f"theorem must be one of {THEOREMS}, got {self.theorem!r}")
        if self.L > self.N**0.99:
            raise InvalidArgument(f"L={self.L} exceeds N^0.99")
        if self.theorem == "1" and not self.weighted:
            raise InvalidArgument("theorem 1 concerns the weighted sum")
        if self.theorem in ("2", "conj") and self.weighted:
            raise InvalidArgument(f"theorem {self.theorem} concerns the unweighted sum")
        if self.weighted:
            if self.delta is None or not 0 < self.delta <= 0.25:
                raise InvalidArgument("weighted runs need 0 < delta <= 1/4")
            if self.F > self.delta * self.L:
                raise InvalidArgument(f"weighted runs need F <= delta L, got F={self.F}, delta L={self.delta * self.L}")
            if not 1.0 <= self.B <= self.C_eff <= 2.0:
                raise InvalidArgument("need 1 <= B <= C <= 2")
        elif self.theorem in ("2", "3") and self.F > self.N**0.4:
            raise InvalidArgument(f"unweighted runs need F <= N^(2/5), got F={self.F}")
        if self.two_sided and 2 * self.F > self.N + self.L + 1:
            raise InvalidArgument(f"two-sided runs need n + l - 2F >= 1, got N={self.N}, L={self.L}, F={self.F}")
        if self.table_need > self.form.n_max:
            raise InvalidArgument(f"need coefficients up to {self.table_need}, table has {self.form.n_max}")

    @property
    def C_eff(self) -> float:
        return self.C if self.C is not None else self.B + (self.delta or 0.0)

    @property
    def f_values(self) -> list:
        pos = list(range(self.F + 1, 2 * self.F + 1))
        return [-f for f in reversed(pos)] + pos if self.two_sided else pos

    @property
    def table_need(self) -> int:
        return 2 * self.N + 2 * self.L + 2 * self.F

    def weight(self) -> SmoothBump | None:
        """W_n(n + x) as a bump in x on [B L, C L] with a middle-half plateau."""
        if not self.weighted:
            return None
        lo, hi = self.B * self.L, self.C_eff * self.L
        q = 0.25 * (hi - lo)
        return make_bump(lo, lo + q, hi - q, hi)

    def l_weights(self) -> np.ndarray | None:
        W = self.weight()
        if W is None:
            return None
        return np.asarray(W(np.arange(self.L + 1, 2 * self.L + 1, dtype=np.float64)))

    def snapshot(self) -> dict:
        return {
            "theorem": self.theorem,
            "N": self.N,
            "L": self.L,
            "F": self.F,
            "delta": self.delta,
            "weighted": self.weighted,
            "B": self.B,
            "C": self.C_eff if self.weighted else None,
            "form": self.form.kind,
            "two_sided": self.two_sided,
        }


def _squares_for_f(spec: MeanValueSpec, f: int, lw) -> np.ndarray:
    t = spec.form.t
    N, L = spec.N, spec.L
    n = np.arange(N + 1, 2 * N + 1)
    acc = np.zeros(N)
    for j, l in enumerate(range(L + 1, 2 * L + 1)):
        m = n + l
        term = t[m] * t[m + f]
        if lw is not None:
            term = term * lw[j]
        acc += term
    return acc * acc


def _squares_for_f_sliding(spec: MeanValueSpec, f: int) -> np.ndarray:
    t = spec.form.t
    N, L = spec.N, spec.L
    top = 2 * N + 2 * L
    prod = np.zeros(top + 1)
    m = np.arange(1, top + 1)
    mf = m + f
    ok = mf >= 1
    prod[1:][ok] = t[m[ok]] * t[mf[ok]]
    cs = np.concatenate([[0.0], np.cumsum(prod[1:])])
    n = np.arange(N + 1, 2 * N + 1)
    acc = cs[n + 2 * L] - cs[n + L]
    return acc * acc


def _partials(spec: MeanValueSpec, method: str, workers: int) -> list:
    if method not in ("exact", "sliding"):
        raise InvalidArgument(f"method must be 'exact' or 'sliding', got {method!r}")
    if method == "sliding" and spec.weighted:
        raise InvalidArgument("the sliding update applies to unweighted sums only")
    lw = spec.l_weights()
    fs = spec.f_values

    def one(f):
        return _squares_for_f(spec, f, lw) if method == "exact" else _squares_for_f_sliding(spec, f)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, fs))
    return [one(f) for f in fs]


def triple_sum(spec: MeanValueSpec, method: str = "exact", workers: int = 1) -> float:
    """The measured triple sum; ``method="sliding"`` uses prefix sums (unweighted, not bit-exact)."""
    parts = _partials(spec, method, workers)
    return math.fsum(np.concatenate(parts)) if parts else 0.0


def triple_sum_checksum(spec: MeanValueSpec, workers: int = 1) -> tuple[float, str]:
    """Triple sum together with a SHA-256 over the per-f partial sums."""
    parts = _partials(spec, "exact", workers)
    h = hashlib.sha256()
    for p in parts:
        h.update(float(math.fsum(p)).hex().encode())
    return (math.fsum(np.concatenate(parts)) if parts else 0.0), h.hexdigest()[:16]


def triple_sum_naive(spec: MeanValueSpec) -> float:
    """Plain nested loops over f, n, l; the reference implementation."""
    t = [float(v) for v in spec.form.t]
    lw = spec.l_weights()
    squares = []
    for f in spec.f_values:
        for n in range(spec.N + 1, 2 * spec.N + 1):
            s = 0.0
            for j, l in enumerate(range(spec.L + 1, 2 * spec.L + 1)):
                term = t[n + l] * t[n + l + f]
                if lw is not None:
                    term = term * float(lw[j])
                s = s + term
            squares.append(s * s)
    return math.fsum(squares)


def envelope(spec: MeanValueSpec) -> float:
    """Right-hand side of the selected bound with N^eps rendered as N^eps_power."""
    N, L, F = float(spec.N), float(spec.L), float(spec.F)
    ne = N**spec.eps_power
    if spec.theorem == "conj":
        return ne * (N**2 + N * L * F)
    if spec.weighted:
        dL = spec.delta * L
        return ne * (N**3 / dL**2 + N**2 + N * dL * F)
    return ne * (N**2 * math.sqrt(F) + N * L * F)


def envelope_exponent(specs) -> float:
    """Least-squares slope of log envelope against log N."""
    N = np.log([s.N for s in specs])
    E = np.log([envelope(s) for s in specs])
    return float(np.polyfit(N, E, 1)[0])


@dataclass(frozen=True)
class ExperimentRecord:
    spec: dict
    measured_sum: float
    envelope: float
    runtime_ms: float | None
    checksum: str
    chain: str | None = None

    @property
    def ratio(self) -> float:
        return self.measured_sum / self.envelope

    def csv_row(self) -> list:
        s = self.spec
        return [
            s["theorem"],
            s["N"],
            s["L"],
            s["F"],
            "" if s["delta"] is None else repr(float(s["delta"])),
            int(bool(s["weighted"])),
            repr(self.measured_sum),
            repr(self.envelope),
            repr(self.ratio),
            "" if self.runtime_ms is None else f"{self.runtime_ms:.3f}",
        ]


def run_experiment(spec: MeanValueSpec, workers: int = 1, timing: bool = False) -> ExperimentRecord:
    t0 = time.perf_counter()
    measured, checksum = triple_sum_checksum(spec, workers)
    runtime = (time.perf_counter() - t0) * 1e3 if timing else None
    return ExperimentRecord(spec.snapshot(), measured, envelope(spec), runtime, checksum, spec.chain)


@dataclass(frozen=True)
class ChainFit:
    chain: str
    Ns: tuple
    exponent: float | None
    envelope_exponent: float | None
    max_ratio_growth: float | None
    flagged: bool
    records: tuple = field(default=(), repr=False)


def envelope_sweep(
    grid, slack: float = 1.5, workers: int = 1, timing: bool = False
) -> tuple[list[ExperimentRecord], list[ChainFit]]:
    """Run every spec, then fit growth exponents along each chain.

    Specs sharing a ``chain`` label form one chain; unlabelled specs are
    chains of their own.  A chain is flagged when the ratio grows by more
    than ``slack`` per doubling of N between consecutive points.
    """
    records = [run_experiment(s, workers, timing) for s in grid]
    chains: dict = {}
    for i, (s, r) in enumerate(zip(grid, records)):
        chains.setdefault(s.chain if s.chain is not None else f"#{i}", []).append((s, r))
    fits = []
    for name, items in chains.items():
        items.sort(key=lambda it: it[0].N)
        Ns = tuple(s.N for s, _ in items)
        if len(items) < 2:
            fits.append(ChainFit(name, Ns, None, None, None, False, tuple(r for _, r in items)))
            continue
        logN = np.log(Ns)
        exponent = float(np.polyfit(logN, np.log([r.measured_sum for _, r in items]), 1)[0])
        env_exp = envelope_exponent([s for s, _ in items])
        growth = []
        for (s0, r0), (s1, r1) in zip(items[:-1], items[1:]):
            doublings = math.log2(s1.N / s0.N)
            growth.append((r1.ratio / r0.ratio) ** (1.0 / doublings) if doublings > 0 else 1.0)
        mg = max(growth)
        fits.append(ChainFit(name, Ns, exponent, env_exp, mg, mg > slack, tuple(r for _, r in items)))
    return records, fits


def records_to_csv(records, header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        for line in header_comment.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def weighted_bf_meansquare(spec: MeanValueSpec, circle: CircleApprox, k: int | None = None) -> dict:
    """Mean squares of b_f(n) and b*_f(n) over |f| ~ F, n ~ N, plus f = 0 and the reconstruction.

    For every n the standard weights W_n, W_n^0 with ``spec.L`` and
    ``spec.delta`` are used.  ``reconstructed`` is
    sum |b*_f + sum_xi d_xi b*_{f+xi}|^2 and ``residual_budget`` is the sum of
    squared reconstruction residuals, so that
    |sqrt(direct) - sqrt(reconstructed)| <= sqrt(residual_budget).

    Envelopes, each times N^eps_power: ``star_envelope`` is
    N^3 (delta L)^-2 + N^2 + N delta L F for the b* mean square,
    ``star_f0_envelope`` is N (delta L)^2 for the f = 0 term and
    ``comparison_envelope`` is N^3 (delta L)^-3 + N^2 (delta L)^-1 + N delta L.
    """
    if spec.delta is None:
        raise InvalidArgument("weighted_bf_meansquare needs delta")
    k = circle.k if k is None else k
    fs = list(range(-2 * spec.F, -spec.F)) + list(range(spec.F + 1, 2 * spec.F + 1))
    X = circle.xi_cutoff
    dk = _window(circle.d[k], circle.bandwidth, -X, X)
    xis = np.arange(-X, X + 1)
    direct, star, recon, budget, zero_star = [], [], [], [], []
    for n in range(spec.N + 1, 2 * spec.N + 1):
        prob = standard_problem(spec.form, n=n, L=spec.L, delta=spec.delta)
        hmin, b = prob.b_vector()
        for f in fs + [0]:
            bf = b[f - hmin] if hmin <= f < hmin + len(b) else 0.0
            bst = _b_star_many(circle, hmin, b, np.concatenate([[f], f + xis]))
            rec = bst[0] + np.sum(dk * bst[1:])
            if f == 0:
                zero_star.append(abs(bst[0]) ** 2)
                continue
            direct.append(bf * bf)
            star.append(abs(bst[0]) ** 2)
            recon.append(abs(rec) ** 2)
            budget.append(abs(bf - rec) ** 2)
    N, dL, F = float(spec.N), spec.delta * spec.L, float(spec.F)
    ne = N**spec.eps_power
    return {
        "direct": math.fsum(direct),
        "star": math.fsum(star),
        "reconstructed": math.fsum(recon),
        "residual_budget": math.fsum(budget),
        "star_f0": math.fsum(zero_star),
        "star_envelope": ne * (N**3 / dL**2 + N**2 + N * dL * F),
        "star_f0_envelope": ne * N * dL**2,
        "comparison_envelope": ne * (N**3 / dL**3 + N**2 / dL + N * dL),
    }
