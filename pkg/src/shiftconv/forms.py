"""Hecke eigenvalue tables and spectral datasets.

Holomorphic coefficients are generated (weight 12, Delta); Maass data is only
ever ingested from files in the line format below::

    # comment
    maass kappa=9.53369526135355 parity=-1 alpha=1.0 nmax=3
    1 1.0
    2 -1.06833355
    3 -0.45619735

Blocks may be concatenated.  :func:`write_dataset` emits 15 significant digits.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arith import build_tables, holomorphic_hecke_table, ramanujan_tau_table
from .errors import DataFormatError, DataValidationError, InvalidArgument

__all__ = [
    "HeckeCoeffTable",
    "MaassForm",
    "HolomorphicBasis",
    "SpectralDataset",
    "delta_form",
    "hecke_violation",
    "validate_hecke",
    "load_spectral_dataset",
    "parse_spectral_dataset",
    "write_dataset",
    "format_dataset",
    "second_fourth_moment_report",
    "holomorphic_a_k",
    "exact_hecke_violation",
    "deligne_holds",
    "validate_holomorphic_bases",
]

HECKE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class HeckeCoeffTable:
    """Normalised Hecke eigenvalues t(1..n_max) of one cusp form.

    ``t`` has length n_max + 1 with ``t[0] == 0`` so that ``t[n]`` is t(n).
    ``exact`` optionally holds the unnormalised integer coefficients.
    """

    kind: str
    t: np.ndarray
    weight: int | None = None
    kappa: float | None = None
    parity: int | None = None
    exact: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("holomorphic", "maass"):
            raise InvalidArgument(f"unknown form kind {self.kind!r}")
        if self.kind == "holomorphic" and (self.weight is None or self.weight < 12 or self.weight % 2):
            raise InvalidArgument("holomorphic forms need an even weight >= 12")
        if self.kind == "maass":
            if self.kappa is None or not self.kappa > 0:
                raise InvalidArgument("Maass forms need kappa > 0")
            if self.parity not in (1, -1):
                raise InvalidArgument("Maass forms need parity +1 or -1")

    @property
    def n_max(self) -> int:
        return len(self.t) - 1

    def __call__(self, n):
        return self.t[n]

    def with_coefficients(self, t) -> "HeckeCoeffTable":
        """Same metadata, different coefficient vector (e.g. t -> -t)."""
        return HeckeCoeffTable(self.kind, np.asarray(t, dtype=np.float64), self.weight, self.kappa, self.parity)


_DELTA_CACHE: dict[int, HeckeCoeffTable] = {}


def delta_form(n_max: int) -> HeckeCoeffTable:
    """The weight-12 form Delta, t(n) = tau(n)/n^{11/2}, tabulated to n_max."""
    for size, form in _DELTA_CACHE.items():
        if size >= n_max:
            return HeckeCoeffTable("holomorphic", form.t[: n_max + 1], 12, exact=form.exact[: n_max + 1])
    tau = ramanujan_tau_table(n_max)
    form = HeckeCoeffTable("holomorphic", holomorphic_hecke_table(tau), 12, exact=tau)
    _DELTA_CACHE.clear()
    _DELTA_CACHE[n_max] = form
    return form


@dataclass(frozen=True, eq=False)
class MaassForm:
    kappa: float
    parity: int
    alpha: float
    coeffs: HeckeCoeffTable


@dataclass(frozen=True, eq=False)
class HolomorphicBasis:
    """Orthonormal Hecke basis of weight k: ``rho[j][n]`` is rho_{j,k}(n)."""

    k: int
    a_k: float
    rho: list = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class SpectralDataset:
    maass_forms: list = field(default_factory=list)
    holomorphic_bases: list | None = None

    def __len__(self):
        return len(self.maass_forms)

    def forms_in_window(self, K: float, Delta: float) -> list:
        return [f for f in self.maass_forms if K <= f.kappa <= K + Delta]


def holomorphic_a_k(k: int) -> float:
    """a_k = 2^{2-2k} pi^{-k-1} (k-1)!, evaluated in log space."""
    return math.exp((2 - 2 * k) * math.log(2.0) - (k + 1) * math.log(math.pi) + math.lgamma(k))


# --- Hecke relations -------------------------------------------------------

def hecke_violation(t, tol: float = HECKE_TOL):
    """First pair (m, n), 2 <= m <= n, mn <= n_max, breaking the Hecke relation, or None.

    The relation is t(m) t(n) = sum_{d | (m, n)} t(mn / d^2); pairs are scanned
    in increasing (m, n).
    """
    t = np.asarray(t, dtype=np.float64)
    n_max = len(t) - 1
    m = 2
    while m * m <= n_max:
        ns = np.arange(m, n_max // m + 1)
        lhs = t[m] * t[ns]
        rhs = np.zeros(len(ns))
        for d in range(1, m + 1):
            if m % d:
                continue
            mask = ns % d == 0
            rhs[mask] += t[(m * ns[mask]) // (d * d)]
        bad = np.nonzero(np.abs(lhs - rhs) > tol)[0]
        if len(bad):
            return (m, int(ns[bad[0]]))
        m += 1
    return None


def validate_hecke(form: HeckeCoeffTable, tol: float = HECKE_TOL, form_index=None) -> None:
    if form.n_max >= 1 and abs(form.t[1] - 1.0) > tol:
        raise DataValidationError(f"t(1) = {form.t[1]!r}, expected 1", form_index)
    pair = hecke_violation(form.t, tol)
    if pair is not None:
        m, n = pair
        raise DataValidationError(
            f"Hecke relation fails at (m, n) = ({m}, {n}) beyond tolerance {tol:g}", form_index, pair
        )


def exact_hecke_violation(tau, k: int = 12):
    """Integer check of tau(m)tau(n) = sum_{d|(m,n)} d^{k-1} tau(mn/d^2); first failing pair or None."""
    n_max = len(tau) - 1
    for m in range(2, math.isqrt(n_max) + 1):
        tm = tau[m]
        for n in range(m, n_max // m + 1):
            g = math.gcd(m, n)
            if g == 1:
                if tm * tau[n] != tau[m * n]:
                    return (m, n)
                continue
            rhs = 0
            for d in range(1, g + 1):
                if g % d == 0:
                    rhs += d ** (k - 1) * tau[m * n // (d * d)]
            if tm * tau[n] != rhs:
                return (m, n)
    return None


# --- file format -----------------------------------------------------------

_HEADER = re.compile(r"^maass\s+(.*)$")
_KEYS = ("kappa", "parity", "alpha", "nmax")


def _parse_header(body: str, lineno: int) -> dict:
    fields = {}
    for tok in body.split():
        if "=" not in tok:
            raise DataFormatError(f"malformed header token {tok!r}", lineno)
        key, val = tok.split("=", 1)
        if key not in _KEYS:
            raise DataFormatError(f"unknown header key {key!r}", lineno)
        fields[key] = val
    missing = [k for k in _KEYS if k not in fields]
    if missing:
        raise DataFormatError(f"header missing {', '.join(missing)}", lineno)
    try:
        kappa = float(fields["kappa"])
        alpha = float(fields["alpha"])
        nmax = int(fields["nmax"])
    except ValueError as exc:
        raise DataFormatError(f"bad header value: {exc}", lineno) from None
    if fields["parity"] not in ("+1", "-1", "1"):
        raise DataFormatError(f"parity must be +1 or -1, got {fields['parity']!r}", lineno)
    if nmax < 1:
        raise DataFormatError("nmax must be positive", lineno)
    return dict(kappa=kappa, parity=int(fields["parity"]), alpha=alpha, nmax=nmax)


def parse_spectral_dataset(text: str, validate: bool = True, tol: float = HECKE_TOL) -> SpectralDataset:
    """Parse the line format; see the module docstring."""
    blocks = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _HEADER.match(line)
        if m:
            if current is not None and current["filled"] != current["nmax"]:
                raise DataFormatError(
                    f"block ended after {current['filled']} of {current['nmax']} coefficients", lineno
                )
            current = _parse_header(m.group(1), lineno)
            current["t"] = np.zeros(current["nmax"] + 1)
            current["filled"] = 0
            current["line"] = lineno
            blocks.append(current)
            continue
        if current is None:
            raise DataFormatError("coefficient line before any 'maass' header", lineno)
        parts = line.split()
        if len(parts) != 2:
            raise DataFormatError(f"expected '<n> <t_n>', got {line!r}", lineno)
        try:
            n, val = int(parts[0]), float(parts[1])
        except ValueError:
            raise DataFormatError(f"unparsable coefficient line {line!r}", lineno) from None
        if n != current["filled"] + 1:
            raise DataFormatError(f"expected n={current['filled'] + 1}, got n={n}", lineno)
        if n > current["nmax"]:
            raise DataFormatError(f"n={n} exceeds nmax={current['nmax']}", lineno)
        current["t"][n] = val
        current["filled"] = n
    if current is not None and current["filled"] != current["nmax"]:
        raise DataFormatError(
            f"file ended after {current['filled']} of {current['nmax']} coefficients", len(text.splitlines())
        )

    forms = []
    for idx, b in enumerate(blocks):
        coeffs = HeckeCoeffTable("maass", b["t"], kappa=b["kappa"], parity=b["parity"])
        if not b["alpha"] > 0:
            raise DataValidationError(f"alpha must be positive, got {b['alpha']}", idx)
        if validate:
            validate_hecke(coeffs, tol, idx)
        forms.append(MaassForm(b["kappa"], b["parity"], b["alpha"], coeffs))
    for idx in range(1, len(forms)):
        if not forms[idx].kappa > forms[idx - 1].kappa:
            raise DataValidationError("kappa values must be strictly increasing", idx)
    return SpectralDataset(forms)


def load_spectral_dataset(path, validate: bool = True, tol: float = HECKE_TOL) -> SpectralDataset:
    return parse_spectral_dataset(Path(path).read_text(encoding="utf-8"), validate, tol)


def format_dataset(dataset: SpectralDataset) -> str:
    lines = ["# spectral dataset"]
    for f in dataset.maass_forms:
        t = f.coeffs.t
        lines.append(
            f"maass kappa={f.kappa:.15g} parity={f.parity:+d} alpha={f.alpha:.15g} nmax={len(t) - 1}"
        )
        lines.extend(f"{n} {t[n]:.15g}" for n in range(1, len(t)))
    return "\n".join(lines) + "\n"


def write_dataset(dataset: SpectralDataset, path) -> None:
    Path(path).write_text(format_dataset(dataset), encoding="utf-8")


def validate_holomorphic_bases(dataset: SpectralDataset, rtol: float = 1e-12) -> None:
    for basis in dataset.holomorphic_bases or ():
        expected = holomorphic_a_k(basis.k)
        if abs(basis.a_k - expected) > rtol * expected:
            raise DataValidationError(f"a_k for k={basis.k} is {basis.a_k!r}, expected {expected!r}")


# --- moments ---------------------------------------------------------------

def second_fourth_moment_report(form: HeckeCoeffTable, N: int) -> dict:
    """sum_{n<=N} t(n)^2 and t(n)^4, with the trend ratios m2/N and m4/N^1.05."""
    if not 1 <= N <= form.n_max:
        raise InvalidArgument(f"N={N} outside [1, {form.n_max}]")
    t = form.t[1 : N + 1]
    sq = t * t
    m2 = math.fsum(sq)
    m4 = math.fsum(sq * sq)
    return {"N": N, "m2": m2, "m4": m4, "m2_over_N": m2 / N, "m4_over_N105": m4 / N**1.05}


def deligne_holds(tau, n_max: int | None = None, k: int = 12):
    """Exact integer form of |tau(n)| <= d(n) n^{(k-1)/2}; first failing n or None."""
    n_max = len(tau) - 1 if n_max is None else n_max
    dc = build_tables(n_max).divisor_count
    for n in range(1, n_max + 1):
        if tau[n] * tau[n] > int(dc[n]) ** 2 * n ** (k - 1):
            return n
    return None
