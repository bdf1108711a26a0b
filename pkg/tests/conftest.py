import math

import numpy as np
import pytest

from shiftconv.arith import build_tables
from shiftconv.forms import HeckeCoeffTable, MaassForm, SpectralDataset, delta_form


def synthetic_hecke(n_max: int, seed: int = 0) -> np.ndarray:
    """Exactly Hecke-multiplicative table from random Satake angles.

    t(p^k) = sin((k+1) theta_p) / sin(theta_p), extended multiplicatively.
    """
    rng = np.random.default_rng(seed)
    tables = build_tables(n_max)
    theta = {int(p): rng.uniform(0.1, math.pi - 0.1) for p in tables.primes}
    t = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        val = 1.0
        for p, e in tables.factorize(n) if n > 1 else []:
            th = theta[p]
            val *= math.sin((e + 1) * th) / math.sin(th)
        t[n] = val
    return t


def synthetic_dataset(count: int = 2, n_max: int = 40, seed: int = 0) -> SpectralDataset:
    forms = []
    for j in range(count):
        t = synthetic_hecke(n_max, seed + j)
        coeffs = HeckeCoeffTable("maass", t, kappa=9.5 + j, parity=1 if j % 2 == 0 else -1)
        forms.append(MaassForm(9.5 + j, coeffs.parity, 0.5 + 0.25 * j, coeffs))
    return SpectralDataset(forms)


@pytest.fixture(scope="session")
def delta3000():
    return delta_form(3000)


def random_meanvalue_spec(rng, forms):
    """A valid MeanValueSpec with N <= 64 covering every theorem code path."""
    from shiftconv.meanvalue import MeanValueSpec

    theorem = str(rng.choice(["1", "2", "3", "3w", "conj"]))
    weighted = theorem in ("1", "3w")
    theorem = theorem.rstrip("w")
    N = int(rng.integers(4, 65))
    L = int(rng.integers(1, int(N**0.99) + 1))
    form = forms[int(rng.integers(len(forms)))]
    if weighted:
        delta = float(rng.uniform(0.05, 0.25))
        B = float(rng.uniform(1.0, 1.5))
        F = max(1, min(int(rng.integers(1, 6)), int(delta * L)))
        if F > delta * L:
            L = max(L, int(math.ceil(F / delta)))
            N = max(N, int(math.ceil(L ** (1 / 0.99))) + 1)
        return MeanValueSpec(form, N, L, F, delta, True, theorem, B=B, two_sided=bool(rng.integers(2)))
    cap = int(N**0.4) if theorem in ("2", "3") else 6
    F = int(rng.integers(1, max(cap, 1) + 1))
    two_sided = bool(rng.integers(2)) and 2 * F <= N + L + 1
    return MeanValueSpec(form, N, L, F, None, False, theorem, two_sided=two_sided)


@pytest.fixture(scope="session")
def mv_forms():
    maass = HeckeCoeffTable("maass", synthetic_hecke(600, 7), kappa=9.5, parity=1)
    return [delta_form(600), maass]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
