"""Command-line front end.

Every subcommand prints its fully resolved configuration as ``# key=value``
header lines followed by its primary output.  Values come from, in
increasing priority: built-in defaults, a ``key=value`` config file given by
``--config``, and command-line flags.  Unknown config keys are rejected.

Exit codes: 0 success, 1 validation or usage failure, 2 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, QuadratureError

__all__ = ["main", "run", "parse_config_text", "UsageError"]

DATA_ENV = "SHIFTCONV_DATA"
DATA_FILE = "maass.txt"


class UsageError(Exception):
    """Bad flag, bad config key or bad value."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


COMMON = {
    "seed": (int, 0, "master seed"),
    "threads": (int, 1, "worker thread budget"),
    "output": (str, None, "write primary output to this file"),
    "slack": (float, 1.5, "allowed ratio growth per doubling"),
}

COMMANDS = {
    "tables": {"n_max": (int, 10000, "table size")},
    "tau": {
        "n_max": (int, 30, "largest n"),
        "check": (_bool, False, "run the Hecke and Deligne checks"),
    },
    "kloosterman": {
        "m": (int, 1, "first frequency"),
        "n": (int, 1, "second frequency"),
        "q": (int, 1, "modulus"),
    },
    "circle": {
        "Q": (float, 64.0, "modulus scale"),
        "delta2": (float, 0.1, "Delta = Q^(-1+delta2)"),
        "k": (int, 3, "convolution depth"),
        "report": (str, "V", "V, sup or all"),
    },
    "lemma1": {
        "Q": (float, 64.0, "modulus scale"),
        "delta2": (float, 0.4, "Delta = Q^(-1+delta2)"),
        "k": (int, 3, "largest depth"),
        "n": (int, 1000, "base point"),
        "L": (int, 64, "window length"),
        "delta": (float, 0.125, "relative weight width"),
        "f": (int, 2, "shift"),
        "form": (str, "holo12", "coefficient source"),
    },
    "bessel": {
        "r": (float, 1.0, "imaginary order r of K_{ir}"),
        "x": (float, 1.0, "argument"),
        "order": (float, None, "also evaluate J_order(x)"),
    },
    "identities": {
        "check": (str, "voronoi", "voronoi, kuznetsov or zeta"),
        "form": (str, "holo12", "coefficient source for voronoi"),
        "dataset": (str, None, "Maass data file"),
        "a": (int, 1, "numerator"),
        "q": (int, 1, "denominator"),
        "M": (int, 256, "dual sum length"),
        "m": (int, 1, "Kuznetsov frequency m"),
        "n": (int, 1, "Kuznetsov frequency n"),
        "sign": (int, 1, "Kuznetsov sign"),
        "q_max": (int, 1000, "Kloosterman modulus cutoff"),
        "r_max": (float, 40.0, "continuous spectrum cutoff"),
        "forms": (int, None, "number of Maass forms used"),
        "t": (float, 10.0, "zeta(1 + i t)"),
        "tol": (float, 1e-6, "verification tolerance"),
    },
    "sieve": {
        "K": (float, 10.0, "spectral window start"),
        "Delta": (float, 2.0, "spectral window length"),
        "M": (int, 32, "number of coefficients"),
        "trials": (int, 50, "random trials"),
        "dataset": (str, None, "Maass data file"),
    },
    "meanvalue": {
        "theorem": (str, "2", "1, 2, 3 or conj"),
        "N": (int, 4096, "base range"),
        "L": (int, 64, "inner range"),
        "F": (int, 8, "shift range"),
        "delta": (float, None, "weight width (weighted runs)"),
        "weighted": (_bool, False, "include W_n(n + l)"),
        "two_sided": (_bool, False, "|f| ~ F instead of f ~ F"),
        "form": (str, "holo12", "coefficient source"),
        "dataset": (str, None, "Maass data file"),
        "timing": (_bool, False, "fill the runtime_ms column"),
    },
    "sweep": {
        "theorem": (str, "2", "1, 2, 3 or conj"),
        "j_min": (int, 12, "smallest N = 2^j"),
        "j_max": (int, 16, "largest N = 2^j"),
        "a": (float, 0.5, "L = ceil(N^a)"),
        "b": (float, 0.3, "F = ceil(N^b)"),
        "delta": (float, None, "weight width (weighted runs)"),
        "weighted": (_bool, False, "include W_n(n + l)"),
        "form": (str, "holo12", "coefficient source"),
        "dataset": (str, None, "Maass data file"),
        "timing": (_bool, False, "fill the runtime_ms column"),
    },
}


def parse_config_text(text: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment, blank lines are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shiftconv", description="Shifted convolution sum experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, params in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        for key, (typ, _, helptext) in {**COMMON, **params}.items():
            p.add_argument(f"--{key}", dest=key, type=str, default=argparse.SUPPRESS, help=helptext)
    return parser


def _resolve(command: str, ns: argparse.Namespace) -> dict:
    params = {**COMMON, **COMMANDS[command]}
    raw = {}
    if ns.config:
        cfg = parse_config_text(Path(ns.config).read_text())
        unknown = sorted(set(cfg) - set(params))
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        raw.update(cfg)
    raw.update({k: v for k, v in vars(ns).items() if k in params})
    resolved = {}
    for key, (typ, default, _) in params.items():
        if key in raw and raw[key] is not None:
            try:
                resolved[key] = typ(raw[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"--{key}: invalid value {raw[key]!r}") from exc
        else:
            resolved[key] = default
    if resolved["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    return resolved


def _header(command: str, cfg: dict) -> str:
    lines = [f"# command={command}"]
    lines += [f"# {k}={cfg[k]}" for k in sorted(cfg)]
    return "\n".join(lines) + "\n"


def _dataset_path(cfg: dict):
    if cfg.get("dataset"):
        return Path(cfg["dataset"])
    root = os.environ.get(DATA_ENV)
    if root:
        p = Path(root) / DATA_FILE
        if p.exists():
            return p
    return None


def _load_dataset(cfg: dict):
    from .forms import load_spectral_dataset

    path = _dataset_path(cfg)
    return load_spectral_dataset(path) if path is not None else None


def _form(cfg: dict, need: int):
    from .errors import InvalidArgument
    from .forms import delta_form

    name = cfg["form"]
    if name == "holo12":
        return delta_form(need)
    if name.startswith("maass:"):
        ds = _load_dataset(cfg)
        if ds is None:
            raise InvalidArgument(f"form {name} needs a dataset (--dataset or ${DATA_ENV})")
        idx = int(name.split(":", 1)[1])
        if not 0 <= idx < len(ds.maass_forms):
            raise InvalidArgument(f"dataset has {len(ds.maass_forms)} forms, no index {idx}")
        return ds.maass_forms[idx].coeffs
    raise InvalidArgument(f"unknown form {name!r} (use holo12 or maass:<index>)")


def _num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


# --- command bodies; each returns the primary output text ---------------------

def _cmd_tables(cfg):
    from .arith import build_tables

    t = build_tables(cfg["n_max"])
    return (
        f"n_max={t.n_max}\nprimes={len(t.primes)}\n"
        f"mertens={int(t.mobius[1:].astype(np.int64).sum())}\n"
        f"totient_sum={int(t.totient[1:].sum())}\ndivisor_sum={int(t.divisor_count[1:].sum())}\n"
    )


def _cmd_tau(cfg):
    from .arith import ramanujan_tau_table
    from .forms import deligne_holds, exact_hecke_violation

    tau = ramanujan_tau_table(cfg["n_max"])
    out = [f"{n} {int(tau[n])}" for n in range(1, cfg["n_max"] + 1)]
    if cfg["check"]:
        bad = exact_hecke_violation(tau)
        out.append(f"hecke={'ok' if bad is None else 'fail ' + str(bad)}")
        bad_n = deligne_holds(tau)
        out.append(f"deligne={'ok' if bad_n is None else 'fail ' + str(bad_n)}")
        if bad is not None or bad_n is not None:
            raise ConsistencyError("\n".join(out))
    return "\n".join(out) + "\n"


def _cmd_kloosterman(cfg):
    from .kloosterman import kloosterman

    return _num(kloosterman(cfg["m"], cfg["n"], cfg["q"])) + "\n"


def _cmd_circle(cfg):
    from .circle import build_circle_approx, e_sup_norm, parseval_variance, variance_V

    ap = build_circle_approx(cfg["Q"], cfg["delta2"], cfg["k"])
    out = []
    if cfg["report"] in ("V", "all"):
        V = variance_V(ap, workers=cfg["threads"])
        out.append(f"V={V!r}")
        out.append(f"scaled={V * ap.lam / math.log(1.0 / ap.Delta) ** 3!r}")
    if cfg["report"] in ("sup", "all"):
        out.append(f"sup_E={e_sup_norm(ap, workers=cfg['threads'])!r}")
    if cfg["report"] == "all":
        out.append(f"parseval={parseval_variance(ap)!r}")
        out.append(f"Delta={ap.Delta!r}")
        out.append(f"lambda={ap.lam!r}")
        out.append(f"Lambda_over_Q2={ap.Lambda_over_Q2()!r}")
    if not out:
        raise UsageError(f"--report: expected V, sup or all, got {cfg['report']!r}")
    return "\n".join(out) + "\n"


def _cmd_lemma1(cfg):
    from .circle import build_circle_approx, lemma1_residual, standard_problem

    L, delta, n = cfg["L"], cfg["delta"], cfg["n"]
    need = int(math.ceil(n + (1 + delta) * L + 2 * delta * L)) + 2
    prob = standard_problem(_form(cfg, need), n=n, L=L, delta=delta)
    ap = build_circle_approx(cfg["Q"], cfg["delta2"], cfg["k"])
    out = []
    for k in range(1, cfg["k"] + 1):
        r = lemma1_residual(prob, ap, cfg["f"], k)
        out.append(f"k={k} residual={r.residual!r} normalized={r.normalized!r}")
    return "\n".join(out) + "\n"


def _cmd_bessel(cfg):
    from .bessel import bessel_J, bessel_K_imag, bessel_K_imag_watson

    r, x = cfg["r"], cfg["x"]
    kd, kw = bessel_K_imag(r, x), bessel_K_imag_watson(r, x)
    out = [f"K_direct={kd!r}", f"K_watson={kw!r}", f"K_diff={abs(kd - kw)!r}"]
    if cfg["order"] is not None:
        out.append(f"J={float(bessel_J(cfg['order'], x))!r}")
    return "\n".join(out) + "\n"


def _cmd_identities(cfg):
    from .identities import kuznetsov_residual, voronoi_residual, zeta_one_plus_it
    from .weights import make_bump

    check = cfg["check"]
    if check == "zeta":
        z = zeta_one_plus_it(cfg["t"])
        return json.dumps({"t": cfg["t"], "re": z.real, "im": z.imag}) + "\n"
    if check == "voronoi":
        W = make_bump(50, 55, 60, 70)
        form = _form(cfg, max(cfg["M"], 70))
        rep = voronoi_residual(form, W, cfg["a"], cfg["q"], cfg["M"], tol=cfg["tol"])
        return rep.to_json() + "\n"
    if check == "kuznetsov":
        psi = make_bump(1.0, 1.25, 1.75, 2.0)
        rep = kuznetsov_residual(
            cfg["m"], cfg["n"], cfg["sign"], psi, _load_dataset(cfg),
            q_max=cfg["q_max"], r_max=cfg["r_max"], forms=cfg["forms"], tol=cfg["tol"],
        )
        return rep.to_json() + "\n"
    raise UsageError(f"--check: expected voronoi, kuznetsov or zeta, got {check!r}")


def _cmd_sieve(cfg):
    from .identities import continuous_sieve_ratio, spectral_sieve_ratio

    c = continuous_sieve_ratio(cfg["K"], cfg["Delta"], cfg["M"], cfg["trials"], cfg["seed"])
    s = spectral_sieve_ratio(_load_dataset(cfg), cfg["K"], cfg["Delta"], cfg["M"], cfg["trials"], cfg["seed"])
    return f"continuous_ratio={c!r}\nspectral_ratio={s.ratio!r}\nspectral_forms={s.forms_used}\nspectral_status={s.status}\n"


def _spec(cfg, N, L, F, form=None, chain=None):
    from .meanvalue import MeanValueSpec

    need = 2 * N + 2 * L + 2 * F
    return MeanValueSpec(
        form if form is not None else _form(cfg, need), N, L, F, cfg["delta"], cfg["weighted"], cfg["theorem"],
        chain=chain, two_sided=cfg.get("two_sided", False),
    )


def _cmd_meanvalue(cfg):
    from .meanvalue import records_to_csv, run_experiment

    rec = run_experiment(_spec(cfg, cfg["N"], cfg["L"], cfg["F"]), workers=cfg["threads"], timing=cfg["timing"])
    return records_to_csv([rec])


def _cmd_sweep(cfg):
    from .meanvalue import envelope_sweep, records_to_csv

    Ns = [2**j for j in range(cfg["j_min"], cfg["j_max"] + 1)]
    sizes = [(N, math.ceil(N ** cfg["a"]), math.ceil(N ** cfg["b"])) for N in Ns]
    need = max(2 * N + 2 * L + 2 * F for N, L, F in sizes)
    form = _form(cfg, need)
    specs = [_spec(cfg, N, L, F, form, chain="sweep") for N, L, F in sizes]
    records, fits = envelope_sweep(specs, slack=cfg["slack"], workers=cfg["threads"], timing=cfg["timing"])
    text = records_to_csv(records)
    for fit in fits:
        if fit.exponent is None:
            continue
        text += (
            f"# fit chain={fit.chain} exponent={fit.exponent!r} envelope_exponent={fit.envelope_exponent!r} "
            f"max_ratio_growth={fit.max_ratio_growth!r} flagged={fit.flagged}\n"
        )
    return text


_BODIES = {
    "tables": _cmd_tables,
    "tau": _cmd_tau,
    "kloosterman": _cmd_kloosterman,
    "circle": _cmd_circle,
    "lemma1": _cmd_lemma1,
    "bessel": _cmd_bessel,
    "identities": _cmd_identities,
    "sieve": _cmd_sieve,
    "meanvalue": _cmd_meanvalue,
    "sweep": _cmd_sweep,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        ns = _build_parser().parse_args(argv)
        cfg = _resolve(ns.command, ns)
        body = _BODIES[ns.command](cfg)
    except UsageError as exc:
        print(f"shiftconv: error: {exc}", file=stderr)
        return 1
    except (ConsistencyError, QuadratureError) as exc:
        print(f"shiftconv: consistency failure: {exc}", file=stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"shiftconv: invalid input: {exc}", file=stderr)
        return 1
    text = _header(ns.command, cfg) + body
    if cfg["output"]:
        Path(cfg["output"]).write_text(text)
    else:
        stdout.write(text)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))
