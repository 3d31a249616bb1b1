"""mr-solve: spectra, eigenfunction samples and self-checks from the command line."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import oracle, spectrum, wavefunction
from .aim import solve_symbolic
from .errors import NotBoundState, SolverError
from .potentials import PotentialSpec
from .reduction import BETA2_CONVENTIONS, aim_problem_for, quantized_c, transform_residual_check

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_NO_STATES, EXIT_VERIFY = 0, 1, 2, 3

# binding reference set used when no potential flags are given
DEFAULTS = {"m": 1.0, "alpha": 0.1, "q": 1.0, "v1": 0.02, "v2": -0.2}
PRESET_DEFAULTS = {**DEFAULTS, "v1": 0.05, "v2": 0.0}
ORACLE_TOL = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec: PotentialSpec | None
    n: int | None
    n_max: int | None
    fmt: str
    out: str | None
    mode: str
    grid_n: int
    convention: str
    preset: str | None
    samples: int
    raw: tuple = ()


# -- output helpers ----------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(doc):
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(exc):
    doc = {"schema": SCHEMA, "error": {"type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(dumps(doc))


def _threads():
    raw = os.environ.get("MR_SOLVE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return min(4, os.cpu_count() or 1)


def _pmap(fn, items):
    items = list(items)
    workers = min(_threads(), max(1, len(items)))
    if workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _solver_config(cfg):
    return spectrum.SolverConfig(convention=cfg.convention)


def _level_doc(level):
    return level.as_dict()


# -- commands ----------------------------------------------------------------------

def _levels(spec, cfg):
    sc = _solver_config(cfg)
    if cfg.n_max is None:
        return spectrum.enumerate_levels(spec, mode=cfg.mode, config=sc)

    def one(n):
        try:
            return spectrum.solve_energy(spec, n, mode=cfg.mode, config=sc)
        except NotBoundState:
            return None

    out = []
    for lv in _pmap(one, range(cfg.n_max)):
        if lv is None:
            break
        out.append(lv)
    return out


def cmd_spectrum(cfg, extra=None):
    levels = _levels(cfg.spec, cfg)
    doc = {"schema": SCHEMA}
    if extra:
        doc.update(extra)
    doc.update({
        "parameters": cfg.spec.as_dict(),
        "mode": cfg.mode,
        "beta2_convention": cfg.convention,
        "levels": [_level_doc(lv) for lv in levels],
    })
    _emit(dumps(doc), cfg.out)
    return EXIT_OK if levels else EXIT_NO_STATES


def cmd_preset(cfg):
    case = spectrum.get_preset(cfg.preset)
    p = dict(cfg.raw)
    general = case.to_general(p["v1"], p["v2"], p["alpha"], p["m"])
    sub = RunConfig(**{**cfg.__dict__, "spec": general})
    extra = {"preset": {"name": case.name, "V1": p["v1"], "V2": p["v2"], "alpha": p["alpha"], "m": p["m"]}}
    return cmd_spectrum(sub, extra)


def cmd_wavefunction(cfg):
    spec = cfg.spec
    try:
        level = spectrum.solve_energy(spec, cfg.n, mode=cfg.mode, config=_solver_config(cfg))
    except NotBoundState as exc:
        sys.stderr.write(dumps({"schema": SCHEMA, "error": {"type": "MissingLevel", "message": str(exc)}}))
        return EXIT_NO_STATES
    eig = wavefunction.normalize(wavefunction.eigenfunction(level, spec.q, spec.alpha))
    xs, ss, raw, normed = wavefunction.sample_table(eig, cfg.samples)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "s", "psi", "psi_normalized"])
        for row in zip(xs, ss, raw, normed):
            w.writerow([repr(float(v)) for v in row])
        _emit(buf.getvalue(), cfg.out)
    else:
        doc = {
            "schema": SCHEMA,
            "parameters": spec.as_dict(),
            "level": _level_doc(level),
            "norm": eig.norm,
            "samples": [{"x": a, "s": b, "psi": c, "psi_normalized": d}
                        for a, b, c, d in zip(xs.tolist(), ss.tolist(), raw.tolist(), normed.tolist())],
        }
        _emit(dumps(doc), cfg.out)
    return EXIT_OK


# -- verification suite ------------------------------------------------------------

def _check(name, passed, **measured):
    return {"name": name, "passed": bool(passed), **measured}


def check_box():
    r = oracle.box_self_test()
    return _check("oracle-box-self-test", r["passed"], rel_error=r["rel_error"], ratio=r["ratio"])


def check_symbolic(seed=7, count=3, n_max=2):
    rng = random.Random(seed)
    worst = 0
    for _ in range(count):
        g = Fraction(rng.randint(2, 10), 2)
        b2 = Fraction(rng.randint(-8, 8), 2)
        lv = solve_symbolic(aim_problem_for(g, b2, 1), n_max)
        for n in range(n_max + 1):
            worst += lv[n].value != quantized_c(g, b2, n)
    return _check("symbolic-aim-equals-closed-form", worst == 0, mismatches=worst)


def check_numeric(n_max=2):
    g, b2 = Fraction(2), Fraction(1)
    worst = 0.0
    for n in range(n_max + 1):
        exact = float(quantized_c(g, b2, n))
        num = spectrum.numeric_c(float(g), float(b2), 1.0, n)
        worst = max(worst, abs((num**2 - float(b2)) - (exact**2 - float(b2))))
    return _check("numeric-aim-equals-symbolic", worst <= 1e-8, max_abs_error=worst)


def check_oracle(spec, cfg, n_max=3):
    sc = _solver_config(cfg)
    grid = oracle.default_grid(spec, N=cfg.grid_n)

    def solve(n):
        try:
            return oracle.solve_level(spec, n, grid, convergence=True)[0]
        except NotBoundState:
            return None

    found = [lv for lv in _pmap(solve, range(n_max))]
    found = found[: found.index(None)] if None in found else found
    levels = spectrum.enumerate_levels(spec, config=sc)[:n_max]
    rows, ok = [], len(found) == len(levels)
    for ol, sl in zip(found, levels):
        ref = ol.extrapolated
        rel = abs(sl.E - ref) / abs(ref)
        ratio_ok = abs(ol.ratio - 4.0) < 0.5
        ok = ok and rel <= ORACLE_TOL and ratio_ok
        rows.append({"n": ol.n, "E_solver": sl.E, "E_oracle": ol.E, "E_oracle_extrapolated": ref,
                     "relative_error": rel, "grid_ratio": ol.ratio})
    return _check("spectrum-vs-oracle", ok, tolerance=ORACLE_TOL, oracle_levels=len(found),
                  solver_levels=len(levels), levels=rows)


# (V1, V2, alpha) with at least two levels for each special case
PRESET_CHECK_PARAMS = {
    "eckart": (0.02, 0.2, 0.1),
    "poschl-teller": (0.05, 0.0, 0.1),
    "rosen-morse": (0.05, 0.01, 0.1),
}


def check_presets(names=None):
    out = []
    for name in names or sorted(spectrum.PRESETS):
        case = spectrum.PRESETS[name]
        V1, V2, alpha = PRESET_CHECK_PARAMS[name]
        general = case.to_general(V1, V2, alpha)
        a = spectrum.preset_levels(case, V1, V2, alpha)
        b = spectrum.enumerate_levels(general)
        worst = max((abs(x.E - y.E) / abs(y.E) for x, y in zip(a, b)), default=0.0)
        out.append(_check(f"preset-identity-{name}", len(a) == len(b) and a and worst <= 1e-12,
                          levels=len(a), max_relative_error=worst))
    return out


def check_eigenfunctions(spec, cfg):
    levels = spectrum.enumerate_levels(spec, config=_solver_config(cfg))
    worst_res, ok = 0.0, True
    for lv in levels:
        eig = wavefunction.normalize(wavefunction.eigenfunction(lv, spec.q, spec.alpha))
        res = wavefunction.ode_residual(eig, wavefunction.sample_s(eig, 32))
        worst_res = max(worst_res, res)
        ok = ok and res <= 1e-8 and wavefunction.count_nodes(eig) == lv.n
        ok = ok and wavefunction.boundary_decay(eig)["ok"]
        ok = ok and abs(wavefunction.norm_integral(eig) - 1) <= 1e-9
    return _check("eigenfunction-quality", ok and bool(levels), levels=len(levels), max_residual=worst_res)


def check_transform(spec, cfg):
    levels = spectrum.enumerate_levels(spec, config=_solver_config(cfg))
    E = levels[0].E if levels else 0.5 * spec.m
    lo = 0.0 if spec.q < 0 else math.log(spec.q) / (2 * spec.alpha)
    xs = np.linspace(lo + 0.5 / spec.alpha, lo + 5 / spec.alpha, 9)
    res = transform_residual_check(spec, E, lambda x: mpmath.exp(-(x - xs[4]) ** 2 * spec.alpha**2),
                                   xs, convention=cfg.convention)
    return _check("change-of-variables", res <= 1e-9, residual=res)


def cmd_verify(cfg):
    t0 = time.perf_counter()
    checks = []
    if cfg.preset:
        checks.extend(check_presets([spectrum.get_preset(cfg.preset).name]))
    else:
        box = check_box()
        checks.append(box)
        checks.append(check_symbolic())
        checks.append(check_numeric())
        if box["passed"]:
            checks.append(check_oracle(cfg.spec, cfg))
        else:
            checks.append(_check("spectrum-vs-oracle", False, skipped="box self-test failed"))
        checks.extend(check_presets())
        checks.append(check_eigenfunctions(cfg.spec, cfg))
        checks.append(check_transform(cfg.spec, cfg))
    passed = all(c["passed"] for c in checks)
    doc = {
        "schema": SCHEMA,
        "parameters": cfg.spec.as_dict(),
        "beta2_convention": cfg.convention,
        "passed": passed,
        "checks": checks,
        "seconds": round(time.perf_counter() - t0, 3),
    }
    _emit(dumps(doc), cfg.out)
    return EXIT_OK if passed else EXIT_VERIFY


# -- argument handling -------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="mr-solve", description="Klein-Gordon bound states of the deformed Manning-Rosen potential")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt="json"):
        p.add_argument("--m", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--v1", type=float, default=None)
        p.add_argument("--v2", type=float, default=None)
        p.add_argument("--mode", choices=spectrum.MODES, default="closed-form")
        p.add_argument("--beta2-convention", choices=BETA2_CONVENTIONS, default="derived")
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
        p.add_argument("--out", default=None)
        p.add_argument("--grid-n", type=int, default=4000)

    p = sub.add_parser("spectrum", help="bound-state energies")
    common(p)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--levels", type=int, default=None)

    p = sub.add_parser("wavefunction", help="sampled eigenfunction")
    common(p, fmt="csv")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--samples", type=int, default=512)

    p = sub.add_parser("verify", help="run the self-check suite")
    common(p)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--preset", default=None)

    p = sub.add_parser("preset", help="spectrum of a named special case")
    common(p)
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--preset", default=None)
    p.add_argument("--levels", type=int, default=None)
    return parser


def _resolve(args):
    raw = {k: getattr(args, k, None) for k in DEFAULTS}
    for k, v in (PRESET_DEFAULTS if args.command == "preset" else DEFAULTS).items():
        if raw[k] is None:
            raw[k] = v
    if args.format == "csv" and args.command != "wavefunction":
        raise UsageError("csv output is only available for wavefunction")
    if args.grid_n < oracle.MIN_POINTS:
        raise UsageError(f"--grid-n must be at least {oracle.MIN_POINTS}")
    preset = getattr(args, "preset", None)
    if args.command == "preset":
        preset = args.name or preset
        if preset is None:
            raise UsageError("preset name required")
        spec = None
    else:
        spec = PotentialSpec(V1=raw["v1"], V2=raw["v2"], alpha=raw["alpha"], q=raw["q"], m=raw["m"])
    levels = getattr(args, "levels", None)
    if levels is not None and levels < 1:
        raise UsageError("--levels must be positive")
    n = getattr(args, "n", None)
    if n is not None and n < 0:
        raise UsageError("--n must be non-negative")
    samples = getattr(args, "samples", 512)
    if samples < 2:
        raise UsageError("--samples must be at least 2")
    return RunConfig(args.command, spec, n, levels, args.format, args.out, args.mode, args.grid_n,
                     args.beta2_convention, preset, samples, tuple(raw.items()))


COMMANDS = {"spectrum": cmd_spectrum, "wavefunction": cmd_wavefunction, "verify": cmd_verify, "preset": cmd_preset}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = _resolve(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, SolverError, ValueError) as exc:
        _error(exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
