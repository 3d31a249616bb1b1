"""Bound-state spectrum of the equal scalar/vector Manning-Rosen problem."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from . import aim
from .errors import (
    ConvergenceError,
    NoBoundState,
    NoRealAnsatz,
    NotBoundState,
    ParameterError,
    UnphysicalLevel,
)
from .potentials import PotentialSpec
from .reduction import (
    aim_problem_for,
    beta2_of,
    derived_quantities,
    gamma_branch_for,
    gamma_from_product,
    quantized_c,
)


class Provenance(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    SYMBOLIC_AIM = "symbolic-aim"
    NUMERIC_AIM = "numeric-aim"
    ORACLE = "oracle"


MODES = (Provenance.CLOSED_FORM.value, Provenance.SYMBOLIC_AIM.value, Provenance.NUMERIC_AIM.value)


@dataclass(frozen=True)
class SolverConfig:
    scan_points: int = 2048
    edge: float = 1e-9
    ftol: float = 1e-12
    numeric_k_extra: int = 8
    convention: str = "derived"


DEFAULT_CONFIG = SolverConfig()
FALLBACK_DPS = 40


@dataclass(frozen=True)
class EnergyLevel:
    n: int
    E: float
    epsilon2: float
    gamma: float
    beta2: float
    c: float
    provenance: Provenance
    residual: float = 0.0

    def as_dict(self):
        return {
            "n": self.n,
            "E": self.E,
            "epsilon2": self.epsilon2,
            "gamma": self.gamma,
            "c": self.c,
            "provenance": self.provenance.value,
            "residual": self.residual,
        }


def closed_form_epsilon2(gamma, beta2, n):
    """eps_n^2 = ((gamma+n)^4 + 4 beta^4) / (4 (gamma+n)^2); exact on Fractions."""
    g = gamma + n
    if g == 0:
        raise ParameterError("gamma + n = 0 is a pole of the closed form")
    return (g**4 + 4 * beta2 * beta2) / (4 * g * g)


# -- quantization back-ends ------------------------------------------------------

def symbolic_c(gamma, beta2, q, n):
    """c_n from the exact AIM engine (floats are taken as exact binary rationals)."""
    problem = aim_problem_for(gamma, beta2, q)
    return aim.solve_symbolic(problem, n)[n].value


def numeric_c(gamma, beta2, q, n, k_extra=8, anchor=None, dps=None):
    """c_n from the anchor-point AIM iteration.

    The bracket is centred on the closed-form value and spans half the gap
    to the neighbouring levels, so it isolates a single root of Delta_k.
    Double precision loses Delta_k to cancellation at larger k; when the
    root drift stalls the iteration is repeated at ``FALLBACK_DPS`` digits.
    """
    centre = quantized_c(gamma, beta2, n)
    gaps = []
    for j in (n - 1, n + 1):
        if j >= 0 and gamma + j != 0:
            gaps.append(abs(quantized_c(gamma, beta2, j) - centre))
    half = 0.5 * min(gaps) if gaps else 1.0
    if anchor is None:
        anchor = 0.5 / q if q > 0 else 1.0 / abs(q)
    problem = aim_problem_for(gamma, beta2, q)
    bracket = (centre - half, centre + half)
    try:
        nprob = aim.numeric_problem(problem, anchor, dps)
        return aim.solve_numeric(nprob, bracket, n, n + k_extra).value
    except ConvergenceError:
        if dps is not None and dps >= FALLBACK_DPS:
            raise
    nprob = aim.numeric_problem(problem, anchor, FALLBACK_DPS)
    return aim.solve_numeric(nprob, bracket, n, n + k_extra).value


def _eps2_for_mode(mode, gamma, beta2, q, n, config):
    if mode == Provenance.CLOSED_FORM.value:
        return closed_form_epsilon2(gamma, beta2, n), quantized_c(gamma, beta2, n)
    if mode == Provenance.SYMBOLIC_AIM.value:
        c = symbolic_c(gamma, beta2, q, n)
        return float(c * c - Fraction(beta2)), float(c)
    if mode == Provenance.NUMERIC_AIM.value:
        c = numeric_c(gamma, beta2, q, n, config.numeric_k_extra)
        return c * c - beta2, c
    raise ParameterError(f"unknown mode {mode!r}")


# -- generic level finder -------------------------------------------------------------

def _scan_roots(F, lo, hi, points):
    Es = np.linspace(lo, hi, points)
    vals = np.empty(points)
    complex_seen = False
    for i, E in enumerate(Es):
        try:
            v = F(E)
        except (NoRealAnsatz, ZeroDivisionError, ParameterError):
            complex_seen = True
            v = math.nan
        vals[i] = v if math.isfinite(v) else math.nan
    if complex_seen:
        warnings.warn("gamma is complex on part of the energy window; bracket reduced", RuntimeWarning)
    brackets = []
    for i in range(points - 1):
        a, b = vals[i], vals[i + 1]
        if math.isnan(a) or math.isnan(b):
            continue
        if a == 0:
            brackets.append((Es[i], Es[i]))
        elif a * b < 0:
            brackets.append((Es[i], Es[i + 1]))
    return brackets


def _refine(F, bracket):
    a, b = bracket
    if a == b:
        return a
    return brentq(F, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass
class _Candidate:
    E: float
    bracket: tuple
    physical: bool
    gamma: float = 0.0
    beta2: float = 0.0
    c: float = 0.0
    reason: str = ""


def _select(candidates, branch):
    physical = [cd for cd in candidates if cd.physical]
    if not candidates:
        return None, "no root"
    if not physical:
        return None, candidates[0].reason
    if branch == "particle":
        return max(physical, key=lambda cd: cd.E), ""
    if branch == "antiparticle":
        return min(physical, key=lambda cd: cd.E), ""
    raise ParameterError(f"unknown branch {branch!r}")


def _physical(q, gamma, beta2, n):
    """Boundary conditions at both ends of the s-interval for level n."""
    if gamma + n == 0:
        return False, 0.0, "gamma + n = 0"
    c = quantized_c(gamma, beta2, n)
    if c <= 0:
        return False, c, f"c_n = {c:.6g} <= 0"
    if q > 0 and gamma <= 0:
        return False, c, "gamma <= 0"
    if q < 0 and c + gamma + n >= 0:
        return False, c, "no decay as s -> infinity"
    return True, c, ""


def _general_parts(spec, convention, branch_gamma):
    def parts(E):
        _, gprod, beta2 = derived_quantities(spec.V1, spec.V2, spec.alpha, spec.q, spec.m, E, convention)
        return gamma_from_product(gprod, branch_gamma), beta2
    return parts


def _candidates(parts, spec, n, config):
    m, a2 = spec.m, spec.alpha**2

    def F(E):
        gamma, beta2 = parts(E)
        return E * E - m * m + 4 * a2 * closed_form_epsilon2(gamma, beta2, n)

    lo, hi = -m * (1 - config.edge), m * (1 - config.edge)
    cands = []
    for br in _scan_roots(F, lo, hi, config.scan_points):
        E = _refine(F, br)
        gamma, beta2 = parts(E)
        ok, c, why = _physical(spec.q, gamma, beta2, n)
        cands.append(_Candidate(E, br, ok, gamma, beta2, c, why))
    return cands


def energy_equation_roots(spec, n, *, config=DEFAULT_CONFIG):
    """Every root of the energy equation in (-m, m) with its physicality verdict."""
    parts = _general_parts(spec, config.convention, gamma_branch_for(spec.q))
    return [(cd.E, cd.physical, cd.reason) for cd in _candidates(parts, spec, n, config)]


def _solve(parts, spec, n, branch, mode, config):
    m, a2 = spec.m, spec.alpha**2
    cands = _candidates(parts, spec, n, config)
    best, why = _select(cands, branch)
    if best is None:
        if cands:
            raise UnphysicalLevel(f"level {n}: every root of the energy equation is unphysical ({why})")
        raise NoBoundState(f"no bound state for n = {n}")
    E = best.E
    prov = Provenance(mode)
    if mode != Provenance.CLOSED_FORM.value:
        def Fm(E):
            gamma, beta2 = parts(E)
            eps2, _ = _eps2_for_mode(mode, gamma, beta2, spec.q, n, config)
            return E * E - m * m + 4 * a2 * eps2
        E = _refine(Fm, best.bracket) if best.bracket[0] != best.bracket[1] else E
    gamma, beta2 = parts(E)
    eps2, c = _eps2_for_mode(mode, gamma, beta2, spec.q, n, config)
    residual = abs(E * E - m * m + 4 * a2 * eps2)
    if residual > max(config.ftol * m * m, 1e3 * np.finfo(float).eps * m * m):
        raise NoBoundState(f"energy equation residual {residual:.3e} above tolerance for n = {n}")
    return EnergyLevel(n, E, eps2, gamma, beta2, c, prov, residual)


def solve_energy(spec, n, branch="particle", *, mode="closed-form", config=DEFAULT_CONFIG):
    """Self-consistent E_n of E^2 = m^2 - alpha^2 [(gamma+n)^2 + 4 beta^4/(gamma+n)^2]."""
    if n < 0:
        raise ParameterError("n must be non-negative")
    parts = _general_parts(spec, config.convention, gamma_branch_for(spec.q))
    return _solve(parts, spec, n, branch, mode, config)


def enumerate_levels(spec, branch="particle", *, mode="closed-form", config=DEFAULT_CONFIG, n_limit=200):
    """Levels n = 0, 1, ... until the first one that does not exist."""
    levels = []
    for n in range(n_limit):
        try:
            levels.append(solve_energy(spec, n, branch, mode=mode, config=config))
        except NotBoundState:
            break
    return levels


# -- presets -------------------------------------------------------------------------

@dataclass(frozen=True)
class PresetCase:
    name: str
    q: float
    v1_sign: int
    v2_sign: int
    v2_must_vanish: bool = False

    def to_general(self, V1, V2, alpha, m=1.0):
        if self.v2_must_vanish and V2 != 0:
            raise ParameterError(f"{self.name} requires V2 = 0")
        return PotentialSpec(V1=self.v1_sign * V1, V2=self.v2_sign * V2, alpha=alpha, q=self.q, m=m)


PRESETS = {
    "poschl-teller": PresetCase("poschl-teller", -1.0, -1, 1, v2_must_vanish=True),
    "rosen-morse": PresetCase("rosen-morse", -1.0, -1, 1),
    "eckart": PresetCase("eckart", 1.0, 1, -1),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_energy(case, V1, V2, alpha, n, m=1.0, branch="particle", *, mode="closed-form",
                  config=DEFAULT_CONFIG):
    """E_n of a special case from its own parametrization.

    gamma = 1/2 +- 1/2 sqrt(1 + 8(E+m)V1/alpha^2) and the tail coupling enters
    with the sign the substitution gives it.
    """
    if isinstance(case, str):
        case = get_preset(case)
    spec = case.to_general(V1, V2, alpha, m)
    sign = "+" if case.q > 0 else "-"
    v2_eff = case.v2_sign * V2

    def parts(E):
        disc = 1 + 8 * (E + m) * V1 / alpha**2
        if disc < 0:
            raise NoRealAnsatz("gamma is complex")
        root = math.sqrt(disc)
        gamma = 0.5 + 0.5 * root if sign == "+" else 0.5 - 0.5 * root
        return gamma, beta2_of(v2_eff, alpha, m, E, config.convention)

    return _solve(parts, spec, n, branch, mode, config)


def preset_levels(case, V1, V2, alpha, m=1.0, branch="particle", **kw):
    levels = []
    for n in range(200):
        try:
            levels.append(preset_energy(case, V1, V2, alpha, n, m, branch, **kw))
        except NotBoundState:
            break
    return levels
