"""Reduction of the equal scalar/vector Klein-Gordon problem to AIM form.

With S = V the equation reads

    Psi''(x) + [(E^2 - m^2) - 2(E + m) V(x)] Psi(x) = 0,

and s = exp(-2 alpha x) turns it into

    Psi_ss + Psi_s/s + [-eps2/s^2 - g q/(s(1-qs)^2) - beta2(1+qs)/(s^2(1-qs))] Psi = 0

with eps2 = (m^2 - E^2)/(4 alpha^2), g = gamma(gamma-1) = 2(E+m)V1/(q alpha^2)
and beta2 = (E+m)V2/(2 alpha^2).  Writing Psi = s^c (1-qs)^gamma f(s) leaves
f'' = lambda0 f' + s0 f with rational lambda0, s0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .aim import AimProblem
from .algebra import Poly, RationalFunction
from .errors import DomainError, NoRealAnsatz, NotBoundState, ParameterError
from .potentials import domain_of, potential_minimum_s

BETA2_CONVENTIONS = ("derived", "printed")


def beta2_of(V2, alpha, m, E, convention="derived"):
    """beta^2 at energy E.

    ``printed`` is the compatibility value (E+m)V2/alpha^2, twice the one
    the change of variables produces.
    """
    if convention == "derived":
        return (E + m) * V2 / (2 * alpha * alpha)
    if convention == "printed":
        return (E + m) * V2 / (alpha * alpha)
    raise ParameterError(f"unknown beta2 convention {convention!r}")


def derived_quantities(V1, V2, alpha, q, m, E, convention="derived"):
    """(eps2, gamma(gamma-1), beta2); exact when the inputs are Fractions."""
    eps2 = (m * m - E * E) / (4 * alpha * alpha)
    gprod = 2 * (E + m) * V1 / (q * alpha * alpha)
    return eps2, gprod, beta2_of(V2, alpha, m, E, convention)


def gamma_branch_for(q):
    """'+' for q > 0 (vanishing at s = 1/q), '-' for q < 0 (decay as s -> inf)."""
    return "+" if q > 0 else "-"


def gamma_from_product(gprod, branch):
    disc = 1 + 4 * gprod
    if disc < 0:
        raise NoRealAnsatz(f"gamma is complex (discriminant {float(disc):.6g} < 0)")
    root = math.sqrt(disc)
    return 0.5 + 0.5 * root if branch == "+" else 0.5 - 0.5 * root


@dataclass(frozen=True)
class ReducedParams:
    epsilon2: float
    gamma: float
    beta2: float
    c: float
    kappa: float
    u: float
    l: float


@dataclass(frozen=True)
class AnsatzSpec:
    """Exponents of Psi = s^c (1 - q s)^gamma f(s)."""

    c: float
    gamma: float


def params_from(gamma, beta2, c, epsilon2=None):
    if epsilon2 is None:
        epsilon2 = c * c - beta2
    return ReducedParams(
        epsilon2=epsilon2,
        gamma=gamma,
        beta2=beta2,
        c=c,
        kappa=2 * c + 2 * gamma + 1,
        u=2 * c + 1,
        l=2 * beta2 + 2 * c * gamma + gamma * gamma,
    )


def reduce(spec, trial_energy, *, convention="derived", branch=None):
    """Reduced parameters at ``trial_energy`` (bound-state mode, |E| < m)."""
    E = float(trial_energy)
    if abs(E) >= spec.m:
        raise NotBoundState(f"|E| = {abs(E)} is not below m = {spec.m}")
    eps2, gprod, beta2 = derived_quantities(spec.V1, spec.V2, spec.alpha, spec.q, spec.m, E, convention)
    if eps2 <= 0:
        raise NotBoundState("eps^2 must be positive")
    gamma = gamma_from_product(gprod, branch or gamma_branch_for(spec.q))
    c2 = eps2 + beta2
    if c2 < 0:
        raise NotBoundState(f"eps^2 + beta^2 = {c2:.6g} < 0, c is not real")
    return params_from(gamma, beta2, math.sqrt(c2), eps2)


def _rational(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def aim_problem_for(gamma, beta2, q, c=None):
    """lambda0 = (q s kappa - u)/(s(1-qs)),  s0 = q l/(s(1-qs)).

    With ``c=None`` the exponent c stays symbolic (quantization mode);
    otherwise it is substituted exactly (evaluation mode).  Float inputs are
    converted to the exact binary rationals they represent.
    """
    g, b2, q = _rational(gamma), _rational(beta2), _rational(q)
    if q == 0:
        raise ParameterError("q must be nonzero")
    cc = Poly.variable("c") if c is None else _rational(c)
    kappa = 2 * cc + 2 * g + 1
    u = 2 * cc + 1
    ell = 2 * b2 + 2 * cc * g + g * g
    den = Poly([0, 1, -q], "s")
    lam0 = RationalFunction(Poly([-u, q * kappa], "s"), den)
    s0 = RationalFunction(Poly([q * ell], "s"), den)
    return AimProblem(lam0, s0, "c" if c is None else None)


def build_aim_problem(params, q, *, symbolic=True):
    return aim_problem_for(params.gamma, params.beta2, q, None if symbolic else params.c)


def quantized_c(gamma, beta2, n):
    """Closed-form quantization value of c for level n."""
    g = gamma + n
    if g == 0:
        raise ZeroDivisionError("gamma + n vanishes")
    return -(2 * beta2 + g * g) / (2 * g)


def default_anchor(spec):
    """Anchor in s: potential minimum if there is one, else the s-interval middle."""
    s = potential_minimum_s(spec)
    if s is not None:
        return s
    return 0.5 / spec.q if spec.q > 0 else 1.0 / abs(spec.q)


# -- change-of-variables check ---------------------------------------------------

def _potential_mp(spec, x):
    s = mpmath.exp(-2 * spec.alpha * x)
    d = 1 - spec.q * s
    return 4 * spec.V1 * s / d**2 + spec.V2 * (1 + spec.q * s) / d


def transform_residual_check(spec, energy, test_function, x_grid, *, convention="derived", dps=30):
    """Largest discrepancy between the x-form and the s-form operators.

    Both operators are applied to the same function (the s-form through
    s = exp(-2 alpha x)) using high-precision finite differences; the s-form
    is multiplied by the Jacobian factor 4 alpha^2 s^2.  The maximum absolute
    difference is returned relative to the largest term magnitude seen on
    the grid (or as is, when every term is below 1).
    """
    xs = np.asarray(x_grid, dtype=float)
    dom = domain_of(spec)
    if dom.singular_point is not None and np.any(xs <= dom.singular_point):
        raise DomainError("grid touches the singular point", location=dom.singular_point)
    a, m, q, E = spec.alpha, spec.m, spec.q, float(energy)
    eps2, gprod, beta2 = derived_quantities(spec.V1, spec.V2, a, q, m, E, convention)
    worst = 0.0
    scale = 0.0
    with mpmath.workdps(dps):
        def phi(s):
            return test_function(-mpmath.log(s) / (2 * a))

        for x in xs:
            x = mpmath.mpf(x)
            psi = test_function(x)
            d2x = mpmath.diff(test_function, x, 2)
            v = _potential_mp(spec, x)
            lhs = d2x + ((E * E - m * m) - 2 * (E + m) * v) * psi
            s = mpmath.exp(-2 * a * x)
            d1s = mpmath.diff(phi, s, 1)
            d2s = mpmath.diff(phi, s, 2)
            bracket = (-eps2 / s**2 - gprod * q / (s * (1 - q * s) ** 2)
                       - beta2 * (1 + q * s) / (s**2 * (1 - q * s)))
            rhs = 4 * a * a * s * s * (d2s + d1s / s + bracket * psi)
            worst = max(worst, float(abs(lhs - rhs)))
            scale = max(scale, float(abs(d2x)), float(abs((E * E - m * m) * psi)),
                        float(abs(2 * (E + m) * v * psi)))
    return worst / max(scale, 1.0)
