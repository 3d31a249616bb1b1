"""Deformed hyperbolic functions and the q-deformed Manning-Rosen potential."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, ParameterError


def check_q(q):
    """Validate the deformation parameter: -1 <= q < 0 or q > 0."""
    q = float(q)
    if not math.isfinite(q) or q == 0 or q < -1:
        raise ParameterError(f"q out of range: {q} (need -1 <= q < 0 or q > 0)")
    return q


def sinh_q(y, q):
    return 0.5 * (np.exp(y) - q * np.exp(-y))


def cosh_q(y, q):
    return 0.5 * (np.exp(y) + q * np.exp(-y))


def _pole_check(y, q):
    sh = sinh_q(y, q)
    scale = 0.5 * (np.exp(y) + abs(q) * np.exp(-y))
    if np.any(np.abs(sh) <= 4 * np.finfo(float).eps * scale):
        pole = 0.5 * math.log(q) if q > 0 else None
        raise DomainError(f"sinh_q vanishes at y = {pole}", location=pole)
    return sh


def coth_q(y, q):
    return cosh_q(y, q) / _pole_check(y, q)


def cosech_q(y, q):
    return 1.0 / _pole_check(y, q)


@dataclass(frozen=True)
class PotentialSpec:
    """Physical parameters of one problem instance (natural units)."""

    V1: float
    V2: float
    alpha: float
    q: float
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "q", check_q(self.q))
        for name in ("V1", "V2", "alpha", "m"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.m <= 0:
            raise ParameterError(f"m must be positive, got {self.m}")

    def replace(self, **changes):
        fields = dict(V1=self.V1, V2=self.V2, alpha=self.alpha, q=self.q, m=self.m)
        fields.update(changes)
        return PotentialSpec(**fields)

    def as_dict(self):
        return {"V1": self.V1, "V2": self.V2, "alpha": self.alpha, "q": self.q, "m": self.m}


@dataclass(frozen=True)
class Domain:
    """Physical x-interval and its image under s = exp(-2 alpha x)."""

    x_min: float
    x_max: float
    singular_point: float | None
    s_min: float
    s_max: float

    def contains_x(self, x):
        return self.x_min < x < self.x_max

    def contains_s(self, s):
        return self.s_min < s < self.s_max


def domain_of(spec):
    if spec.q > 0:
        xs = math.log(spec.q) / (2 * spec.alpha)
        return Domain(xs, math.inf, xs, 0.0, 1.0 / spec.q)
    return Domain(-math.inf, math.inf, None, 0.0, math.inf)


def x_to_s(x, alpha):
    return np.exp(-2 * alpha * np.asarray(x, dtype=float))


def s_to_x(s, alpha):
    return -np.log(np.asarray(s, dtype=float)) / (2 * alpha)


def _check_inside(spec, x):
    if spec.q > 0:
        xs = math.log(spec.q) / (2 * spec.alpha)
        bad = np.asarray(x) <= xs
        if np.any(bad):
            raise DomainError(f"x must exceed the singular point {xs}", location=xs)


def evaluate_potential(spec, x):
    """V(x) from the exponential form; stable for large alpha*x."""
    _check_inside(spec, x)
    s = x_to_s(x, spec.alpha)
    return potential_in_s(spec, s)


def potential_in_s(spec, s):
    s = np.asarray(s, dtype=float)
    d = 1.0 - spec.q * s
    out = 4 * spec.V1 * s / d**2 + spec.V2 * (1 + spec.q * s) / d
    return out if out.ndim else float(out)


def evaluate_potential_hyperbolic(spec, x):
    """V(x) from V1 cosech_q^2(alpha x) + V2 coth_q(alpha x)."""
    _check_inside(spec, x)
    y = spec.alpha * np.asarray(x, dtype=float)
    out = spec.V1 * cosech_q(y, spec.q) ** 2 + spec.V2 * coth_q(y, spec.q)
    return out if np.ndim(out) else float(out)


def asymptotic_values(spec):
    """Limits of V at the open ends of the domain as ``(right, left)``.

    ``left`` is None for q > 0, where the left end is the singular wall.
    """
    right = spec.V2
    left = -spec.V2 if spec.q < 0 else None
    return right, left


def potential_minimum_s(spec):
    """Location (in s) of an interior minimum of V below its asymptotes, or None."""
    dom = domain_of(spec)
    if spec.q > 0:
        lo, hi = 1e-12 * dom.s_max, dom.s_max * (1 - 1e-9)
        res = minimize_scalar(lambda s: potential_in_s(spec, s), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-12 * dom.s_max})
        s = float(res.x)
        at_edge = min(s, dom.s_max - s) < 1e-6 * dom.s_max
    else:
        span = 40.0 / spec.alpha
        res = minimize_scalar(lambda x: potential_in_s(spec, math.exp(-2 * spec.alpha * x)),
                              bounds=(-span, span), method="bounded", options={"xatol": 1e-10})
        s = math.exp(-2 * spec.alpha * float(res.x))
        at_edge = abs(float(res.x)) > 0.99 * span
    ends = [e for e in asymptotic_values(spec) if e is not None]
    if at_edge or potential_in_s(spec, s) >= min(ends):
        return None
    return s
