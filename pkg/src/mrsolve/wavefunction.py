"""Bound-state eigenfunctions Psi_n(s) = N s^c (1 - q s)^gamma 2F1(-n, w; u; q s).

Here w = 2(c + gamma) + n and u = 1 + 2c.  Normalization is plain L^2 in x,
i.e. the integral of Psi(s)^2 / (2 alpha s) over the s-domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .algebra import Poly
from .errors import DomainError, NotNormalizable, ParameterError
from .potentials import x_to_s
from .spectrum import EnergyLevel

MIN_RESIDUAL_POINTS = 16

# 8th-order central stencils for the first and second derivative
_D1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
_D2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
_OFFSETS = np.arange(-4, 5)


# -- terminating Gauss series ------------------------------------------------------

def _check_cc(n, cc):
    for j in range(n):
        if cc + j == 0:
            raise ParameterError(f"cc = {cc} hits a pole of the series at j = {j}")


def hyper2f1_coefficients(n, b, cc):
    """Coefficients t_j of sum_j t_j z^j, from the term ratio (j-n)(b+j)/((cc+j)(j+1))."""
    if n < 0 or int(n) != n:
        raise ParameterError("n must be a non-negative integer")
    n = int(n)
    _check_cc(n, cc)
    exact = isinstance(b, (int, Fraction)) and isinstance(cc, (int, Fraction))
    t = Fraction(1) if exact else 1.0
    out = [t]
    for j in range(n):
        t = t * (j - n) * (b + j) / ((cc + j) * (j + 1))
        out.append(t)
    return out


def hyper2f1_terminating(n, b, cc, z):
    """2F1(-n, b; cc; z) as a finite sum; exact on rationals, compensated on floats."""
    coeffs = hyper2f1_coefficients(n, b, cc)
    if all(isinstance(v, (int, Fraction)) for v in (b, cc, z)):
        z = Fraction(z)
        return sum((a * z**j for j, a in enumerate(coeffs)), Fraction(0))
    z = float(z)
    return math.fsum(float(a) * z**j for j, a in enumerate(coeffs))


def hyper_polynomial(n, b, cc, q, var="s"):
    """2F1(-n, b; cc; q s) as an exact polynomial in s."""
    coeffs = hyper2f1_coefficients(n, Fraction(b), Fraction(cc))
    q = Fraction(q)
    return Poly([a * q**j for j, a in enumerate(coeffs)], var)


# -- parameter mapping -------------------------------------------------------------

@dataclass(frozen=True)
class Hyper2F1Terminating:
    n: int
    b: float
    cc: float

    @property
    def a(self):
        return -self.n

    def __call__(self, z):
        return hyper2f1_terminating(self.n, self.b, self.cc, z)


def series_parameters(c, gamma, n):
    """(v, w, u) = (-n, 2(c+gamma)+n, 1+2c)."""
    return -n, 2 * (c + gamma) + n, 1 + 2 * c


def mapping_defects(c, gamma, beta2, n):
    """(v + w - 2(c+gamma), v w - l); both vanish at the quantized c_n."""
    v, w, _ = series_parameters(c, gamma, n)
    ell = 2 * beta2 + 2 * c * gamma + gamma * gamma
    return v + w - 2 * (c + gamma), v * w - ell


# -- eigenfunctions ---------------------------------------------------------------

@dataclass(frozen=True)
class Eigenfunction:
    """Psi_n with its own exponents; ``level`` carries the equation parameters."""

    level: EnergyLevel
    c: float
    gamma: float
    q: float
    alpha: float
    norm: float = 1.0

    @property
    def n(self):
        return self.level.n

    @property
    def series(self):
        _, w, u = series_parameters(self.c, self.gamma, self.n)
        return Hyper2F1Terminating(self.n, w, u)

    def prefactor(self):
        """(-1)^n Gamma(n+2c+1)/Gamma(2c+1), absorbed into ``norm``; debug only."""
        return (-1) ** self.n * float(special.poch(2 * self.c + 1, self.n))

    def polynomial_coefficients(self):
        """Coefficients of the polynomial part in powers of s (ascending)."""
        _, w, u = series_parameters(self.c, self.gamma, self.n)
        t = hyper2f1_coefficients(self.n, w, u)
        return np.array([float(a) * self.q**j for j, a in enumerate(t)])


def eigenfunction(level, q, alpha):
    return Eigenfunction(level, float(level.c), float(level.gamma), float(q), float(alpha))


def _check_s(eig, s):
    s = np.asarray(s, dtype=float)
    upper = 1.0 / eig.q if eig.q > 0 else math.inf
    if np.any(s <= 0) or np.any(s >= upper):
        raise DomainError(f"s must lie in (0, {upper})", location=None)
    return s


def _envelope(eig, s):
    return s**eig.c * (1.0 - eig.q * s) ** eig.gamma


def _poly_part(eig, s):
    return np.polynomial.polynomial.polyval(s, eig.polynomial_coefficients())


def _psi_unit(eig, s):
    """Psi with norm 1; for s > 1 the polynomial is evaluated in 1/s to avoid overflow."""
    s = np.atleast_1d(s)
    out = np.empty_like(s)
    small = s <= 1
    out[small] = _envelope(eig, s[small]) * _poly_part(eig, s[small])
    big = s[~small]
    if big.size:
        rev = eig.polynomial_coefficients()[::-1]
        log_env = (eig.c + eig.n) * np.log(big) + eig.gamma * np.log1p(-eig.q * big)
        out[~small] = np.exp(log_env) * np.polynomial.polynomial.polyval(1.0 / big, rev)
    return out


def evaluate_psi(eig, s):
    s = _check_s(eig, s)
    out = eig.norm * _psi_unit(eig, s)
    return out if s.ndim else float(out[0])


def evaluate_psi_x(eig, x):
    return evaluate_psi(eig, x_to_s(x, eig.alpha))


# -- normalization ------------------------------------------------------------------

def _integrate(f, a, b, wvar, scale):
    val, err = integrate.quad(f, a, b, weight="alg", wvar=wvar, epsabs=0.0, epsrel=1e-13, limit=400)
    if not math.isfinite(val) or val <= 0:
        raise NotNormalizable("quadrature of |Psi|^2 did not give a positive finite value")
    if err > 1e-10 * val:
        raise NotNormalizable(f"quadrature error {err / val:.2e} above 1e-10 relative")
    return val * scale


def norm_integral(eig):
    """Integral of Psi^2 dx for the current ``norm``."""
    c, g, q, a = eig.c, eig.gamma, eig.q, eig.alpha
    coeffs = eig.polynomial_coefficients()
    pval = np.polynomial.polynomial.polyval
    if c <= 0:
        raise NotNormalizable(f"c = {c} <= 0")
    if q > 0:
        if g <= 0:
            raise NotNormalizable(f"gamma = {g} <= 0")
        # s^(2c-1) (1/q - s)^(2 gamma) q^(2 gamma) f(s)^2 / (2 alpha)
        total = _integrate(lambda s: pval(s, coeffs) ** 2, 0.0, 1.0 / q, (2 * c - 1, 2 * g),
                           q ** (2 * g) / (2 * a))
    else:
        tail = c + g + eig.n
        if tail >= 0:
            raise NotNormalizable("no decay as s -> infinity")
        inner = _integrate(lambda s: (1 - q * s) ** (2 * g) * pval(s, coeffs) ** 2, 0.0, 1.0,
                           (2 * c - 1, 0.0), 1 / (2 * a))
        # s = 1/t: t^(-1-2(c+gamma+n)) (t - q)^(2 gamma) (t^n f(1/t))^2
        rev = coeffs[::-1]
        outer = _integrate(lambda t: (t - q) ** (2 * g) * pval(t, rev) ** 2, 0.0, 1.0,
                           (-1 - 2 * tail, 0.0), 1 / (2 * a))
        total = inner + outer
    return eig.norm**2 * total


def normalize(eig):
    """Return a copy with ``norm`` chosen so that the x-space L^2 norm is 1."""
    base = replace(eig, norm=1.0)
    return replace(eig, norm=1.0 / math.sqrt(norm_integral(base)))


# -- diagnostics ----------------------------------------------------------------------

def ode_residual(eig, s_grid, *, relative_step=0.02):
    """Max |residual| of the s-form radial equation over ``s_grid``, relative to term scale.

    Derivatives come from 8th-order central differences with a step that is
    a fixed fraction of the distance to the nearest singular point.
    """
    s_grid = _check_s(eig, s_grid)
    if s_grid.size < MIN_RESIDUAL_POINTS:
        raise ParameterError(f"need at least {MIN_RESIDUAL_POINTS} grid points")
    lv, q = eig.level, eig.q
    eps2, g, b2 = lv.epsilon2, lv.gamma, lv.beta2
    worst = scale = 0.0
    for s in s_grid:
        dist = s if q < 0 else min(s, 1.0 / q - s)
        h = relative_step * dist
        vals = evaluate_psi(eig, s + h * _OFFSETS)
        psi = vals[4]
        d1 = float(_D1 @ vals) / h
        d2 = float(_D2 @ vals) / h**2
        pot = -eps2 / s**2 - g * (g - 1) * q / (s * (1 - q * s) ** 2) - b2 * (1 + q * s) / (s**2 * (1 - q * s))
        res = d2 + d1 / s + pot * psi
        worst = max(worst, abs(res))
        scale = max(scale, abs(d2), abs(d1 / s), abs(pot * psi))
    return worst / scale if scale > 0 else 0.0


def sample_s(eig, count):
    """``count`` interior s points; uniform for q > 0, uniform in s/(1+s) for q < 0."""
    u = (np.arange(count) + 0.5) / count
    if eig.q > 0:
        return u / eig.q
    return u / (1 - u)


def count_nodes(eig, samples=10_000):
    """Sign changes of Psi strictly inside the s-domain (the envelope is positive)."""
    vals = _psi_unit(eig, sample_s(eig, samples))
    signs = np.sign(vals[vals != 0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def boundary_decay(eig, tol=1e-6):
    """|Psi| at the ends of the default x-window relative to its sampled maximum."""
    lo_x, hi_x = default_x_range(eig)
    xs = np.linspace(lo_x, hi_x, 4001)
    vals = np.abs(evaluate_psi_x(eig, xs))
    peak = np.max(vals)
    left, right = vals[0] / peak, vals[-1] / peak
    return {"left": float(left), "right": float(right), "ok": bool(max(left, right) < tol)}


def sample_table(eig, samples, x_range=None):
    """Rows (x, s, psi, psi_normalized) on a uniform x grid, x increasing."""
    if samples < 2:
        raise ParameterError("need at least two samples")
    normed = eig if eig.norm != 1.0 else normalize(eig)
    raw = replace(eig, norm=1.0)
    if x_range is None:
        x_range = default_x_range(eig)
    xs = np.linspace(x_range[0], x_range[1], samples)
    ss = x_to_s(xs, eig.alpha)
    return xs, ss, evaluate_psi(raw, ss), evaluate_psi(normed, ss)


def default_x_range(eig, tail=1e-10):
    """x-window where |Psi| is above ``tail`` times its peak, from the envelope exponents."""
    a, q = eig.alpha, eig.q
    # envelope ~ s^c for large x; (2 alpha (x - x*))^gamma at the wall (q > 0),
    # s^(c+gamma+n) for x -> -inf (q < 0)
    width = -math.log(tail) / (2 * a)
    hi = width / eig.c + eig.n / a
    if q > 0:
        x_star = math.log(q) / (2 * a)
        return x_star + tail ** (1.0 / eig.gamma) / (2 * a), x_star + hi
    lo = -width / abs(eig.c + eig.gamma + eig.n) - eig.n / a
    return lo, hi

