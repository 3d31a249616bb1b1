"""Asymptotic iteration method for y'' = lambda0(s) y' + s0(s) y.

Two modes share the same recurrence

    lambda_k = lambda_{k-1}' + s_{k-1} + lambda0 * lambda_{k-1}
    s_k      = s_{k-1}'      + s0 * lambda_{k-1}

*Symbolic*: lambda0 and s0 are exact rational functions of s whose
coefficients may be polynomials in an unknown ``c``.  The termination
determinant Delta_k = lambda_k s_{k-1} - lambda_{k-1} s_k then factors into
an s-free polynomial in ``c`` times a c-free rational function of s, and the
quantization values are the roots of the former.

*Numeric*: lambda0 and s0 are expanded in truncated Taylor series around an
anchor point and the recurrence runs on those series for a trial value of
the unknown; Delta_k at the anchor is then a scalar function of the unknown
whose sign changes are refined by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath

from .algebra import (
    Poly,
    RationalFunction,
    is_exact_root,
    poly_gcd,
    poly_roots_rational,
    primitive_part,
)
from .errors import (
    BracketError,
    ConvergenceError,
    NotExactlySolvable,
    ParameterError,
    UnsupportedPoleStructure,
)


@dataclass(frozen=True)
class AimProblem:
    lambda0: RationalFunction
    s0: RationalFunction
    unknown: str | None = "c"

    def __post_init__(self):
        if self.lambda0.is_zero():
            raise ParameterError("lambda0 must not vanish identically")


@dataclass(frozen=True)
class AimState:
    k: int
    lambda_k: RationalFunction
    s_k: RationalFunction

    def asymptotic_ratio(self):
        """s_k / lambda_k, the function the iteration converges to."""
        return self.s_k / self.lambda_k


def initial_state(problem):
    return AimState(0, problem.lambda0, problem.s0)


def iterate(problem, state):
    lam, s = state.lambda_k, state.s_k
    return AimState(
        state.k + 1,
        lam.derivative() + s + problem.lambda0 * lam,
        s.derivative() + problem.s0 * lam,
    )


@lru_cache(maxsize=128)
def _chain(problem, k):
    if k == 0:
        return (initial_state(problem),)
    prev = _chain(problem, k - 1)
    return prev + (iterate(problem, prev[-1]),)


def states(problem, k):
    """States 0..k of the recurrence (memoized per problem)."""
    if k < 0:
        raise ParameterError("iteration index must be non-negative")
    return _chain(problem, k)


@dataclass(frozen=True)
class TerminationResult:
    """Delta_k split as ``delta_k(c) * s_factor(s)``.

    The integration constants of the general solution are fixed by the
    convention C1 = 0 (only the convergent branch is kept), so the
    eigenfunction generator needs nothing beyond the states themselves.
    """

    k: int
    delta: RationalFunction
    delta_k: Poly
    s_factor: RationalFunction
    roots: tuple


def termination_determinant(problem, k):
    if k < 1:
        raise ParameterError("termination determinant needs k >= 1")
    chain = states(problem, k)
    prev, cur = chain[k - 1], chain[k]
    delta = cur.lambda_k * prev.s_k - prev.lambda_k * cur.s_k
    var = problem.unknown or "c"
    if delta.is_zero():
        raise NotExactlySolvable(f"Delta_{k} vanishes identically")
    pp = primitive_part(delta.num)
    if not pp.over_field():
        raise NotExactlySolvable(f"Delta_{k} root condition depends on s")
    # pp is monic, so the leading s-coefficient of the numerator is the c-factor
    lead = delta.num.lc
    delta_k = lead if isinstance(lead, Poly) else Poly((lead,), var)
    s_factor = RationalFunction(pp, delta.den)
    roots = tuple(poly_roots_rational(delta_k)) if delta_k.degree >= 1 else ()
    return TerminationResult(k, delta, delta_k, s_factor, roots)


# -- wavefunction generator ------------------------------------------------------

def _as_rational_root(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise UnsupportedPoleStructure(f"root {value!r} is not rational")


def log_derivative_antiderivative(ratio):
    """Return P with P'/P == ratio, for ratio a rational function over Q.

    Residues are recovered without factoring the denominator: for every
    positive integer m, gcd(D, N - m D') collects the poles with residue m.
    """
    if ratio.is_zero():
        return Poly((1,), ratio.var)
    num, den = ratio.num, ratio.den
    if not (num.over_field() and den.over_field()):
        raise UnsupportedPoleStructure("ratio still depends on the unknown")
    if num.degree >= den.degree:
        raise UnsupportedPoleStructure("ratio has a polynomial part")
    dprime = den.derivative()
    if poly_gcd(den, dprime).degree > 0:
        raise UnsupportedPoleStructure("ratio has higher-order poles")
    total = num.coeffs[den.degree - 1] if den.degree - 1 < len(num.coeffs) else Fraction(0)
    if total.denominator != 1 or total < 1:
        raise UnsupportedPoleStructure(f"residue sum {total} is not a positive integer")
    result = Poly((1,), ratio.var)
    covered = 0
    for m in range(1, int(total) + 1):
        g = poly_gcd(den, num - dprime.scale(m))
        if g.degree > 0:
            result = result * g ** m
            covered += g.degree
    if covered != den.degree:
        raise UnsupportedPoleStructure("some residues are not positive integers")
    return result


def _normalize_generated(p):
    c0 = p.coeffs[0] if p.coeffs else Fraction(0)
    if c0 != 0:
        return p.scale(1 / c0)
    return p.scale(1 / p.lc)


def generate_wavefunction(problem, n, root):
    """Polynomial f_n = exp(-int s_n/lambda_n) at a quantization root.

    The result is normalized to f_n(0) = 1 (or to a monic polynomial when it
    vanishes at the origin).
    """
    if n < 0:
        raise ParameterError("level index must be non-negative")
    value = _as_rational_root(root)
    st = states(problem, n)[n]
    lam = st.lambda_k.subs_inner(value)
    s = st.s_k.subs_inner(value)
    if lam.is_zero():
        raise UnsupportedPoleStructure(f"lambda_{n} vanishes at the root")
    return _normalize_generated(log_derivative_antiderivative(-(s / lam)))


def _generated_degree(problem, n, value):
    """Degree of the generated polynomial from the behaviour at infinity."""
    st = states(problem, n)[n]
    lam = st.lambda_k.subs_inner(value)
    s = st.s_k.subs_inner(value)
    if s.is_zero():
        return 0
    if lam.is_zero():
        return None
    ratio = s / lam
    dn, dd = ratio.num.degree, ratio.den.degree
    if dn + 1 > dd:
        return None
    if dn + 1 < dd:
        return 0
    lim = -ratio.num.lc / ratio.den.lc
    if lim.denominator != 1 or lim < 0:
        return None
    return int(lim)


@dataclass(frozen=True)
class SymbolicLevel:
    n: int
    value: Fraction
    k: int
    polynomial: Poly


def solve_symbolic(problem, n_max):
    """Quantization values for levels 0..n_max.

    Delta_{n+1} carries the roots of several levels at once; level n is the
    root at which the generator s_n/lambda_n produces a polynomial of degree
    exactly n.  Each assignment is confirmed against Delta_n as well, so a
    root that does not persist is rejected.
    """
    if n_max < 0:
        raise ParameterError("n_max must be non-negative")
    out = []
    for n in range(n_max + 1):
        k = n + 1
        term = termination_determinant(problem, k)
        chosen = None
        for r in term.roots:
            if not is_exact_root(r) or not isinstance(r, Fraction):
                continue
            if _generated_degree(problem, n, r) != n:
                continue
            try:
                poly = generate_wavefunction(problem, n, r)
            except UnsupportedPoleStructure:
                continue
            if poly.degree == n:
                chosen = (r, poly)
                break
        if chosen is None:
            raise NotExactlySolvable(f"no root of Delta_{k} generates a degree-{n} solution")
        if n >= 1 and termination_determinant(problem, n).delta_k(chosen[0]) != 0:
            raise NotExactlySolvable(f"level {n} root does not persist from Delta_{n}")
        out.append(SymbolicLevel(n, chosen[0], k, chosen[1]))
    return out


# -- numeric mode ------------------------------------------------------------------

def taylor_shift(coeffs, a):
    """Coefficients of p(a + t) in powers of t (repeated synthetic division)."""
    out = list(coeffs)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + a * out[j + 1]
    return out


def series_divide(num, den, order):
    if den[0] == 0:
        raise ZeroDivisionError("series denominator vanishes at the anchor")
    num = list(num) + [0] * (order + 1)
    den = list(den) + [0] * (order + 1)
    out = []
    for j in range(order + 1):
        acc = num[j]
        for i in range(1, j + 1):
            acc = acc - den[i] * out[j - i]
        out.append(acc / den[0])
    return out


def _sderiv(a):
    return [a[j + 1] * (j + 1) for j in range(len(a) - 1)]


def _smul(a, b, length):
    out = []
    for j in range(length):
        acc = 0
        for i in range(j + 1):
            acc = acc + a[i] * b[j - i]
        out.append(acc)
    return out


@dataclass(frozen=True)
class NumericAimProblem:
    """lambda0 and s0 known through their Taylor coefficients at ``anchor``.

    ``taylor(value, order)`` returns the coefficient lists (length
    ``order + 1``) of lambda0 and s0 for the trial value of the unknown.
    """

    taylor: Callable[[object, int], tuple[Sequence, Sequence]]
    anchor: float
    dps: int | None = None


def numeric_problem(problem, anchor, dps=None):
    """Numeric view of a symbolic problem at the anchor point ``anchor``."""

    def conv(x):
        return mpmath.mpf(x.numerator) / x.denominator if dps else float(x)

    def coeffs(p, value):
        out = []
        for c in p.coeffs:
            c = c(value) if isinstance(c, Poly) else c
            out.append(conv(c) if isinstance(c, Fraction) else c)
        return out

    def taylor(value, order):
        a = mpmath.mpf(anchor) if dps else float(anchor)
        series = []
        for rf in (problem.lambda0, problem.s0):
            num = taylor_shift(coeffs(rf.num, value), a)
            den = taylor_shift(coeffs(rf.den, value), a)
            series.append(series_divide(num, den, order))
        return series[0], series[1]

    return NumericAimProblem(taylor, float(anchor), dps)


def delta_sequence(nproblem, value, k_max):
    """Delta_1..Delta_{k_max} at the anchor for one trial value."""
    length = k_max + 2
    lam0, s0 = nproblem.taylor(value, length - 1)
    lam, s = list(lam0), list(s0)
    lam_prev = s_prev = None
    out = []
    for k in range(1, k_max + 1):
        n = len(lam) - 1
        new_lam = [a + b + c for a, b, c in zip(_sderiv(lam), s[:n], _smul(lam0, lam, n))]
        new_s = [a + b for a, b in zip(_sderiv(s), _smul(s0, lam, n))]
        lam_prev, s_prev, lam, s = lam, s, new_lam, new_s
        out.append(lam[0] * s_prev[0] - lam_prev[0] * s[0])
    return out


def delta_at_anchor(nproblem, value, k):
    return _evaluate(nproblem, value, k)


def _evaluate(nproblem, value, k):
    if nproblem.dps:
        with mpmath.workdps(nproblem.dps):
            return float(delta_sequence(nproblem, mpmath.mpf(value), k)[-1])
    return delta_sequence(nproblem, float(value), k)[-1]


def scan_brackets(nproblem, k, lo, hi, points=400):
    """Sub-intervals of [lo, hi] on which Delta_k changes sign."""
    xs = [lo + (hi - lo) * i / (points - 1) for i in range(points)]
    vals = [_evaluate(nproblem, x, k) for x in xs]
    out = []
    for i in range(points - 1):
        if vals[i] == 0:
            out.append((xs[i], xs[i]))
        elif vals[i] * vals[i + 1] < 0:
            out.append((xs[i], xs[i + 1]))
    return out


@dataclass(frozen=True)
class NumericRoot:
    value: float
    k: int
    drifts: tuple = field(default=())

    @property
    def drift(self):
        return self.drifts[-1] if self.drifts else math.inf


def _bisect(f, a, b, tol):
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0 or abs(b - a) <= tol * max(1.0, abs(mid)):
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def solve_numeric(nproblem, bracket, n, k_max, tol=1e-12, drift_tol=1e-10):
    """Root of Delta_k(anchor; unknown) = 0 tracked for k = n+1 .. k_max.

    Stops early once successive-k roots agree within ``drift_tol``.
    """
    if k_max <= n:
        raise ParameterError(f"k_max ({k_max}) must exceed n ({n})")
    a, b = map(float, bracket)
    roots = []
    drifts = []
    for k in range(n + 1, k_max + 1):
        root = _bisect(lambda x: _evaluate(nproblem, x, k), a, b, tol)
        if roots:
            drifts.append(abs(root - roots[-1]))
            if drifts[-1] < drift_tol:
                return NumericRoot(root, k, tuple(drifts))
        roots.append(root)
    if drifts and len(drifts) >= 2 and drifts[-1] >= drifts[-2]:
        raise ConvergenceError("root drift is not decreasing in k", trace=roots)
    if not drifts:
        return NumericRoot(roots[-1], k_max, ())
    if drifts[-1] >= drift_tol:
        raise ConvergenceError(f"root drift {drifts[-1]:.3e} above tolerance", trace=roots)
    return NumericRoot(roots[-1], k_max, tuple(drifts))
