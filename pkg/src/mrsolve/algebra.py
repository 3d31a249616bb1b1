"""Exact polynomial and rational-function arithmetic.

Coefficients live in one of two rings:

* Q, represented by :class:`fractions.Fraction`;
* Q[c], univariate polynomials over Q in a symbolic unknown (``Poly`` with
  an *inner* variable name, ``"c"`` by default).

A polynomial in the ODE variable ``s`` may therefore carry coefficients that
are themselves polynomials in ``c``.  Constant inner polynomials are always
collapsed to plain ``Fraction`` values so that every value has exactly one
representation and ``==`` is structural.

All objects are immutable and every operation returns a canonical result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath
from mpmath.libmp.libhyper import NoConvergence

from .errors import NoRootsError

#: Variable names treated as the inner (coefficient) level of nesting.
INNER_VARIABLES = frozenset({"c"})

#: Degree reported for the zero polynomial.
ZERO_DEGREE = -1


def _rank(var):
    return 0 if var in INNER_VARIABLES else 1


def _coerce(x):
    if isinstance(x, Poly):
        if len(x.coeffs) <= 1:
            return x.coeffs[0] if x.coeffs else Fraction(0)
        return x
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"unsupported coefficient type {type(x).__name__}")


def _is_zero(x):
    if isinstance(x, Poly):
        return not x.coeffs
    return x == 0


def recursive_lc(x):
    """Rational leading coefficient, descending through nested polynomials."""
    while isinstance(x, Poly):
        if not x.coeffs:
            return Fraction(0)
        x = x.coeffs[-1]
    return Fraction(x)


class Poly:
    """Dense univariate polynomial, ``coeffs[i]`` multiplies ``var**i``."""

    __slots__ = ("coeffs", "var", "_hash")

    def __init__(self, coeffs=(), var="s"):
        if isinstance(coeffs, (int, Fraction, Poly, float)):
            coeffs = (coeffs,)
        cs = [_coerce(c) for c in coeffs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)
        self.var = var
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def monomial(cls, coeff=1, degree=1, var="s"):
        return cls([0] * degree + [coeff], var)

    @classmethod
    def variable(cls, var="s"):
        return cls([0, 1], var)

    # -- basic queries ----------------------------------------------------
    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self):
        return not self.coeffs

    def over_field(self):
        """True when every coefficient is a plain rational."""
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def inner_degree(self):
        return max((c.degree for c in self.coeffs if isinstance(c, Poly)), default=0)

    # -- coercion helpers -------------------------------------------------
    def _lift(self, other):
        """Return ``other`` as a Poly in ``self.var`` or None to defer."""
        if isinstance(other, Poly):
            if other.var == self.var:
                return other
            if _rank(other.var) > _rank(self.var):
                return None
            if _rank(other.var) == _rank(self.var):
                raise TypeError(f"cannot mix variables {self.var!r} and {other.var!r}")
            return Poly((other,), self.var)
        if isinstance(other, (int, Fraction, float, Rational)):
            return Poly((other,), self.var)
        return None

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return Poly((), self.var)
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Poly((1,), self.var)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, k):
        """Multiply every coefficient by the ring element ``k``."""
        return Poly([c * k for c in self.coeffs], self.var)

    def shift(self, k):
        """Multiply by ``var**k``."""
        if not self.coeffs:
            return self
        return Poly([Fraction(0)] * k + list(self.coeffs), self.var)

    def __divmod__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lead = o.lc
        if isinstance(lead, Poly):
            raise ArithmeticError("divmod needs an invertible leading coefficient; use exact_div")
        inv = 1 / lead
        q = [Fraction(0)] * max(len(self.coeffs) - len(o.coeffs) + 1, 1)
        r = list(self.coeffs)
        d = o.degree
        for i in range(len(r) - 1, d - 1, -1):
            t = r[i] * inv
            if _is_zero(t):
                continue
            q[i - d] = t
            for j, b in enumerate(o.coeffs):
                r[i - d + j] = r[i - d + j] - t * b
        return Poly(q, self.var), Poly(r[:d] if d > 0 else (), self.var)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, Poly) and other.var == self.var:
            return exact_div(self, other)
        return _poly_by_coeff(self, _coerce(other))

    # -- calculus and evaluation -------------------------------------------
    def derivative(self):
        return Poly([c * i for i, c in enumerate(self.coeffs)][1:], self.var)

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def subs_inner(self, value):
        """Substitute ``value`` for the inner unknown in every coefficient."""
        return Poly([c(value) if isinstance(c, Poly) else c for c in self.coeffs], self.var)

    def inner_slices(self):
        """Split ``sum_j c**j P_j(var)`` into the list ``[P_0, P_1, ...]``."""
        d = self.inner_degree()
        out = []
        for j in range(d + 1):
            row = []
            for c in self.coeffs:
                if isinstance(c, Poly):
                    row.append(c.coeffs[j] if j < len(c.coeffs) else 0)
                else:
                    row.append(c if j == 0 else 0)
            out.append(Poly(row, self.var))
        return out

    def to_floats(self, inner_value=None):
        cs = self.coeffs
        if inner_value is not None:
            cs = [c(inner_value) if isinstance(c, Poly) else c for c in cs]
        return [float(c) for c in cs]

    # -- comparison and display --------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            if other.var != self.var:
                return False
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction, float)):
            if len(self.coeffs) > 1:
                return False
            return (self.coeffs[0] if self.coeffs else 0) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.var, self.coeffs))
        return self._hash

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r}, var={self.var!r})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if _is_zero(c):
                continue
            cs = f"({c})" if isinstance(c, Poly) or (isinstance(c, Fraction) and c.denominator != 1) else str(c)
            if i == 0:
                terms.append(cs)
            else:
                mono = self.var if i == 1 else f"{self.var}^{i}"
                terms.append(mono if c == 1 else f"{cs}*{mono}")
        return " + ".join(terms)


def _poly_by_coeff(p, k):
    return Poly([_cdiv(c, k) for c in p.coeffs], p.var)


# -- coefficient-ring helpers ---------------------------------------------

def _as_inner(x, var):
    return x if isinstance(x, Poly) else Poly((x,), var)


def _cdiv(a, b):
    """Exact division in the coefficient ring."""
    if _is_zero(b):
        raise ZeroDivisionError("division by zero coefficient")
    if not isinstance(b, Poly):
        return a / b if not isinstance(a, Poly) else a.scale(Fraction(1) / b)
    q, r = divmod(_as_inner(a, b.var), b)
    if not r.is_zero():
        raise ArithmeticError(f"{a} is not divisible by {b}")
    return _coerce(q)


def _cgcd(a, b):
    """Normalized gcd in the coefficient ring (units are nonzero rationals)."""
    if _is_zero(a) and _is_zero(b):
        return Fraction(0)
    if not isinstance(a, Poly) and not isinstance(b, Poly):
        return Fraction(1)
    var = a.var if isinstance(a, Poly) else b.var
    return _coerce(poly_gcd(_as_inner(a, var), _as_inner(b, var)))


def normalize_unit(p):
    """Scale ``p`` so its recursive leading coefficient is 1."""
    if p.is_zero():
        return p
    lead = recursive_lc(p)
    return p if lead == 1 else p.scale(1 / lead)


def content(p):
    """gcd of the coefficients of ``p`` (1 over a field)."""
    g = Fraction(0)
    for c in p.coeffs:
        g = _cgcd(g, c)
        if g == 1:
            break
    return g


def primitive_part(p):
    if p.is_zero():
        return p
    g = content(p)
    return normalize_unit(p if g == 1 else _poly_by_coeff(p, g))


def prem(a, b):
    """Pseudo-remainder ``lc(b)**(deg a - deg b + 1) * a mod b``."""
    if b.is_zero():
        raise ZeroDivisionError("pseudo-remainder by zero")
    r = a
    lcb = b.lc
    e = a.degree - b.degree + 1
    while not r.is_zero() and r.degree >= b.degree:
        r = r.scale(lcb) - b.shift(r.degree - b.degree).scale(r.lc)
        e -= 1
    if e > 0:
        r = r.scale(lcb ** e)
    return r


def exact_div(a, b):
    """Quotient ``a / b`` when ``b`` divides ``a`` exactly."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return Poly((), a.var)
    r = list(a.coeffs)
    d = b.degree
    q = [Fraction(0)] * (len(r) - d) if len(r) > d else []
    for i in range(len(r) - 1, d - 1, -1):
        if _is_zero(r[i]):
            continue
        t = _cdiv(r[i], b.lc)
        q[i - d] = t
        for j, bc in enumerate(b.coeffs):
            r[i - d + j] = r[i - d + j] - t * bc
    if any(not _is_zero(x) for x in r[:d]):
        raise ArithmeticError("polynomial division is not exact")
    return Poly(q, a.var)


def poly_gcd(a, b):
    """Normalized gcd over Q or over Q[c] (primitive remainder sequence)."""
    if a.is_zero():
        return normalize_unit(b)
    if b.is_zero():
        return normalize_unit(a)
    fa, fb = a.over_field(), b.over_field()
    if fa and fb:
        while not b.is_zero():
            a, b = b, a % b
        return normalize_unit(a)
    if fa or fb:
        # a c-free operand forces a c-free gcd: reduce against every c-slice
        g, other = (a, b) if fa else (b, a)
        for piece in other.inner_slices():
            g = poly_gcd(g, piece)
            if g.degree == 0:
                break
        return normalize_unit(g)
    ca, cb = content(a), content(b)
    pa, pb = primitive_part(a), primitive_part(b)
    if pa.degree < pb.degree:
        pa, pb = pb, pa
    while not pb.is_zero():
        r = prem(pa, pb)
        pa, pb = pb, primitive_part(r) if not r.is_zero() else r
    return normalize_unit(primitive_part(pa).scale(_cgcd(ca, cb)))


# -- rational functions -----------------------------------------------------

class RationalFunction:
    """Quotient of two polynomials in the same variable, always reduced.

    The denominator is scaled so its recursive leading coefficient is 1; zero
    is stored as ``0/1``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, var="s", *, _canonical=False):
        if not isinstance(num, Poly):
            num = Poly((num,), var)
        if den is None:
            den = Poly((1,), num.var)
        elif not isinstance(den, Poly):
            den = Poly((den,), num.var)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _canonical:
            num, den = _canonicalize(num, den)
        self.num = num
        self.den = den

    @property
    def var(self):
        return self.num.var

    @classmethod
    def variable(cls, var="s"):
        return cls(Poly.variable(var))

    def is_zero(self):
        return self.num.is_zero()

    def _lift(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Poly) and other.var == self.var:
            return RationalFunction(other)
        if isinstance(other, (int, Fraction, float, Poly)):
            return RationalFunction(Poly((other,), self.var))
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def reciprocal(self):
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError("integer exponent required")
        if k < 0:
            return self.reciprocal() ** (-k)
        return RationalFunction(self.num ** k, self.den ** k)

    def derivative(self):
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def __call__(self, x):
        den = self.den(x)
        if den == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return self.num(x) / den

    def subs_inner(self, value):
        return RationalFunction(self.num.subs_inner(value), self.den.subs_inner(value))

    def normalize(self):
        return RationalFunction(self.num, self.den)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"


def _canonicalize(num, den):
    if num.is_zero():
        return Poly((), num.var), Poly((1,), num.var)
    g = poly_gcd(num, den)
    if g.degree > 0:
        num = exact_div(num, g)
        den = exact_div(den, g)
    lead = recursive_lc(den)
    if lead != 1:
        inv = 1 / lead
        num, den = num.scale(inv), den.scale(inv)
    return num, den


# -- roots ----------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticSurd:
    """The real number ``rational + coefficient * sqrt(radicand)``."""

    rational: Fraction
    coefficient: Fraction
    radicand: Fraction
    exact = True

    def __float__(self):
        return float(self.rational) + float(self.coefficient) * math.sqrt(self.radicand)

    def __str__(self):
        return f"{self.rational} + {self.coefficient}*sqrt({self.radicand})"


@dataclass(frozen=True)
class ApproxRoot:
    """Numerically located real root without an exact representation."""

    value: float
    exact = False

    def __float__(self):
        return self.value


def is_exact_root(root):
    return isinstance(root, (Fraction, QuadraticSurd))


def _rational_sqrt(x):
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _numeric_real_roots(p):
    """High-precision approximations of the real roots of a squarefree ``p``."""
    ints = _integer_coeffs(p)
    digits = max(len(str(abs(c))) for c in ints)
    dps = 2 * digits + 30
    with mpmath.workdps(dps):
        coeffs = [mpmath.mpf(c) for c in reversed(ints)]
        try:
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=4 * dps)
        except NoConvergence:
            roots = mpmath.polyroots(coeffs, maxsteps=2000, extraprec=8 * dps, error=False)
        tol = mpmath.mpf(10) ** (-dps // 2)
        return [mpmath.re(r) for r in roots if abs(mpmath.im(r)) <= tol * max(1, abs(r))], dps


def _integer_coeffs(p):
    lcm = 1
    for c in p.coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in p.coeffs]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    return [c // g for c in ints]


def poly_roots_rational(p):
    """Real roots of a polynomial over Q.

    Rational roots are returned as ``Fraction``.  Whatever survives deflation
    is solved in closed form when it is quadratic (``QuadraticSurd``) and
    numerically otherwise (``ApproxRoot``).  Multiplicities are dropped and
    the result is sorted by value.
    """
    if not isinstance(p, Poly):
        p = Poly((p,), "c")
    if any(isinstance(c, Poly) for c in p.coeffs):
        raise TypeError("root extraction needs rational coefficients")
    if p.is_zero():
        raise NoRootsError("the zero polynomial vanishes identically")
    if p.degree == 0:
        raise NoRootsError(f"constant polynomial {p} has no roots")
    sqf = exact_div(p, poly_gcd(p, p.derivative()))
    roots = []
    rest = sqf
    if rest.degree > 2:
        approx, dps = _numeric_real_roots(rest)
        lead = abs(_integer_coeffs(rest)[-1])
        for r in approx:
            with mpmath.workdps(dps):
                cand = Fraction(mpmath.nstr(r, dps)).limit_denominator(lead)
            if rest(cand) == 0:
                roots.append(cand)
                rest = exact_div(rest, Poly([-cand, 1], rest.var))
    if rest.degree == 1:
        roots.append(-rest.coeffs[0] / rest.coeffs[1])
    elif rest.degree == 2:
        c0, c1, c2 = rest.coeffs
        disc = c1 * c1 - 4 * c2 * c0
        if disc >= 0:
            root = _rational_sqrt(disc)
            if root is not None:
                roots.extend({(-c1 + root) / (2 * c2), (-c1 - root) / (2 * c2)})
            else:
                mid = -c1 / (2 * c2)
                k = Fraction(1) / (2 * c2)
                roots.append(QuadraticSurd(mid, k, disc))
                roots.append(QuadraticSurd(mid, -k, disc))
    elif rest.degree > 2:
        approx, _ = _numeric_real_roots(rest)
        roots.extend(ApproxRoot(float(r)) for r in approx)
    return sorted(roots, key=float)
