from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mrsolve.algebra import (
    ApproxRoot,
    Poly,
    QuadraticSurd,
    RationalFunction,
    is_exact_root,
    poly_gcd,
    poly_roots_rational,
)
from mrsolve.errors import NoRootsError

S = Poly.variable("s")
ONE = RationalFunction(Poly([1]))


def rf(num, den=(1,)):
    return RationalFunction(Poly([F(c) for c in num]), Poly([F(c) for c in den]))


# -- examples ------------------------------------------------------------------------

def test_add_identity_and_partial_fractions():
    a = rf([1], [0, 1])
    assert a + RationalFunction(Poly([])) == a
    b = rf([1], [1, -1])
    assert a + b == RationalFunction(Poly([1]), Poly([0, 1, -1]))
    assert (a + (-a)).is_zero()


def test_mul_examples():
    a = RationalFunction(Poly([0, 1]), Poly([1, -1]))
    b = RationalFunction(Poly([1, -1]), Poly([0, 1]))
    assert a * b == ONE
    assert a * ONE == a
    inv_s = rf([1], [0, 1])
    assert inv_s * inv_s == RationalFunction(Poly([1]), Poly([0, 0, 1]))


def test_derivative_examples():
    assert RationalFunction(S**2).derivative() == RationalFunction(Poly([0, 2]))
    q = F(3, 7)
    d = RationalFunction(Poly([1]), Poly([1, -q])).derivative()
    assert d == RationalFunction(Poly([q]), Poly([1, -q]) ** 2)
    assert RationalFunction(Poly([5])).derivative().is_zero()


def test_canonical_zero_and_monic_denominator():
    z = RationalFunction(Poly([]), Poly([0, 3]))
    assert z.num.is_zero() and z.den == Poly([1])
    r = RationalFunction(Poly([2]), Poly([0, 4]))
    assert r.den.lc == 1 and r.num == Poly([F(1, 2)])


def test_zero_poly_degree_sentinel():
    assert Poly([]).degree < 0
    assert Poly([0, 0]).degree == Poly([]).degree


def test_roots_linear_and_quadratic():
    assert poly_roots_rational(Poly([-3, 2], "c")) == [F(3, 2)]
    assert poly_roots_rational(Poly([-1, 0, 1], "c")) == [F(-1), F(1)]
    surds = poly_roots_rational(Poly([-2, 0, 1], "c"))
    assert all(isinstance(r, QuadraticSurd) for r in surds)
    assert [float(r) for r in surds] == pytest.approx([-2**0.5, 2**0.5], rel=1e-15)
    assert all(is_exact_root(r) for r in surds)


def test_roots_high_degree_rational_and_flagged():
    p = Poly([-1, 1], "c") * Poly([F(1, 3), 1], "c") * Poly([-5, 2], "c") * Poly([-2, 0, 0, 1], "c")
    roots = poly_roots_rational(p)
    exact = sorted(r for r in roots if isinstance(r, F))
    assert exact == [F(-1, 3), F(1), F(5, 2)]
    approx = [r for r in roots if isinstance(r, ApproxRoot)]
    assert len(approx) == 1 and not is_exact_root(approx[0])
    assert float(approx[0]) == pytest.approx(2 ** (1 / 3), rel=1e-14)


def test_roots_drop_multiplicity():
    assert poly_roots_rational(Poly([-1, 1], "c") ** 3) == [F(1)]


def test_roots_of_constant_raise():
    with pytest.raises(NoRootsError):
        poly_roots_rational(Poly([4], "c"))
    with pytest.raises(NoRootsError):
        poly_roots_rational(Poly([], "c"))


def test_gcd_exposes_common_factor():
    a = Poly([-1, 1]) * Poly([2, 1])
    b = Poly([-1, 1]) * Poly([0, 0, 3])
    g = poly_gcd(a, b)
    assert g.degree == 1 and g(1) == 0


def test_nested_coefficients_in_c():
    c = Poly.variable("c")
    lam = RationalFunction(Poly([-(2 * c + 1), 2 * c + 3]), Poly([0, 1, -1]))
    assert lam.subs_inner(F(1, 2)) == RationalFunction(Poly([-2, 4]), Poly([0, 1, -1]))


# -- properties --------------------------------------------------------------------

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
polys = st.lists(rationals, min_size=0, max_size=4).map(Poly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())
rfuncs = st.builds(RationalFunction, polys, nonzero_polys)
nonzero_rfuncs = rfuncs.filter(lambda r: not r.is_zero())

FAST = settings(max_examples=60, deadline=None)


@FAST
@given(rfuncs, rfuncs, rfuncs)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a * ONE == a
    assert (a - a).is_zero()


@FAST
@given(rfuncs, rfuncs)
def test_derivative_linear_and_product_rule(a, b):
    assert (a + b).derivative() == a.derivative() + b.derivative()
    assert (a * b).derivative() == a * b.derivative() + b * a.derivative()


@FAST
@given(rfuncs)
def test_normalize_idempotent(a):
    assert a.normalize() == a
    assert a.normalize().normalize() == a.normalize()


@FAST
@given(nonzero_rfuncs)
def test_inverse(a):
    assert a * (ONE / a) == ONE
    assert a * a.reciprocal() == ONE


@FAST
@given(nonzero_polys, nonzero_polys)
def test_divmod_reconstructs(a, b):
    quo, rem = divmod(a, b)
    assert quo * b + rem == a
    assert rem.degree < b.degree


@FAST
@given(st.lists(rationals, min_size=1, max_size=3, unique=True))
def test_rational_roots_recovered(rs):
    p = Poly([1], "c")
    for r in rs:
        p = p * Poly([-r, 1], "c")
    assert poly_roots_rational(p) == sorted(rs)
