from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from phinmod.coeff import (CoeffError, CoeffField, coeff_from_text, format_coeff, parse_coeff,
                           sqrt_in_e)

FIELDS = [(3, 1, 1), (5, 1, 2), (3, 4, 1), (5, 3, 2), (3, 3, 2), (3, 6, 1), (7, 8, 1), (3, 8, 2)]


def elements(F: CoeffField, lo=-4, hi=4):
    return st.builds(lambda num, den: F.make(num, den),
                     st.lists(st.integers(lo, hi), min_size=F.dim, max_size=F.dim),
                     st.integers(1, 5))


# --- independent oracles -----------------------------------------------------------


X = sympy.Symbol("X")


def to_sympy_poly(x):
    """Element of Q(zeta_m) (e = 1) as a sympy polynomial in X = zeta_m."""
    F = x.field
    assert F.e == 1
    return sum(sympy.Rational(c, x.den) * X**t for t, c in enumerate(x.num))


def sympy_reduce(expr, m):
    return sympy.rem(sympy.expand(expr), sympy.cyclotomic_poly(m, X), X)


def from_sympy(F, expr):
    poly = sympy.Poly(sympy_reduce(expr, F.m), X)
    coeffs = [Fraction(0)] * F.dim
    for (deg,), c in poly.terms():
        coeffs[deg] = Fraction(int(c.p), int(c.q))
    den = 1
    for c in coeffs:
        den = den * c.denominator // sympy.gcd(den, c.denominator)
    return F.make([int(c * den) for c in coeffs], int(den))


def conjugate(x, k):
    """The automorphism zeta -> zeta^k of Q(zeta_m)."""
    F = x.field
    out = F.zero()
    for t, c in enumerate(x.num):
        if c:
            out = out + F.zeta(k * t) * Fraction(c, x.den)
    return out


def norm_valuation(x):
    """v_p of the absolute norm, via a resultant with the cyclotomic polynomial."""
    F = x.field
    n = sympy.resultant(sympy.cyclotomic_poly(F.m, X), to_sympy_poly(x), X)
    n = sympy.Rational(n)
    return Fraction(sympy.multiplicity(F.p, n.p) - sympy.multiplicity(F.p, n.q))


# --- tests ---------------------------------------------------------------------------


@pytest.mark.parametrize("p,m,e", FIELDS)
def test_basic_identities(p, m, e):
    F = CoeffField(p, m, e)
    z = F.zeta()
    assert z**m == F.one()
    for k in range(1, m):
        assert z**k != F.one()
    w = F.uniformizer()
    assert w.valuation() == F.value_group
    assert w**e == F.make(list(F.pi_L) + [0] * (F.dim - F.phi))


def test_field_is_cached_singleton():
    assert CoeffField(5, 3, 2) is CoeffField(5, 3, 2)


def test_frozen_valuations():
    # values computed by the norm oracle below, then frozen
    assert CoeffField(3, 3, 1).make([1, -1]).valuation() == Fraction(1, 2)
    assert CoeffField(5, 3, 1).make([1, -1]).valuation() == 0
    assert CoeffField(5, 1, 2).uniformizer().valuation() == Fraction(1, 2)
    assert CoeffField(3, 1, 1).rational(Fraction(9, 2)).valuation() == 2
    assert CoeffField(7, 3, 1).make([2, 1]).valuation() == 0  # 2 + zeta_3 has norm 3


@pytest.mark.parametrize("m", [3, 4, 5, 8, 12])
def test_inverse_matches_sympy(m):
    F = CoeffField(7, m, 1)
    import random

    rng = random.Random(m)
    for _ in range(5):
        x = F.make([rng.randint(-3, 3) for _ in range(F.dim)], rng.randint(1, 3))
        if x.is_zero():
            continue
        expected = sympy.invert(to_sympy_poly(x), sympy.cyclotomic_poly(m, X), X)
        assert x.inverse() == from_sympy(F, expected)


@pytest.mark.parametrize("m", [4, 5, 12])
def test_multiplication_matches_sympy(m):
    F = CoeffField(3, m, 1)
    import random

    rng = random.Random(100 + m)
    for _ in range(10):
        x = F.make([rng.randint(-5, 5) for _ in range(F.dim)])
        y = F.make([rng.randint(-5, 5) for _ in range(F.dim)], 2)
        assert x * y == from_sympy(F, to_sympy_poly(x) * to_sympy_poly(y))


@pytest.mark.parametrize("p,m", [(3, 4), (5, 4), (7, 3), (11, 5), (3, 8), (5, 12)])
def test_valuation_conjugate_sum_equals_norm_valuation(p, m):
    # unramified case: summing v over all conjugates gives v_p(N(x))
    F = CoeffField(p, m, 1)
    import random

    rng = random.Random(p * 100 + m)
    units = [k for k in range(1, m) if sympy.gcd(k, m) == 1]
    for _ in range(6):
        x = F.make([rng.randint(-6, 6) for _ in range(F.dim)])
        if x.is_zero():
            continue
        total = sum(conjugate(x, k).valuation() for k in units)
        assert total == norm_valuation(x)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_ring_axioms_and_valuation(data):
    p, m, e = data.draw(st.sampled_from(FIELDS))
    F = CoeffField(p, m, e)
    x = data.draw(elements(F))
    y = data.draw(elements(F))
    z = data.draw(elements(F))
    assert (x + y) * z == x * z + y * z
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    if not x.is_zero() and not y.is_zero():
        assert (x * y).valuation() == x.valuation() + y.valuation()
        assert x * x.inverse() == F.one()
        assert (x / y) * y == x
    if not (x + y).is_zero() and not x.is_zero() and not y.is_zero():
        assert (x + y).valuation() >= min(x.valuation(), y.valuation())


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_text_round_trips(data):
    p, m, e = data.draw(st.sampled_from(FIELDS))
    F = CoeffField(p, m, e)
    x = data.draw(elements(F))
    assert coeff_from_text(x.to_text()) == x
    assert parse_coeff(F, format_coeff(x)) == x


def test_parse_grammar():
    F = CoeffField(3, 3, 2)
    assert parse_coeff(F, "zeta^3") == F.one()
    assert parse_coeff(F, "zeta^(-1)") * F.zeta() == F.one()
    assert parse_coeff(F, "pi^(-2)") * F.uniformizer() ** 2 == F.one()
    assert parse_coeff(F, "1/2 - 3/2*zeta") == F.rational(Fraction(1, 2)) - F.zeta() * Fraction(3, 2)
    assert parse_coeff(F, "w^2") == F.uniformizer() ** 2
    for bad in ["", "zeta^", "1+", "2*(", "foo"]:
        with pytest.raises(CoeffError):
            parse_coeff(F, bad)


def test_context_mismatch_is_an_error():
    with pytest.raises(CoeffError):
        CoeffField(3, 4, 1).one() + CoeffField(5, 4, 1).one()


# --- square roots: closed-form square classes of quadratic fields as the oracle --------


def _is_rational_square(r: Fraction) -> bool:
    if r < 0:
        return False
    a, b = r.numerator, r.denominator
    return sympy.integer_nthroot(a, 2)[1] and sympy.integer_nthroot(b, 2)[1]


@pytest.mark.parametrize("m,disc", [(4, -1), (3, -3)])
@settings(max_examples=40, deadline=None)
@given(num=st.integers(-60, 60).filter(bool), den=st.integers(1, 12))
def test_sqrt_of_rationals_in_quadratic_fields(m, disc, num, den):
    F = CoeffField(5, m, 1)
    r = Fraction(num, den)
    expected = _is_rational_square(r) or _is_rational_square(r * disc)
    res = sqrt_in_e(F.rational(r))
    assert res.status in ("root", "no_root")
    assert res.has_root == expected
    if res.has_root:
        assert res.root * res.root == F.rational(r)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_sqrt_of_squares(data):
    p, m, e = data.draw(st.sampled_from(FIELDS))
    F = CoeffField(p, m, e)
    x = data.draw(elements(F, -3, 3))
    res = sqrt_in_e(x * x)
    assert res.has_root
    assert res.root * res.root == x * x


def test_sqrt_frozen_examples():
    assert sqrt_in_e(CoeffField(5, 1, 2).rational(5)).root ** 2 == CoeffField(5, 1, 2).rational(5)
    assert sqrt_in_e(CoeffField(5, 1, 1).rational(-5)).status == "no_root"
    assert sqrt_in_e(CoeffField(3, 24, 2).zeta()).status == "no_root"
    F = CoeffField(3, 8, 1)
    assert sqrt_in_e(F.rational(2)).has_root  # sqrt 2 = zeta_8 + zeta_8^-1
    assert sqrt_in_e(F.rational(-1)).has_root
