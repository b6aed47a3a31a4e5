"""Series kernel: arithmetic, composition, implicit solves, domain bridging."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uiptperco.series import (
    QQ,
    CoefficientRangeError,
    NonLagrangeanError,
    SeriesUsageError,
    TruncatedSeries,
    bigfloat,
    series_compose,
    series_mul,
    solve_implicit,
    solve_implicit_recursion,
    solve_lagrange,
)


def ts(coeffs, var="x", domain=QQ):
    return TruncatedSeries([domain.convert(c) for c in coeffs], var, domain)


def u_equation(order, domain=QQ):
    """x = W(1-W)(1-2W)/2 as F(W) = hat_w(W) - x."""
    x = TruncatedSeries.identity(order, "x", domain)

    def f(w):
        return w * (1 - w) * (1 - 2 * w) / 2 - x

    def dfdw(w):
        return (1 - 6 * w + 6 * w * w) / 2

    return f, dfdw


class TestMul:
    def test_difference_of_squares(self):
        a = ts([1, 1, 0])
        b = ts([1, -1, 0])
        assert series_mul(a, b) == ts([1, 0, -1])

    def test_u_squared_hand_convolution(self):
        # U = 2x + 12x^2 + 128x^3: the square's low coefficients by hand.
        u = ts([0, 2, 12, 128])
        u2 = series_mul(u, u)
        assert u2 == ts([0, 0, 4, 48])

    def test_annihilation(self):
        s = ts([3, 1, 4])
        zero = ts([0, 0, 0])
        assert series_mul(s, zero) == zero

    def test_order_mismatch_rejected(self):
        with pytest.raises(SeriesUsageError):
            series_mul(ts([1, 2]), ts([1, 2, 3]))

    def test_var_mismatch_rejected(self):
        with pytest.raises(SeriesUsageError):
            series_mul(ts([1, 2]), ts([1, 2], var="y"))

    def test_domain_mismatch_rejected(self):
        a = ts([1, 2])
        b = TruncatedSeries([mp.mpf(1), mp.mpf(2)], "x", bigfloat(128))
        with pytest.raises(SeriesUsageError):
            series_mul(a, b)


class TestCompose:
    def test_identity_outer(self):
        inner = ts([0, 5, -3, 7])
        outer = TruncatedSeries.identity(3, "x", QQ)
        assert series_compose(outer, inner) == inner

    def test_geometric_of_square(self):
        # 1/(1-x) composed with x^2 at N=4 -> 1 + x^2 + x^4.
        outer = ts([1, 1, 1, 1, 1])
        inner = ts([0, 0, 1, 0, 0])
        assert series_compose(outer, inner) == ts([1, 0, 1, 0, 1])

    def test_nonzero_constant_rejected(self):
        with pytest.raises(SeriesUsageError):
            series_compose(ts([1, 1]), ts([1, 1]))


class TestSolvers:
    def test_trivial_lagrange(self):
        w = solve_lagrange(lambda s: 1 + 0 * s, order=6, var="z", domain=QQ)
        assert w == ts([0, 1, 0, 0, 0, 0, 0], var="z")

    def test_u_series_low_coefficients(self):
        f, dfdw = u_equation(9)
        u = solve_implicit(f, dfdw, Fraction(0), 9, "x", QQ)
        assert [u.coeff(k) for k in range(4)] == [0, 2, 12, 128]

    def test_u_series_resubstitution_exact(self):
        order = 24
        f, dfdw = u_equation(order)
        u = solve_implicit(f, dfdw, Fraction(0), order, "x", QQ)
        residual = f(u)
        assert all(c == 0 for c in residual.coeffs)

    def test_newton_matches_recursion_bit_identical(self):
        order = 17
        f, dfdw = u_equation(order)
        a = solve_implicit(f, dfdw, Fraction(0), order, "x", QQ)
        b = solve_implicit_recursion(f, dfdw, Fraction(0), order, "x", QQ)
        assert a.coeffs == b.coeffs

    def test_degenerate_equation_rejected(self):
        # F(W) = W^2 - x has dF/dW = 0 at the base point.
        x = TruncatedSeries.identity(4, "x", QQ)
        with pytest.raises(NonLagrangeanError):
            solve_implicit(lambda w: w * w - x, lambda w: 2 * w,
                           Fraction(0), 4, "x", QQ)


class TestCoefficientAccess:
    def test_in_range(self):
        s = ts([0, 2, 12])
        assert s.coeff(1) == 2
        assert s.coeff(0) == 0

    def test_out_of_range_raises(self):
        s = ts([0, 2, 12])
        with pytest.raises(CoefficientRangeError):
            s.coeff(3)


small_rationals = st.fractions(
    min_value=-4, max_value=4, max_denominator=12)


@given(st.lists(small_rationals, min_size=4, max_size=4),
       st.lists(small_rationals, min_size=4, max_size=4),
       st.lists(small_rationals, min_size=4, max_size=4))
@settings(max_examples=60, deadline=None)
def test_ring_laws_random(a, b, c):
    sa, sb, sc = ts(a), ts(b), ts(c)
    assert (sa * sb) * sc == sa * (sb * sc)
    assert sa * (sb + sc) == sa * sb + sa * sc
    assert sa * sb == sb * sa


@given(st.lists(small_rationals, min_size=5, max_size=5))
@settings(max_examples=40, deadline=None)
def test_bigfloat_matches_exact(coeffs):
    bits = 128
    dom = bigfloat(bits)
    exact = ts(coeffs)
    approx = TruncatedSeries([dom.convert(c) for c in coeffs], "x", dom)
    prod_exact = exact * exact
    prod_approx = approx * approx
    with mp.workprec(bits + 24):
        tol = mp.mpf(2) ** (8 - bits)
        for ce, ca in zip(prod_exact.coeffs, prod_approx.coeffs):
            ref = mp.mpf(ce.numerator) / ce.denominator
            if ref == 0:
                assert abs(ca) <= tol
            else:
                assert abs(ca - ref) <= tol * abs(ref)


def test_reciprocal_roundtrip():
    s = ts([1, 3, -2, 5, 7])
    inv = s.reciprocal()
    assert s * inv == ts([1, 0, 0, 0, 0])


def test_reciprocal_requires_unit():
    with pytest.raises(SeriesUsageError):
        ts([0, 1]).reciprocal()


def test_nested_series_bivariate_product():
    # Series in y whose coefficients are series in x: (x + y)^2.
    from uiptperco.series import Domain

    inner_zero = ts([0, 0, 0])
    inner_one = ts([1, 0, 0])
    dom = Domain(Domain.RING, zero=inner_zero, one=inner_one,
                 convert=lambda v: ts([v, 0, 0]))
    s = TruncatedSeries([ts([0, 1, 0]), inner_one, inner_zero], "y", dom)
    sq = s * s
    assert sq.coeffs[0] == ts([0, 0, 1])   # x^2
    assert sq.coeffs[1] == ts([0, 2, 0])   # 2x y
    assert sq.coeffs[2] == ts([1, 0, 0])   # y^2
