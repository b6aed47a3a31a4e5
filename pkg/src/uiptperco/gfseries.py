"""Series realizations of the rational parametrizations.

Builders for the power series actually used downstream:

* ``u_series``: U(x) with x = U(1-U)(1-2U)/2, exact or bigfloat;
* ``t_t1_series``: the 1-gon series p U (1-3U) / (1-2U) in x;
* ``v_series_bivariate``: V(p, U(x), y) as a y-series with x-series
  coefficients (exact in p when p is a Fraction or polynomial);
* ``t_series_bivariate``: the boundary series in (x, y) via the identity
  4 U (1-U)(1-2U) = 8x, which turns the closed form into a shift;
* ``v_series_numeric`` / ``t_series_numeric``: univariate y-series at a
  fixed numeric U (typically the critical point) in bigfloat;
* ``z_series``: the partition-function series in x.

Variable names: "x" is t^3 (series in t only live through x), "y" the
boundary-length variable of T(p, t, t*y).
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .config import DEFAULT_PRECISION_BITS
from .parametrization import constants
from .polyp import PolyP, polyp_domain
from .series import (
    QQ,
    Domain,
    TruncatedSeries,
    bigfloat,
    solve_implicit,
    solve_lagrange,
)


def u_series(order: int, domain: Domain = QQ) -> TruncatedSeries:
    """U(x): the unique series with zero constant term and hat_w(U) = x."""
    x = TruncatedSeries.identity(order, "x", domain)

    def f(w):
        return w * (1 - w) * (1 - 2 * w) / 2 - x

    def dfdw(w):
        return (1 - 6 * w + 6 * w * w) / 2

    return solve_implicit(f, dfdw, domain.convert(0), order, "x", domain)


def t_t1_series(p, order: int, domain: Domain = QQ) -> TruncatedSeries:
    """t T_1 as a series in x, from the stated closed form p U (1-3U)/(1-2U)."""
    u = u_series(order, domain)
    return (u * (1 - 3 * u) * p) / (1 - 2 * u)


def _nested_domain(order: int, inner_domain: Domain) -> Domain:
    zero = TruncatedSeries.constant(inner_domain.zero(), order, "x", inner_domain)
    one = TruncatedSeries.constant(inner_domain.one(), order, "x", inner_domain)

    def convert(v):
        return TruncatedSeries.constant(inner_domain.convert(v), order, "x", inner_domain)

    return Domain(Domain.RING, zero=zero, one=one, convert=convert)


def lift_to_polyp(series_q: TruncatedSeries) -> TruncatedSeries:
    """Lift an exact-rational series into the polynomial-in-p ring."""
    dom = polyp_domain()
    return series_q.map_coeffs(lambda c: PolyP([c]), dom)


def v_series_bivariate(p, x_order: int, y_order: int) -> TruncatedSeries:
    """V(p, U(x), y) as a y-series whose coefficients are x-series.

    `p` may be a Fraction (inner domain QQ) or a PolyP (inner domain the
    polynomial ring).  Solved in Lagrangean form V = y * R(V) with
    R = hat_y_den(V) / (2 (2 - 4U - V)); no coefficient division occurs.
    """
    u_q = u_series(x_order, QQ)
    if isinstance(p, PolyP):
        u = lift_to_polyp(u_q)
    else:
        u = u_q
        p = Fraction(p) if not isinstance(p, Fraction) else p
    nested = _nested_domain(x_order, u.domain)

    def as_outer(xs):
        return TruncatedSeries.constant(xs, y_order, "y", nested)

    p_val = p
    four_pu = 4 * p_val * u * (1 - u) * (1 - 2 * u)
    two_u13 = 2 * u * (1 - 3 * u)
    two_13 = 2 * (1 - 3 * u)
    c_fourpu = as_outer(four_pu)
    c_two_u13 = as_outer(two_u13)
    c_two_13 = as_outer(two_13)
    c_2m4u = as_outer(2 - 4 * u)

    def rhs(v):
        den = c_fourpu + c_two_u13 * v + c_two_13 * (v * v) - v * v * v
        recip = (c_2m4u - v) * 2
        # R(V) = D(V) / (2 (2 - 4U - V)); the divisor has unit constant 4.
        return den * recip.reciprocal()

    return solve_lagrange(rhs, y_order, "y", nested, w0=nested.zero())


def t_series_bivariate(p, x_order: int, y_order: int) -> TruncatedSeries:
    """T(p, t, t y) in (x, y) from hat_T(V) = p + (2U(1-3U)V + 2(1-3U)V^2 - V^3)/(8x).

    Uses 4 U(1-U)(1-2U) = 8x exactly, so the division is an x-shift (with
    one padding order so the top x-coefficient stays valid).
    """
    x_pad = x_order + 1
    v = v_series_bivariate(p, x_pad, y_order)
    nested = v.domain
    u_q = u_series(x_pad, QQ)
    u = lift_to_polyp(u_q) if isinstance(p, PolyP) else u_q

    def as_outer(xs):
        return TruncatedSeries.constant(xs, y_order, "y", nested)

    num = (as_outer(2 * u * (1 - 3 * u)) * v
           + as_outer(2 * (1 - 3 * u)) * (v * v) - v * v * v)
    shifted = num.map_coeffs(lambda xs: xs.shift_down(1) / 8)
    total = shifted + as_outer(_const_like(u, p))
    final_dom = _nested_domain(x_order, u_q.domain if not isinstance(p, PolyP)
                               else u.domain)
    return total.map_coeffs(lambda xs: xs.truncate(x_order), final_dom)


def _const_like(u_series_inner: TruncatedSeries, p):
    dom = u_series_inner.domain
    return TruncatedSeries.constant(dom.convert(p) if not isinstance(p, PolyP) else p,
                                    u_series_inner.order, "x", dom)


def v_at_y1_series(q, order: int, domain: Domain = QQ) -> TruncatedSeries:
    """W0(x) = V(q, U(x), 1): the parametrizing branch evaluated at y = 1.

    Solves hat_y_den(W) - hat_y_num(W) = 0 with W(0) = 0; the derivative at
    the base point is -4, so the solve is Lagrangean.
    """
    u = u_series(order, domain)
    q_cast = domain.convert(q) if not isinstance(q, PolyP) else q

    def f(w):
        den = (4 * q_cast * u * (1 - u) * (1 - 2 * u)
               + 2 * u * (1 - 3 * u) * w + 2 * (1 - 3 * u) * (w * w) - w * w * w)
        num = 2 * w * (2 - 4 * u - w)
        return den - num

    def dfdw(w):
        dden = 2 * u * (1 - 3 * u) + 4 * (1 - 3 * u) * w - 3 * (w * w)
        dnum = 4 - 8 * u - 4 * w
        return dden - dnum

    return solve_implicit(f, dfdw, domain.convert(0), order, "x", domain)


def t_at_y1_series(q, order: int, domain: Domain = QQ) -> TruncatedSeries:
    """A(x) = T(q, t, t): hat_T at the y = 1 branch, via N(W0)/(8x)."""
    u = u_series(order + 1, domain)
    w0 = v_at_y1_series(q, order + 1, domain)
    num = 2 * w0 * (2 - 4 * u - w0)
    return (num.shift_down(1) / 8).truncate(order)


def qtilde_series_fast(p, x_order: int, k_max: int) -> list[TruncatedSeries]:
    """Normalized weights qt_k (k = 1..k_max) as exact x-series.

    tildeF(z) = T(1-p, t, t/(1-z)) / ((1-p+p) (1-z)) has coefficients
    [z^{k-1}] tildeF = p qt_k.  On the parametrization, y = 1/(1-z) is the
    branch V_z with D(V_z) = (1-z) N(V_z), solved as a z-series over the
    ring of exact x-series around the y = 1 base point; then

        tildeF = N(V_z) / (8 p x),

    using hat_T = D/(8x) and the branch relation to avoid dividing by 1-z.
    The bare-triangle part of qt_3 is NOT included.
    """
    p = Fraction(p)
    q = 1 - p
    x_pad = x_order + 1
    u = u_series(x_pad, QQ)
    w0 = v_at_y1_series(q, x_pad, QQ)
    nested = _nested_domain(x_pad, QQ)

    def as_outer(xs):
        return TruncatedSeries.constant(xs, k_max, "z", nested)

    z = TruncatedSeries.identity(k_max, "z", nested)
    c_fourpu = as_outer(4 * q * u * (1 - u) * (1 - 2 * u))
    c_a1 = as_outer(2 * u * (1 - 3 * u))
    c_a2 = as_outer(2 * (1 - 3 * u))
    c_b = as_outer(2 - 4 * u)

    def f(v):
        den = c_fourpu + c_a1 * v + c_a2 * (v * v) - v * v * v
        num = (v * c_b - v * v) * 2
        return den - (1 - z) * num

    def dfdv(v):
        dden = c_a1 + c_a2 * v * 2 - (v * v) * 3
        dnum = (c_b - v * 2) * 2
        return dden - (1 - z) * dnum

    from .series import solve_implicit_recursion

    v_z = solve_implicit_recursion(f, dfdv, w0, k_max, "z", nested)
    num = (v_z * c_b - v_z * v_z) * 2
    out = []
    for k in range(1, k_max + 2):
        if k - 1 > k_max:
            break
        xs = num.coeffs[k - 1]
        out.append((xs.shift_down(1) / (8 * p)).truncate(x_order))
        if len(out) == k_max:
            break
    return out


def v_series_numeric(p, u_value, y_order: int,
                     prec: int = DEFAULT_PRECISION_BITS) -> TruncatedSeries:
    """V(p, u, y) as a y-series with bigfloat coefficients at fixed numeric u."""
    dom = bigfloat(prec)
    with mp.workprec(prec):
        pv = dom.convert(p)
        uv = dom.convert(u_value) if not isinstance(u_value, mp.mpf) else u_value
        four_pu = 4 * pv * uv * (1 - uv) * (1 - 2 * uv)
        a1 = 2 * uv * (1 - 3 * uv)
        a2 = 2 * (1 - 3 * uv)
        b = 2 - 4 * uv
    y = TruncatedSeries.identity(y_order, "y", dom)

    def f(v):
        den = four_pu + a1 * v + a2 * (v * v) - v * v * v
        num = (v * b - v * v) * 2
        return y * den - num

    def dfdv(v):
        dden = a1 + 2 * a2 * v - 3 * (v * v)
        dnum = (b - 2 * v) * 2
        return y * dden - dnum

    return solve_implicit(f, dfdv, dom.convert(0), y_order, "y", dom)


def t_series_numeric(p, u_value, y_order: int,
                     prec: int = DEFAULT_PRECISION_BITS,
                     v: TruncatedSeries | None = None) -> TruncatedSeries:
    """T(p, t, t y) as a y-series at fixed numeric u (and its x = hat_w(u))."""
    dom = bigfloat(prec)
    if v is None:
        v = v_series_numeric(p, u_value, y_order, prec)
    with mp.workprec(prec):
        pv = dom.convert(p)
        uv = dom.convert(u_value) if not isinstance(u_value, mp.mpf) else u_value
        denom = 4 * uv * (1 - uv) * (1 - 2 * uv)
        a1 = 2 * uv * (1 - 3 * uv)
        a2 = 2 * (1 - 3 * uv)
    num = a1 * v + a2 * (v * v) - v * v * v
    return num / denom + pv


def z_series(p, order: int, domain: Domain = QQ) -> TruncatedSeries:
    """Partition function as a series in x, anchored on the enumeration oracle.

    Opening the root edge identifies the percolated mass with the 2-gon
    boundary series: Z = [y^2] T(p,t,ty) / (p^2 x) - 1 (the subtracted 1 is
    the atomic 2-gon, which closes onto the edge map, not a triangulation).
    Uses the closed form of the second boundary coefficient:

        [y^2] T = ( p U^2 (1-U)(1-3U) [U(1-3U)(1-2U) + 2 p x]/(1-2U)^2
                    + 2 p^2 U^2 (1-U)^2 (1-3U) ) / (8 x).
    """
    p_cast = domain.convert(p)
    u = u_series(order + 2, domain)
    lead = u * u * (1 - 3 * u)
    x = TruncatedSeries.identity(order + 2, "x", domain)
    inner = u * (1 - 3 * u) * (1 - 2 * u) + 2 * p_cast * x
    one_minus_2u_sq = (1 - 2 * u) * (1 - 2 * u)
    term1 = (lead * (1 - u) * inner * p_cast) / one_minus_2u_sq
    term2 = lead * (1 - u) * (1 - u) * (2 * p_cast * p_cast)
    y2 = (term1 + term2).shift_down(1) / 8
    z = y2.shift_down(1) / (p_cast * p_cast) - 1
    return z.truncate(order)
