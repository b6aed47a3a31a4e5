"""Gasket-decomposition layer: face weights, partition function, disk laws.

The cluster of the root in a percolated triangulation is a Boltzmann map
with face weights q_k(p, t).  Everything here reduces to the boundary
series with color bias 1-p:

    q_k = ( (pt)^{3/2} [k=3]  +  (p t^3)^{k/2} * sum_l C(k+l-1, k-1) c_l ) / p,

with c_l = [y^l] T(1-p, t, t y).  Since only even total boundary degree
ever appears in products, the normalized weights

    qt_k := q_k / (p t^3)^{k/2}

are the working objects; qt_3 carries an extra 1/(p x) from the bare
triangle (x = t^3).  `WeightSequence` keeps both forms and a tail bound
certificate for the truncated l-sum.

The partition function Z(p, t) follows the census-anchored convention
Z = (1/p^2) * sum over percolated triangulations with a black root edge;
its closed form in terms of the 1-gon series is validated against the
exact enumeration oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .config import DEFAULT_PRECISION_BITS
from .gfseries import t_series_bivariate, t_series_numeric, t_t1_series, u_series, z_series
from .parametrization import (
    NumericalError,
    RangeError,
    c_constants,
    constants,
    eval_U,
    hat_T,
    invert_y,
    param_point,
    singularities_y,
    stationary_points,
)
from .polyp import PolyP
from .series import QQ, Domain, TruncatedSeries, bigfloat


class TailBoundError(NumericalError):
    """The truncated l-sum's certified tail exceeds the tolerance."""


def binomial(n, k):
    return math.comb(n, k)


def boundary_coefficients(p, t3, l_max: int, prec: int = DEFAULT_PRECISION_BITS):
    """c_l = [y^l] T(1-p, t, t y) for l = 0..l_max at numeric (p, t).

    The coefficients of the boundary series with bias 1-p, extracted from
    the parametrization's y-series at U(t^3).
    """
    with mp.workprec(prec):
        q = 1 - mp.mpf(p)
        u = eval_U(t3, prec)
        series = t_series_numeric(q, u, l_max, prec)
        return series.coeffs[:]


@dataclass
class WeightSequence:
    """Normalized Boltzmann weights at numeric (p, t).

    `qt[k]` is q_k / (p t^3)^{k/2} WITHOUT the bare-triangle term; the k=3
    weight additionally carries (p x)^{-1} (recorded in `delta3`), so that

        q_k = (p t^3)^{k/2} * (qt[k] + delta3 * [k=3] / (p * t^3)).
    """

    p: mp.mpf
    t3: mp.mpf
    K: int
    l_max: int
    qt: list
    delta3: bool
    tail_estimate: mp.mpf

    def q(self, k: int):
        base = mp.power(self.p * self.t3, mp.mpf(k) / 2) * self.qt[k]
        if k == 3 and self.delta3:
            base += mp.power(self.p * self.t3, mp.mpf(3) / 2) / (self.p * self.t3)
        return base


def weights(p, t3, K: int, l_max: int | None = None,
            prec: int = DEFAULT_PRECISION_BITS,
            tail_tol: float = 1e-30) -> WeightSequence:
    """Normalized weights qt_k, k = 1..K, by the truncated binomial l-sum.

    The tail over l > l_max is certified with an empirical geometric bound
    on c_l * y_+^l; failure raises rather than silently truncating.
    """
    if l_max is None:
        l_max = 8 * K + 200
    with mp.workprec(prec):
        p = mp.mpf(p)
        t3 = mp.mpf(t3)
        cs = boundary_coefficients(p, t3, l_max, prec)
        _, y_plus = singularities_y(1 - p, t3, prec)
        # Empirical geometric tail: |c_l| <= A r^l with r = 1/y_+ read off
        # the last computed coefficients.
        r = 1 / y_plus
        window = cs[-20:]
        amp = mp.mpf(0)
        for i, c in enumerate(window):
            l = l_max - len(window) + 1 + i
            amp = max(amp, abs(c) / mp.power(r, l))
        qt = [mp.mpf(0)] * (K + 1)
        worst_tail = mp.mpf(0)
        for k in range(1, K + 1):
            acc = mp.mpf(0)
            for l in range(l_max + 1):
                acc += binomial(k + l - 1, k - 1) * cs[l]
            qt[k] = acc / p
            # Tail: sum_{l>l_max} C(k+l-1,k-1) A r^l, bounded by the ratio
            # test since C grows polynomially in l.
            ratio = r * (1 + mp.mpf(k - 1) / (l_max + 1))
            if ratio >= 1:
                raise TailBoundError("l_max too small for a geometric tail bound")
            head = amp * binomial(k + l_max, k - 1) * mp.power(r, l_max + 1)
            tail = head / (1 - ratio)
            worst_tail = max(worst_tail, tail)
            if tail > tail_tol * max(abs(acc), mp.mpf(1)):
                raise TailBoundError(
                    f"certified tail {mp.nstr(tail)} exceeds tolerance at k={k}")
        return WeightSequence(p=p, t3=t3, K=K, l_max=l_max, qt=qt,
                              delta3=True, tail_estimate=worst_tail)


def qtilde_series_exact(k: int, x_order: int, p=None):
    """Normalized weight series, exact in x and polynomial in p.

    With a Fraction `p`, returns qt_k = q_k/(p x)^{k/2} itself (the bare
    triangle of qt_3 excluded).  With p = None the result is the symbolic
    polynomial p * qt_k -- qt_k alone has a 1/p pole, but the gasket-mass
    products only ever need p qt_k, which stays in Q[p].
    """
    symbolic = p is None
    pv = PolyP([0, 1]) if symbolic else Fraction(p)
    one_minus_p = PolyP([1, -1]) if symbolic else 1 - pv
    l_max = 2 * x_order + 1
    T = t_series_bivariate(one_minus_p, x_order, l_max)
    acc = None
    for l in range(l_max + 1):
        c_l = T.coeffs[l]
        term = c_l * binomial(k + l - 1, k - 1)
        acc = term if acc is None else acc + term
    if symbolic:
        return acc
    return acc / pv


def partition_series(p, order: int, domain: Domain = QQ) -> TruncatedSeries:
    """Z(p, t) as a series in x (exact for rational p).

    Convention anchored on the enumeration oracle: Z = (1/p^2) * the
    census mass of percolated triangulations with a black-black root edge,
    equal to (tT1/2) (1 + (1-p)/p^3 * tT1/2) / x with tT1 the stated 1-gon
    parametrization (the composition's [y^1], i.e. half the stated form).
    """
    t1 = t_t1_series(p, order, domain) / 2
    return z_series(p, order, domain, t1=t1)


def partition_value(p, t3, prec: int = DEFAULT_PRECISION_BITS):
    """Numeric Z(p, t) via the census-anchored closed form.

    Same rational expression as `z_series`: the second boundary
    coefficient divided by p^2 x, minus the atomic 2-gon.
    """
    with mp.workprec(prec):
        p = mp.mpf(p)
        x = mp.mpf(t3)
        u = eval_U(x, prec)
        lead = u * u * (1 - 3 * u) * (1 - u)
        term1 = (p * lead * (u * (1 - 3 * u) * (1 - 2 * u) + 2 * p * x)
                 / ((1 - 2 * u) * (1 - 2 * u)))
        term2 = 2 * p * p * lead * (1 - u)
        y2 = (term1 + term2) / (8 * x)
        return y2 / (p * p * x) - 1


def disk_w(p, t3, z, prec: int = DEFAULT_PRECISION_BITS):
    """Unpointed disk generating function W(z) = T(p,t, t/(sqrt(p t^3) z)) / (p z)."""
    with mp.workprec(prec):
        p = mp.mpf(p)
        t3 = mp.mpf(t3)
        z = mp.mpf(z)
        u = eval_U(t3, prec)
        y = 1 / (mp.sqrt(p * t3) * z)
        ym, yp = singularities_y(p, t3, prec)
        if not (ym < y < yp):
            raise RangeError("z maps inside the boundary-series cut")
        v = invert_y(p, u, y, prec)
        return hat_T(p, u, v) / (p * z)


def disk_w_pointed(p, t3, z, prec: int = DEFAULT_PRECISION_BITS):
    """One-cut law W_bullet(z) = ((z - c_+)(z - c_-))^{-1/2} outside the cut."""
    with mp.workprec(prec):
        z = mp.mpf(z)
        c_minus, c_plus = c_constants(p, t3, prec)
        if c_minus <= z <= c_plus:
            raise RangeError("z inside the one-cut support")
        val = (z - c_plus) * (z - c_minus)
        return 1 / mp.sqrt(val)


def phi_antiderivative(p, t3, z, prec: int = DEFAULT_PRECISION_BITS):
    """Phi(p, 1/z) = z^2/2 - (z + (c_+ + c_-)/2)/2 * sqrt((z-c_+)(z-c_-)).

    Antiderivative of the degree-2 cylinder coefficient; positive branch of
    the square root for z > c_+.
    """
    with mp.workprec(prec):
        z = mp.mpf(z)
        c_minus, c_plus = c_constants(p, t3, prec)
        margin = mp.mpf(2) ** (-prec + 24)
        if c_minus + margin < z < c_plus - margin:
            raise RangeError("z inside the one-cut support")
        val = (z - c_plus) * (z - c_minus)
        root = mp.sqrt(max(val, mp.mpf(0)))
        if z < c_minus:
            root = -root
        return z * z / 2 - (z + (c_plus + c_minus) / 2) / 2 * root


def qtilde_values(p, t3, K: int, prec: int = DEFAULT_PRECISION_BITS):
    """qt_k for k = 1..K at numeric (p, t) from the branch series.

    Coefficient extraction from the weight generating function: with
    V_z the branch of D(V) = (1-z) N(V) at y = 1/(1-z),

        sum_k p qt_k z^{k-1} = N(V_z) / (8 x),

    the same identity that backs the exact series path.  Independent of
    the truncated l-sum in `weights` (dual-path check in the tests).
    Returns a list indexed 0..K with entry 0 unused.
    """
    from .singular import vc_series

    with mp.workprec(prec):
        p = mp.mpf(p)
        t3 = mp.mpf(t3)
        u = eval_U(t3, prec)
        v = vc_series(p, K + 1, prec, t3=t3)
        num = (v * (2 - 4 * u) - v * v) * 2
        out = [mp.mpf(0)] * (K + 1)
        for k in range(1, K + 1):
            out[k] = num.coeffs[k - 1] / (8 * p * t3)
        return out
