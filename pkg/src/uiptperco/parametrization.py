"""Rational parametrizations of the triangulation generating series.

Everything downstream runs through two rational changes of variables:

* ``u = U(x)``, the branch of x = u(1-u)(1-2u)/2 with U(0) = 0, which
  uniformizes series in x = t^3 and is singular at x_c = sqrt(3)/36;
* ``V(p, u, y)``, the branch of y = hat_y(p, u, V) with V(0) = 0, which
  uniformizes the boundary-length variable.

The module evaluates the closed forms hat_w, hat_y, hat_T, hat_T1 over any
coefficient ring (Fractions, mpmath floats, series), locates the four real
stationary points of hat_y, the induced singularities y_-(p,t) < 0 <
y_+(p,t) of the boundary series, the one-cut endpoints c_+- , and the
closed-form trigonometric roots that appear at the critical edge weight.

Algebraic constants (sqrt 3, U at criticality, ...) are computed at the
configured precision, never hard-coded as decimals; closed forms appear
only in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .config import DEFAULT_PRECISION_BITS


class RangeError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(ZeroDivisionError):
    """A rational closed form was evaluated at one of its poles."""


class UnsupportedRangeError(RangeError):
    """Parameter range where a quantity is not defined (e.g. y_- = -inf)."""


class NumericalError(ArithmeticError):
    """Bracketing or convergence failure in a root solve."""


# -- exact rational building blocks (work over any ring) ---------------------

def hat_w(u):
    """x = u (1-u) (1-2u) / 2: the edge-weight uniformizer."""
    return u * (1 - u) * (1 - 2 * u) / 2


def hat_w_prime(u):
    return (1 - 6 * u + 6 * u * u) / 2


def hat_y_num(p, u, v):
    return 2 * v * (2 - 4 * u - v)


def hat_y_den(p, u, v):
    return (4 * p * u * (1 - u) * (1 - 2 * u)
            + 2 * u * (1 - 3 * u) * v + 2 * (1 - 3 * u) * v * v - v ** 3)


def hat_y(p, u, v):
    """The proper rational parametrization of the boundary variable."""
    den = hat_y_den(p, u, v)
    if _is_scalar_zero(den):
        raise PoleError(f"hat_y pole at V={v}")
    return hat_y_num(p, u, v) / den


def hat_y_dv(p, u, v):
    """d/dV of hat_y (quotient rule, exact)."""
    num = hat_y_num(p, u, v)
    den = hat_y_den(p, u, v)
    dnum = 4 - 8 * u - 4 * v
    dden = 2 * u * (1 - 3 * u) + 4 * (1 - 3 * u) * v - 3 * v * v
    return (dnum * den - num * dden) / (den * den)


def hat_T(p, u, v):
    """Boundary series value: hat_y's denominator over 4 u (1-u)(1-2u)."""
    return hat_y_den(p, u, v) / (4 * u * (1 - u) * (1 - 2 * u))


def hat_T1(p, u):
    """Rational parametrization of t*T_1 as stated with the uniformizer."""
    return p * u * (1 - 3 * u) / (1 - 2 * u)


def stationary_quartic(p, u, v):
    """Quartic whose roots are the stationary points of V -> hat_y(p,u,V)."""
    return (-2 * v ** 4 + (8 - 16 * u) * v ** 3
            - 4 * (3 * u - 1) * (3 * u - 2) * v * v
            - 16 * u * p * (2 * u - 1) * (u - 1) * v
            - 16 * u * p * (u - 1) * (2 * u - 1) ** 2)


def _is_scalar_zero(value) -> bool:
    try:
        return value == 0
    except TypeError:
        return False


# -- numeric constants at configured precision -------------------------------

class Constants:
    """Algebraic constants at the critical edge weight, at `prec` bits."""

    def __init__(self, prec: int = DEFAULT_PRECISION_BITS):
        self.prec = prec
        with mp.workprec(prec):
            self.sqrt3 = mp.sqrt(3)
            self.tc3 = self.sqrt3 / 36          # critical x = t^3
            self.tc = mp.cbrt(self.tc3)
            self.Uc = (3 - self.sqrt3) / 6      # U at the critical point
            self.one_minus_2Uc = self.sqrt3 / 3


_CONSTANTS_CACHE: dict[int, Constants] = {}


def constants(prec: int = DEFAULT_PRECISION_BITS) -> Constants:
    if prec not in _CONSTANTS_CACHE:
        _CONSTANTS_CACHE[prec] = Constants(prec)
    return _CONSTANTS_CACHE[prec]


def _bisect_newton(f, df, lo, hi, prec, max_newton=200):
    """Root of f in [lo, hi] by bisection warm-up plus Newton polish.

    Requires a sign change on the bracket; converges to working precision.
    """
    with mp.workprec(prec + 16):
        flo, fhi = f(lo), f(hi)
        if flo == 0:
            return mp.mpf(lo)
        if fhi == 0:
            return mp.mpf(hi)
        if mp.sign(flo) == mp.sign(fhi):
            raise NumericalError(
                f"no sign change on bracket [{mp.nstr(mp.mpf(lo))}, {mp.nstr(mp.mpf(hi))}]"
                f" (f: {mp.nstr(flo)} .. {mp.nstr(fhi)})")
        a, b = mp.mpf(lo), mp.mpf(hi)
        for _ in range(60):
            m = (a + b) / 2
            fm = f(m)
            if fm == 0:
                return m
            if mp.sign(fm) == mp.sign(flo):
                a, flo = m, fm
            else:
                b = m
        x = (a + b) / 2
        tol = mp.mpf(2) ** (-prec)
        for _ in range(max_newton):
            dfx = df(x)
            if dfx == 0:
                break
            step = f(x) / dfx
            xn = x - step
            if xn < a or xn > b:
                xn = (a + b) / 2
            if f(xn) == 0 or abs(xn - x) <= tol * (1 + abs(xn)):
                return xn
            if mp.sign(f(xn)) == mp.sign(f(a)):
                a = xn
            else:
                b = xn
            x = xn
        return x


def eval_U(x, prec: int = DEFAULT_PRECISION_BITS):
    """The increasing branch of x = hat_w(U) on (0, x_c], with U(0+) = 0."""
    cst = constants(prec)
    with mp.workprec(prec + 16):
        x = mp.mpf(x) if not isinstance(x, Fraction) else mp.mpf(x.numerator) / x.denominator
        # Callers legitimately pass x_c values computed at other precisions;
        # clamp overshoots within a relative 1e-15 to the critical point.
        if x < 0 or x > cst.tc3 * (1 + mp.mpf("1e-15")):
            raise RangeError(f"x = {mp.nstr(x)} outside (0, x_c]")
        if x == 0:
            return mp.mpf(0)
        if x >= cst.tc3:
            return +cst.Uc
        return _bisect_newton(lambda u: hat_w(u) - x, hat_w_prime, mp.mpf(0), cst.Uc, prec)


@dataclass
class ParamPoint:
    """Evaluated parametrization data at a fixed (p, t)."""

    p: mp.mpf
    t3: mp.mpf
    U: mp.mpf
    V_minus: mp.mpf
    V_plus: mp.mpf
    V_l: mp.mpf
    V_r: mp.mpf
    y_minus: mp.mpf          # -inf encoded as mp.mpf('-inf')
    y_plus: mp.mpf
    c_minus: mp.mpf | None
    c_plus: mp.mpf


def stationary_points(p, u, prec: int = DEFAULT_PRECISION_BITS):
    """The four real stationary points V_- < 0 < V_+ <= 1-2U <= V_l < V_r.

    Brackets follow the sign pattern of the quartic at 0, 1-2U and 2(1-2U);
    the degenerate double root V_+ = V_l = 1-2U at the critical U is
    detected and returned exactly.  At p = 1 the outer pair collides with
    2(1-2U) and the quartic bracketing is out of contract (all p = 1 uses
    go through the closed trigonometric forms).
    """
    cst = constants(prec)
    with mp.workprec(prec + 16):
        p = mp.mpf(p)
        u = mp.mpf(u)
        q = lambda v: stationary_quartic(p, u, v)
        dq = lambda v: (-8 * v ** 3 + 3 * (8 - 16 * u) * v * v
                        - 8 * (3 * u - 1) * (3 * u - 2) * v
                        - 16 * u * p * (2 * u - 1) * (u - 1))
        s = 1 - 2 * u
        # Outward expansion for the two extreme roots.
        lo = mp.mpf(-1) / 16
        while mp.sign(q(lo)) == mp.sign(q(mp.mpf(0))) or q(lo) == 0:
            lo *= 2
            if lo < -1e6:
                raise NumericalError("V_- bracket expansion failed")
        v_minus = _bisect_newton(q, dq, lo, 0, prec)
        hi = 2 * s * 2
        while mp.sign(q(hi)) == mp.sign(q(2 * s)) or q(hi) == 0:
            hi *= 2
            if hi > 1e6:
                raise NumericalError("V_r bracket expansion failed")
        v_r = _bisect_newton(q, dq, 2 * s, hi, prec)
        # Interior pair; collapses to a double root at s when U -> U_c.
        ulp_gap = 10 * mp.mpf(2) ** (-prec)
        if abs(u - cst.Uc) < ulp_gap:
            v_plus = s
            v_l = s
        else:
            v_plus = _bisect_newton(q, dq, mp.mpf(0), s, prec)
            v_l = _bisect_newton(q, dq, s, 2 * s, prec)
        return v_minus, v_plus, v_l, v_r


def _has_pole_between(p, u, a, b, prec) -> bool:
    """True when hat_y's cubic denominator vanishes somewhere in (a, b)."""
    with mp.workprec(prec + 16):
        den = lambda v: hat_y_den(p, u, v)
        # Sample a modest grid; the denominator is a cubic so three sign
        # checks suffice in principle, but sampling is simpler and cheap.
        n = 64
        prev = den(a + (b - a) / n * mp.mpf(1) / 7)
        for k in range(1, n + 1):
            v = a + (b - a) * mp.mpf(k) / n
            cur = den(v)
            if cur == 0 or mp.sign(cur) != mp.sign(prev):
                return True
            prev = cur
        return False


def singularities_y(p, t3, prec: int = DEFAULT_PRECISION_BITS):
    """(y_-, y_+) for the boundary series at (p, t): images of V_-+ under hat_y.

    y_- is -inf when the denominator has a pole between V_- and 0.
    """
    with mp.workprec(prec + 16):
        p = mp.mpf(p)
        u = eval_U(t3, prec)
        v_minus, v_plus, _, _ = stationary_points(p, u, prec)
        y_plus = hat_y(p, u, v_plus)
        if _has_pole_between(p, u, v_minus, mp.mpf(0), prec):
            y_minus = mp.mpf("-inf")
        else:
            y_minus = hat_y(p, u, v_minus)
        return y_minus, y_plus


def c_constants(p, t3, prec: int = DEFAULT_PRECISION_BITS):
    """One-cut endpoints c_+- = 1 / (sqrt(p t^3) y_+-).

    c_- is undefined (reported as unsupported) when y_- = -inf; all uses in
    the observables have p >= 1/2 at the critical weight, where y_- is finite.
    """
    with mp.workprec(prec + 16):
        p = mp.mpf(p)
        t3 = mp.mpf(t3)
        y_minus, y_plus = singularities_y(p, t3, prec)
        root = mp.sqrt(p * t3)
        c_plus = 1 / (root * y_plus)
        if mp.isinf(y_minus):
            raise UnsupportedRangeError(
                "c_- undefined: y_- = -inf in this parameter range")
        c_minus = 1 / (root * y_minus)
        return c_minus, c_plus


def param_point(p, t3, prec: int = DEFAULT_PRECISION_BITS) -> ParamPoint:
    with mp.workprec(prec + 16):
        p = mp.mpf(p)
        t3 = mp.mpf(t3)
        u = eval_U(t3, prec)
        v_minus, v_plus, v_l, v_r = stationary_points(p, u, prec)
        y_minus, y_plus = singularities_y(p, t3, prec)
        try:
            c_minus, c_plus = c_constants(p, t3, prec)
        except UnsupportedRangeError:
            c_minus = None
            c_plus = 1 / (mp.sqrt(p * t3) * y_plus)
        return ParamPoint(p=p, t3=t3, U=u, V_minus=v_minus, V_plus=v_plus,
                          V_l=v_l, V_r=v_r, y_minus=y_minus, y_plus=y_plus,
                          c_minus=c_minus, c_plus=c_plus)


def invert_y(p, u, y, prec: int = DEFAULT_PRECISION_BITS,
             v_bracket=None):
    """The unique V in (V_-, V_+) with hat_y(p,u,V) = y, for y in (y_-, y_+).

    hat_y is increasing between its two stationary points surrounding 0, so
    monotone bisection plus Newton converges to working precision.
    """
    with mp.workprec(prec + 16):
        p = mp.mpf(p)
        u = mp.mpf(u)
        y = mp.mpf(y)
        if v_bracket is None:
            v_minus, v_plus, _, _ = stationary_points(p, u, prec)
        else:
            v_minus, v_plus = v_bracket
        if y == 0:
            return mp.mpf(0)
        g = lambda v: hat_y(p, u, v) - y
        dg = lambda v: hat_y_dv(p, u, v)
        if y > 0:
            # hat_y is increasing and pole-free on [0, V_+].
            if y > hat_y(p, u, v_plus):
                raise RangeError(f"y = {mp.nstr(y)} at or beyond y_+")
            return _bisect_newton(g, dg, mp.mpf(0), v_plus, prec)
        # Negative branch: scan left from 0, stopping before any pole of the
        # denominator; hat_y decreases to y_- (or -inf) along the way.
        den0 = hat_y_den(p, u, mp.mpf(0))
        steps = 1 << 12
        prev_v = mp.mpf(0)
        for k in range(1, steps + 1):
            v = v_minus * mp.mpf(k) / steps
            den = hat_y_den(p, u, v)
            if den == 0 or mp.sign(den) != mp.sign(den0):
                raise RangeError(f"y = {mp.nstr(y)} beyond the negative singularity")
            if hat_y(p, u, v) <= y:
                return _bisect_newton(g, dg, v, prev_v, prec)
            prev_v = v
        if hat_y(p, u, v_minus) <= y:
            return _bisect_newton(g, dg, v_minus, prev_v, prec)
        raise RangeError(f"y = {mp.nstr(y)} at or beyond y_-")


@dataclass
class CriticalTrigRoots:
    """Closed-form stationary points at the critical weight, plus the
    integration bounds V^i_+- for the percolation-probability integral."""

    p: mp.mpf
    V_m: mp.mpf
    V_l: mp.mpf
    V_r: mp.mpf
    V_i_plus: mp.mpf
    V_i_minus: mp.mpf
    V_plus: mp.mpf   # the relevant positive stationary point at (p, t_c)


def negative_pole_threshold(prec: int = DEFAULT_PRECISION_BITS):
    """Below p = 1/2 - 5 sqrt(3)/18 the parametrization has negative poles."""
    cst = constants(prec)
    with mp.workprec(prec):
        return mp.mpf(1) / 2 - 5 * cst.sqrt3 / 18


def critical_trig_roots(p, prec: int = DEFAULT_PRECISION_BITS) -> CriticalTrigRoots:
    """Trig closed forms for the stationary cubic at the critical weight.

    The stationary points there are the roots of
    (9 V^3 - 9 sqrt(3) V^2 + 4 p sqrt(3)) (V - sqrt(3)/3); the cubic's roots
    have arccos expressions.  Valid for p above the negative-pole threshold.
    """
    cst = constants(prec)
    with mp.workprec(prec + 16):
        p = mp.mpf(p)
        if p <= negative_pole_threshold(prec):
            raise UnsupportedRangeError(
                "trig closed forms need p above the negative-pole threshold")
        if p > 1:
            raise RangeError("p must lie in (threshold, 1]")
        sq = cst.sqrt3 / 3
        sp = mp.sqrt(p)
        sp = min(sp, mp.mpf(1))  # clamp against rounding at p = 1
        theta = mp.acos(sp) / 3
        v_m = -sq * sp / mp.cos(theta)
        v_l = sq * sp / mp.cos(theta - mp.pi / 3)
        v_r = 2 * sq - v_m
        v_plus = sq if p >= mp.mpf(1) / 2 else v_l
        v_i_plus = 2 * cst.sqrt3 * p / (9 * v_plus ** 2)
        v_i_minus = 2 * cst.sqrt3 * p / (9 * v_m ** 2)
        return CriticalTrigRoots(p=p, V_m=v_m, V_l=v_l, V_r=v_r,
                                 V_i_plus=v_i_plus, V_i_minus=v_i_minus,
                                 V_plus=v_plus)
