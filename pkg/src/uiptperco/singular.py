"""Singularity analysis: Puiseux expansions, transfer asymptotics, and the
limit series of the normalized weights.

The limit objects are the ratios

    delta_k(p) = lim [x^n] qt_k(p, .) / [x^n] Z(p, .)
    theta_k(p) = lim [x^n] (t^k T_k(p, .)) / [x^n] Z(p, .)

whose generating functions have rational closed forms on the critical
parametrization: Delta(p, z) = Dhat(p, Vc(z)) with Vc(z) =
V(1-p, U_c, 1/(1-z)).  The closed form Dhat is transcribed once and
certified two independent ways (tested): the change-of-variables identity

    Dhat(p,V) d/dV hat_y(1-p,U_c,V) / (hat_y (hat_y - 1))
        = 1 / (3 (2 sqrt3 - 3(1-p)) (V - sqrt3/3)^2),

and agreement of [z^k] Delta with the exact series ratios at small k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .config import DEFAULT_PRECISION_BITS
from .gfseries import u_series, v_series_numeric
from .parametrization import (
    NumericalError,
    RangeError,
    constants,
    eval_U,
    hat_y,
    hat_y_dv,
    invert_y,
    singularities_y,
    stationary_points,
)
from .series import QQ, TruncatedSeries, bigfloat, solve_implicit


def _mpf_frac(value):
    f = Fraction(value)
    return mp.mpf(f.numerator) / f.denominator


@dataclass
class SingularExpansion:
    """Sum of C (1 - x/rho)^alpha terms plus an error order."""

    rho: object
    terms: list          # list of (alpha: Fraction, C)
    error_order: Fraction
    residual: float | None = None

    def value(self, x):
        with mp.workprec(mp.mp.prec):
            s = mp.mpf(0)
            eps = 1 - mp.mpf(x) / self.rho
            for alpha, c in self.terms:
                s += c * mp.power(eps, _mpf_frac(alpha))
            return s


def puiseux_u(prec: int = DEFAULT_PRECISION_BITS, n_terms: int = 4) -> SingularExpansion:
    """Singular expansion of U at x_c by series reversion (not hard-coded).

    With eps = 1 - x/x_c and w = sqrt(eps), U = U_c + w * S(w) where S
    solves hat_w(U_c + w S) = x_c (1 - w^2); the base value S(0) is the
    negative root of -(sqrt3/2) S^2 = -x_c.
    """
    cst = constants(prec)
    dom = bigfloat(prec)
    order = 2 * n_terms
    with mp.workprec(prec):
        xc = cst.tc3
        uc = cst.Uc
        s0 = -mp.sqrt(2 * xc / cst.sqrt3)
        w = TruncatedSeries.identity(order, "w", dom)

        # hat_w(U_c + D) - x_c = D^2 (D - sqrt3/2) exactly (the branch point
        # is a double root), so with D = w S the equation divided by w^2 is
        #     G(S, w) = S^2 (w S - sqrt3/2) + x_c = 0,
        # which is Lagrangean in S at the base value -sqrt(2 x_c / sqrt3).
        def g(s):
            return s * s * (w * s - cst.sqrt3 / 2) + xc

        def dgds(s):
            return 3 * w * (s * s) - cst.sqrt3 * s

        sol = solve_implicit(g, dgds, s0, order, "w", dom)
        terms = [(Fraction(0), uc)]
        for j in range(1, order + 1):
            coeff = sol.coeffs[j - 1]
            terms.append((Fraction(j, 2), coeff))
        terms = [(a, c) for a, c in terms if abs(c) > mp.mpf(2) ** (-prec // 2)]
        return SingularExpansion(rho=xc, terms=terms[:n_terms],
                                 error_order=Fraction(n_terms, 2))


def transfer(expansion: SingularExpansion, n: int,
             prec: int = DEFAULT_PRECISION_BITS):
    """Asymptotic n-th coefficient sum_alpha C rho^-n n^(-alpha-1) / Gamma(-alpha).

    Integer alpha terms contribute nothing (Gamma poles).
    """
    with mp.workprec(prec):
        total = mp.mpf(0)
        for alpha, c in expansion.terms:
            if Fraction(alpha).denominator == 1:
                continue
            a = _mpf_frac(alpha)
            total += c * mp.power(n, -a - 1) / mp.gamma(-a)
        return total * mp.power(expansion.rho, -n)


def puiseux_fit(f, rho, exponents, prec: int = DEFAULT_PRECISION_BITS,
                ladder=(1e-3, 1e-6, 24), check_offset: int = 3) -> SingularExpansion:
    """Least-squares fit of f(rho (1 - s)) = sum C_alpha s^alpha on a ladder.

    Geometric ladder of offsets s; a second fit on a shifted sub-ladder
    must agree (Richardson-style consistency), reported via `residual`.
    """
    s_max, s_min, count = ladder
    with mp.workprec(prec):
        svals = [mp.mpf(s_max) * mp.power(mp.mpf(s_min) / s_max,
                                          mp.mpf(i) / (count - 1))
                 for i in range(count)]
        rows = []
        rhs = []
        for s in svals:
            rows.append([mp.power(s, _mpf_frac(a)) for a in exponents])
            rhs.append(f(rho * (1 - s)))
        sol1 = _lsq(rows, rhs)
        sol2 = _lsq(rows[check_offset:], rhs[check_offset:])
        resid = max(abs(a - b) / (1 + abs(a)) for a, b in zip(sol1, sol2))
        terms = [(Fraction(a), c) for a, c in zip(exponents, sol1)]
        return SingularExpansion(rho=rho, terms=terms,
                                 error_order=max(Fraction(a) for a in exponents) + 1,
                                 residual=float(resid))


def _lsq(rows, rhs):
    m = len(rows[0])
    ata = mp.zeros(m, m)
    atb = mp.zeros(m, 1)
    for row, b in zip(rows, rhs):
        for i in range(m):
            for j in range(m):
                ata[i, j] += row[i] * row[j]
            atb[i] += row[i] * b
    sol = mp.lu_solve(ata, atb)
    return [sol[i] for i in range(m)]


# -- the limit series ---------------------------------------------------------

SQ3 = None  # computed per precision


def dhat(p, v, prec: int = DEFAULT_PRECISION_BITS):
    """Closed form of the weight-ratio limit generating function on the
    critical parametrization (transcribed once; certified in tests)."""
    with mp.workprec(prec):
        s3 = mp.sqrt(3)
        p = mp.mpf(p)
        v = mp.mpf(v) if not isinstance(v, mp.mpf) else v
        num = (v * (2 * s3 - 3 * v)
               * (9 * v ** 3 - 9 * (s3 + 1) * v ** 2 + 3 * (3 + 2 * s3) * v
                  - 2 * (1 - p) * s3))
        den = ((3 * (p - 1) + 2 * s3) * (s3 - 3 * v) ** 3
               * (9 * v ** 3 - 9 * v ** 2 * s3 + 4 * (1 - p) * s3))
        return 3 * num / den


def dhat_series(p, v: TruncatedSeries, prec: int) -> TruncatedSeries:
    """dhat evaluated on a series argument (same closed form)."""
    with mp.workprec(prec):
        s3 = mp.sqrt(3)
        p = mp.mpf(p)
        num = (v * (2 * s3 - 3 * v)
               * (v * v * v * 9 - (v * v) * (9 * (s3 + 1)) + v * (3 * (3 + 2 * s3))
                  - 2 * (1 - p) * s3))
        den = ((s3 - 3 * v) ** 3
               * (v * v * v * 9 - (v * v) * (9 * s3) + 4 * (1 - p) * s3)
               * (3 * (p - 1) + 2 * s3))
        return (num * 3) / den


def vc_series(p, k_max: int, prec: int = DEFAULT_PRECISION_BITS,
              t3=None) -> TruncatedSeries:
    """Vc(z) = V(1-p, U(t^3), 1/(1-z)) as a z-series (bigfloat coefficients).

    Solved implicitly from (1-z) hat_y(1-p, U, Vc) = 1 around the numeric
    base point Vc(0) = V(1-p, U, 1).  Defaults to the critical weight.
    """
    cst = constants(prec)
    dom = bigfloat(prec)
    with mp.workprec(prec + 16):
        q = 1 - mp.mpf(p)
        uc = cst.Uc if t3 is None else eval_U(t3, prec)
        v0 = invert_y(q, uc, mp.mpf(1), prec)
        z = TruncatedSeries.identity(k_max, "z", dom)
        four_pu = 4 * q * uc * (1 - uc) * (1 - 2 * uc)
        a1 = 2 * uc * (1 - 3 * uc)
        a2 = 2 * (1 - 3 * uc)
        bb = 2 - 4 * uc

        def f(v):
            den = four_pu + a1 * v + a2 * (v * v) - v * v * v
            num = (v * bb - v * v) * 2
            return (1 - z) * num - den

        def dfdv(v):
            dden = a1 + 2 * a2 * v - 3 * (v * v)
            dnum = (bb - 2 * v) * 2
            return (1 - z) * dnum - dden

        return solve_implicit(f, dfdv, v0, k_max, "z", dom)


@dataclass
class LimitSeries:
    kind: str
    p: float
    coeffs: list

    def coeff(self, k: int):
        return self.coeffs[k]


def delta_series(p, K: int, prec: int | None = None) -> LimitSeries:
    """delta_k(p), k = 0..K, from Dhat on the Vc z-series.

    Precision defaults to 8 + 2K bits (the coefficients straddle ~4^K in
    magnitude); a coefficient-noise monitor raises when the top
    coefficients lose all relative accuracy.
    """
    if prec is None:
        prec = max(DEFAULT_PRECISION_BITS, 8 + 2 * K)
    v = vc_series(p, K, prec)
    series = dhat_series(mp.mpf(p), v, prec)
    _monitor_noise(series.coeffs, prec, "delta")
    return LimitSeries(kind="Delta", p=float(p), coeffs=series.coeffs[:])


def kappa_z(p, prec: int = DEFAULT_PRECISION_BITS):
    """3/2-coefficient of the partition function's singular expansion.

    kappa(p) = 2 sqrt(2) (3p - 3 + 2 sqrt(3)) / (3p); validated against the
    exact series by Puiseux fitting and by the coefficient asymptotics.
    """
    with mp.workprec(prec):
        p = mp.mpf(p)
        return 2 * mp.sqrt(2) * (3 * p - 3 + 2 * mp.sqrt(3)) / (3 * p)


def theta_series(p, K: int, prec: int | None = None) -> LimitSeries:
    """theta_k(p), k = 0..K, from the corrected boundary-series transform

        Theta(p, y) = (1-p) kappa(1-p)/kappa(p) * Delta(1-p, 1-1/y) / (y-1).

    The composed argument V(1-p applied at 1-1/y) is V(p, U_c, y), so the
    whole expression is a formal y-series; 1/(y-1) = -(1 + y + ...) turns
    into negated prefix sums.  The kappa ratio and the 1/(y-1) (rather than
    1/y) factor are forced by the exact coefficient-ratio limits; see the
    calibration tests.
    """
    if prec is None:
        prec = max(DEFAULT_PRECISION_BITS, 8 + 2 * K)
    cst = constants(prec)
    with mp.workprec(prec):
        pm = mp.mpf(p)
        qm = 1 - pm
        v = v_series_numeric(pm, cst.Uc, K, prec)
        inner = dhat_series(qm, v, prec)
        run = mp.mpf(0)
        coeffs = []
        for c in inner.coeffs:
            run += c
            coeffs.append(-run)
        scale = qm * kappa_z(qm, prec) / kappa_z(pm, prec)
        coeffs = [scale * c for c in coeffs]
    _monitor_noise(coeffs, prec, "theta")
    return LimitSeries(kind="Theta", p=float(p), coeffs=coeffs[:K + 1])


def _monitor_noise(coeffs, prec, label):
    # The solver works at `prec` bits; if consecutive high-order
    # coefficients stop behaving geometrically the truncation is beyond
    # the stable range.
    tail = [abs(c) for c in coeffs[-6:] if c != 0]
    if len(tail) >= 3:
        growth = [tail[i + 1] / tail[i] for i in range(len(tail) - 1)]
        if max(growth) > mp.mpf(2) ** 40 * (1 + min(growth)):
            raise NumericalError(f"{label} series coefficients look like noise; "
                                 f"increase precision")


def delta_eval(p, z, prec: int = DEFAULT_PRECISION_BITS):
    """Delta(p, z) pointwise: Dhat(p, V(1-p, U_c, 1/(1-z))).

    Requires 1/(1-z) inside the analyticity slit of the bias-(1-p) branch.
    """
    cst = constants(prec)
    with mp.workprec(prec + 16):
        z = mp.mpf(z)
        q = 1 - mp.mpf(p)
        y = 1 / (1 - z)
        ym, yp = singularities_y(q, cst.tc3, prec)
        if not (ym < y < yp):
            raise RangeError(f"1/(1-z) = {mp.nstr(y)} outside the (y_-, y_+) slit")
        v = invert_y(q, cst.Uc, y, prec)
        return dhat(mp.mpf(p), v, prec)


class DeltaEvaluator:
    """Cached pointwise evaluator of z -> Delta(p, z).

    Precomputes the bias-(1-p) branch data once and inverts hat_y by
    warm-started Newton; quadratures call this densely.
    """

    def __init__(self, p, prec: int = DEFAULT_PRECISION_BITS):
        self.prec = prec
        cst = constants(prec)
        with mp.workprec(prec):
            self.p = mp.mpf(p)
            self.q = 1 - self.p
            self.uc = cst.Uc
            vm, vp, _, _ = stationary_points(self.q, self.uc, prec)
            self.v_minus, self.v_plus = vm, vp
            self.y_minus = hat_y(self.q, self.uc, vm)
            self.y_plus = hat_y(self.q, self.uc, vp)
            self._last_v = mp.mpf(0)

    def value(self, z):
        with mp.workprec(self.prec):
            z = mp.mpf(z)
            y = 1 / (1 - z)
            if not (self.y_minus < y < self.y_plus):
                raise RangeError(f"Delta argument z = {mp.nstr(z)} outside the slit")
            q, u = self.q, self.uc
            v = self._last_v
            tol = mp.mpf(2) ** (-self.prec + 8)
            ok = False
            for _ in range(60):
                f = hat_y(q, u, v) - y
                if abs(f) <= tol * (1 + abs(y)):
                    ok = True
                    break
                d = hat_y_dv(q, u, v)
                vn = v - f / d
                if not (self.v_minus < vn < self.v_plus):
                    break
                v = vn
            if not ok:
                lo, hi = (mp.mpf(0), self.v_plus) if y >= 0 else (self.v_minus, mp.mpf(0))
                for _ in range(self.prec + 16):
                    mid = (lo + hi) / 2
                    if hat_y(q, u, mid) < y:
                        lo = mid
                    else:
                        hi = mid
                v = (lo + hi) / 2
            self._last_v = v
            return dhat(self.p, v, self.prec)


def derived_expansions(prec: int = DEFAULT_PRECISION_BITS):
    """Fitted vs derived coefficients of the four critical expansions.

    Each entry: (name, exponent, fitted, derived).  Derived values come
    from the certified parametrization chain (series reversion through the
    cubic branch point), not from transcribed decimals:

      boundary series at its radius 2:    sqrt3/2, -3^(5/6)/2, sqrt3/2, +3^(1/6)
      weight series at its radius 1/2:    2 sqrt3, -2 3^(5/6), 0, 4 3^(1/6)
      Delta at 1/2: C (1-2z)^(-4/3) with  C = 8 3^(5/6)/351 + 2 3^(1/3)/117
      Theta at 2:   (C/2) (1-y/2)^(-4/3)

    The Theta amplitude is half (not a quarter) of Delta's: the corrected
    transform carries 1/(y-1), not 1/y, which is invisible at the
    singularity location but fixes the finite-k coefficients.
    """
    cst = constants(prec)
    out = []
    with mp.workprec(prec):
        s3 = cst.sqrt3
        uc = cst.Uc
        c_delta = 8 * mp.power(3, mp.mpf(5) / 6) / 351 + 2 * mp.power(3, mp.mpf(1) / 3) / 117

        def t_crit(y):
            v = invert_y(mp.mpf(1) / 2, uc, y, prec)
            from .parametrization import hat_T
            return hat_T(mp.mpf(1) / 2, uc, v)

        # Subtract the exactly-known constant term before fitting so the
        # subleading columns are well conditioned.
        t_const = s3 / 2
        fit_t = puiseux_fit(lambda y: t_crit(y) - t_const, mp.mpf(2),
                            [Fraction(2, 3), Fraction(1), Fraction(4, 3),
                             Fraction(5, 3), Fraction(2), Fraction(7, 3)],
                            prec=prec, ladder=(1e-4, 1e-12, 44))
        derived_t = [-mp.power(3, mp.mpf(5) / 6) / 2, s3 / 2,
                     mp.power(3, mp.mpf(1) / 6)]
        out.append(("boundary_series", Fraction(0), t_const, t_const))
        for (alpha, c), d in zip(fit_t.terms[:3], derived_t):
            out.append(("boundary_series", alpha, c, d))

        def tf_crit(z):
            y = 1 / (1 - z)
            return 2 * y * t_crit(y)

        f_const = 2 * s3
        fit_f = puiseux_fit(lambda z: tf_crit(z) - f_const, mp.mpf(1) / 2,
                            [Fraction(2, 3), Fraction(1), Fraction(4, 3),
                             Fraction(5, 3), Fraction(2), Fraction(7, 3)],
                            prec=prec, ladder=(1e-4, 1e-12, 44))
        derived_f = [-2 * mp.power(3, mp.mpf(5) / 6), mp.mpf(0),
                     4 * mp.power(3, mp.mpf(1) / 6)]
        out.append(("weight_series", Fraction(0), f_const, f_const))
        for (alpha, c), d in zip(fit_f.terms[:3], derived_f):
            out.append(("weight_series", alpha, c, d))

        de = DeltaEvaluator(mp.mpf(1) / 2, prec)
        fit_d = puiseux_fit(lambda z: de.value(z), mp.mpf(1) / 2,
                            [Fraction(-4, 3), Fraction(-1), Fraction(-2, 3)],
                            prec=prec, ladder=(1e-4, 1e-8, 24))
        out.append(("delta_series", Fraction(-4, 3), fit_d.terms[0][1], c_delta))

        def theta_val(y):
            z = 1 - 1 / y
            return de.value(z) / (2 * (y - 1))

        fit_th = puiseux_fit(lambda y: theta_val(y), mp.mpf(2),
                             [Fraction(-4, 3), Fraction(-1), Fraction(-2, 3)],
                             prec=prec, ladder=(1e-4, 1e-8, 24))
        out.append(("theta_series", Fraction(-4, 3), fit_th.terms[0][1], c_delta / 2))
    return out
