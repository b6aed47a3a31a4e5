"""Headline observables: percolation probability, perimeter and volume laws.

Two independent routes compute the probability that the root cluster is
infinite:

* `prob_infinite_closed`: the trigonometric closed form (zero below the
  threshold 1/2 by the indicator);
* `prob_finite_integral`: quadrature.  The production path integrates the
  fully substituted rational form over [V^i_+, V^i_-] (no root-finding in
  the integrand); the verification path integrates the weight-ratio limit
  series against the cylinder kernel over the one-cut support.

The perimeter law combines the four limit/critical series

    P(perimeter = k) = (delta_k t_c^k T_k + qt_k theta_k) / p

and the volume law integrates the limit series against the g-deformed
cylinder kernel, with endpoints from the admissibility system.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .bdfg import BdfgEvaluator
from .config import DEFAULT_PRECISION_BITS
from .gfseries import t_series_numeric, v_series_numeric
from .parametrization import (
    RangeError,
    constants,
    critical_trig_roots,
    c_constants,
    hat_y,
    invert_y,
    negative_pole_threshold,
    singularities_y,
)
from .singular import (DeltaEvaluator, delta_eval, delta_series, dhat, kappa_z,
                       theta_series, vc_series)


class ConsistencyError(ArithmeticError):
    """Two independent computation paths disagree beyond tolerance."""


def prob_infinite_closed(p, prec: int = DEFAULT_PRECISION_BITS):
    """Probability that the root cluster is infinite (closed form).

    Zero for p < 1/2; at p >= 1/2,

      2 [ sqrt(2p-1) (sqrt3 - cos^3 w) cos(w)^{3/2} + p (2p-1) ]
        / [ p (2 sqrt3 - 3(1-p)) ],   w = (2/3) arccos sqrt(p),

    with the arccos argument clamped against rounding at p = 1.
    """
    with mp.workprec(prec):
        p = mp.mpf(p)
        if p < 0 or p > 1:
            raise RangeError("p must lie in [0, 1]")
        if p <= mp.mpf(1) / 2:
            return mp.mpf(0)
        sq = mp.sqrt(p)
        sq = min(sq, mp.mpf(1))
        w = mp.acos(sq) * 2 / 3
        c = mp.cos(w)
        s3 = mp.sqrt(3)
        num = (mp.sqrt(2 * p - 1) * (s3 - c ** 3) * mp.power(c, mp.mpf(3) / 2)
               + p * (2 * p - 1))
        val = 2 * num / (p * (2 * s3 - 3 * (1 - p)))
        if val > 1:
            if val <= 1 + mp.mpf(2) ** (-prec + 8):
                return mp.mpf(1)
        return val


def _cos_nodes(n):
    """Midpoint nodes of [0, pi] (the cosine substitution's angle grid)."""
    return [mp.pi * (mp.mpf(2 * i + 1) / (2 * n)) for i in range(n)]


def prob_finite_integral(p, prec: int = DEFAULT_PRECISION_BITS,
                         quad_tol: float = 1e-10, verify: bool = False):
    """P(|cluster| < infinity) by the substituted real integral.

    For p in the trig-root regime, with V_pm the critical stationary points
    and V^i_pm the transformed cut endpoints:

      1/(12 p x_c (2 sqrt3 - 3(1-p)) pi) * Integral over [V^i_+, V^i_-] of
        sqrt((V^i_- - V)(V - V^i_+))
        * (V - V_+)(V - V_-) / (V (2 sqrt3/3 - V)(V - sqrt3/3)^2)
        * (1/hat_y(p, U_c, V) + (1/y_+ + 1/y_-)/2) dV.

    The cosine substitution V = m + r cos(phi) turns the square-root factor
    into r sin(phi) and the p = 1/2 endpoint kink into a smooth function;
    the trapezoid rule in phi then converges spectrally.  With
    verify=True the cylinder-kernel integral over the one-cut support is
    evaluated as well and the two must agree to 1e-6.
    """
    cst = constants(prec)
    with mp.workprec(prec):
        p = mp.mpf(p)
        if not (negative_pole_threshold(prec) < p < 1):
            raise RangeError("integral route needs the trig-root regime, p < 1")
        roots = critical_trig_roots(p, prec)
        uc = cst.Uc
        s3 = cst.sqrt3
        y_plus = hat_y(p, uc, roots.V_plus)
        y_minus = hat_y(p, uc, roots.V_m)
        vi_lo, vi_hi = roots.V_i_plus, roots.V_i_minus
        m = (vi_lo + vi_hi) / 2
        r = (vi_hi - vi_lo) / 2
        pref = 1 / (12 * p * cst.tc3 * (2 * s3 - 3 * (1 - p)) * mp.pi)
        half_sum = (1 / y_plus + 1 / y_minus) / 2

        def g(v):
            return ((v - roots.V_plus) * (v - roots.V_m)
                    / (v * (2 * s3 / 3 - v) * (v - s3 / 3) ** 2)
                    * (1 / hat_y(p, uc, v) + half_sum))

        def kernel_smooth(phi):
            v = m + r * mp.cos(phi)
            sin = mp.sin(phi)
            if p == mp.mpf(1) / 2:
                # (V - sqrt3/3)^2 has a double root at the lower endpoint;
                # one power cancels against the vanishing square root.
                pass
            return sin * sin * g(v)

        val = _trapezoid_doubling(kernel_smooth, quad_tol, prec)
        result = pref * r * r * val * mp.pi
        if verify:
            other = _prob_finite_cut_integral(p, prec, quad_tol)
            if abs(result - other) > 1e-6:
                raise ConsistencyError(
                    f"probability paths disagree: {mp.nstr(result, 12)} vs "
                    f"{mp.nstr(other, 12)}")
        return result


def _trapezoid_doubling(f, tol, prec, n0=32, n_max=1 << 14):
    """Midpoint rule on [0, pi] with doubling until successive agreement."""
    with mp.workprec(prec):
        prev = None
        n = n0
        while n <= n_max:
            total = mp.mpf(0)
            for phi in _cos_nodes(n):
                total += f(phi)
            val = total / n
            if prev is not None and abs(val - prev) <= tol * (1 + abs(val)):
                return val
            prev = val
            n *= 2
        return prev


def _prob_finite_cut_integral(p, prec, quad_tol):
    """Verification path: limit series against the cylinder kernel.

    (1/2pi) Integral over the cut [c_-, c_+] of
      Delta(p, sqrt(p x_c) z) (z + (c_+ + c_-)/2)
      sqrt((c_+ - z)(z - c_-)) dz / z,
    cosine-substituted; Delta(p, w)/w is continued through w = 0 with the
    series head.
    """
    cst = constants(prec)
    with mp.workprec(prec):
        p = mp.mpf(p)
        c_minus, c_plus = c_constants(p, cst.tc3, prec)
        mmid = (c_plus + c_minus) / 2
        r = (c_plus - c_minus) / 2
        root = mp.sqrt(p * cst.tc3)
        head = delta_series(p, 24, prec=max(prec, 96))

        def delta_over_w(w):
            if abs(w) < mp.mpf("0.05"):
                acc = mp.mpf(0)
                for k in range(1, len(head.coeffs)):
                    acc += head.coeffs[k] * mp.power(w, k - 1)
                return acc
            return delta_eval(p, w, prec) / w

        def f(phi):
            z = mmid + r * mp.cos(phi)
            sin = mp.sin(phi)
            w = root * z
            return sin * sin * delta_over_w(w) * (z + mmid) * root

        val = _trapezoid_doubling(f, quad_tol, prec, n0=64)
        return r * r * val / 2


@dataclass
class ExponentFit:
    exponent: float
    amplitude: float
    window: tuple
    residual: float


def beta_fit(prec: int = DEFAULT_PRECISION_BITS,
             window=(1e-8, 1e-4), points: int = 9) -> ExponentFit:
    """Threshold exponent and amplitude of the closed-form probability.

    The exponent comes from a log-log fit over p - 1/2 in `window`; the
    amplitude from a refined fit of P/sqrt(h) against {1, sqrt(h), h}
    (the plain log-log intercept is biased by the sqrt(h) correction).
    """
    with mp.workprec(prec):
        lo, hi = mp.mpf(window[0]), mp.mpf(window[1])
        hs = [lo * mp.power(hi / lo, mp.mpf(i) / (points - 1)) for i in range(points)]
        ps = [prob_infinite_closed(mp.mpf(1) / 2 + h, prec) for h in hs]
        xs = [mp.log(h) for h in hs]
        ys = [mp.log(v) for v in ps]
        n = len(xs)
        sx = sum(xs); sy = sum(ys)
        sxx = sum(x * x for x in xs); sxy = sum(x * y for x, y in zip(xs, ys))
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
        intercept = (sy - slope * sx) / n
        resid = max(abs(y - (slope * x + intercept)) for x, y in zip(xs, ys))
        rows = [[mp.mpf(1), mp.sqrt(h), h] for h in hs]
        rhs = [v / mp.sqrt(h) for h, v in zip(hs, ps)]
        amp = _lsq3(rows, rhs)[0]
        return ExponentFit(exponent=float(slope), amplitude=float(amp),
                           window=(float(lo), float(hi)), residual=float(resid))


def beta_amplitude_closed(prec: int = DEFAULT_PRECISION_BITS):
    """Amplitude of sqrt(p - 1/2) in the threshold expansion:
    3^(1/4) (15/26) (1 + 4 sqrt(3)/3)."""
    with mp.workprec(prec):
        return (mp.power(3, mp.mpf(1) / 4) * mp.mpf(15) / 26
                * (1 + 4 * mp.sqrt(3) / 3))


# -- perimeter law ------------------------------------------------------------


class PerimeterLaw:
    """P(|V(boundary of cluster)| = k) at (p, t_c) for k = 1..K.

    Combines delta_k, theta_k (limit series) with the critical values
    t_c^k T_k and qt_k; the latter reuses the same V_c branch series as the
    delta series.
    """

    def __init__(self, p, K: int, prec: int | None = None):
        if prec is None:
            prec = max(DEFAULT_PRECISION_BITS, 16 + 2 * K)
        self.prec = prec
        self.K = K
        cst = constants(prec)
        with mp.workprec(prec):
            self.p = mp.mpf(p)
            q = 1 - self.p
            self.delta = delta_series(self.p, K, prec=prec)
            self.theta = theta_series(self.p, K, prec=prec)
            # t_c^k T_k: y-coefficients of the boundary series at bias p
            tser = t_series_numeric(self.p, cst.Uc, K, prec)
            self.tkTk = tser.coeffs[:]
            # qt_k at t_c: N(V_c)/(8 p x_c) coefficients in z, plus the bare
            # triangle 1/(p x_c) at k = 3
            v = vc_series(self.p, K + 1, prec)
            uc = cst.Uc
            num = (v * (2 - 4 * uc) - v * v) * 2
            self.qt = [mp.mpf(0)] * (K + 1)
            for k in range(1, K + 1):
                self.qt[k] = num.coeffs[k - 1] / (8 * self.p * cst.tc3)
            if K >= 3:
                self.qt[3] += 1 / (self.p * cst.tc3)

    def pmf(self, k: int):
        if not (1 <= k <= self.K):
            raise RangeError(f"k = {k} beyond the computed range")
        with mp.workprec(self.prec):
            return (self.delta.coeffs[k] * self.tkTk[k]
                    + self.qt[k] * self.theta.coeffs[k]) / self.p

    def pmf_table(self):
        return [self.pmf(k) for k in range(1, self.K + 1)]

    def total(self):
        with mp.workprec(self.prec):
            return sum(self.pmf_table())


def perimeter_pmf(p, k: int, prec: int | None = None):
    return PerimeterLaw(p, k, prec=prec).pmf(k)


def kappa_prime_extrapolated(K: int = 400, prec: int | None = None,
                             law: PerimeterLaw | None = None):
    """Richardson-extrapolated limit of k^{4/3} P(perimeter = k) at p = 1/2.

    The scaled pmf behaves like kappa' (1 + a/k^{1/3} + ...); fitting
    against {1, k^{-1/3}, k^{-2/3}} on the top of the k-range extrapolates
    the slowly-converging tail.  Two half-windows must agree.
    """
    if law is None:
        law = PerimeterLaw(mp.mpf(1) / 2, K, prec=prec)
    with mp.workprec(law.prec):
        ks = list(range(K // 2, K + 1, max(1, K // 40)))
        rows = []
        rhs = []
        for k in ks:
            scaled = mp.power(k, mp.mpf(4) / 3) * law.pmf(k)
            rows.append([mp.mpf(1), mp.power(k, -mp.mpf(1) / 3),
                         mp.power(k, -mp.mpf(2) / 3)])
            rhs.append(scaled)
        full = _lsq3(rows, rhs)
        half = _lsq3(rows[len(rows) // 2:], rhs[len(rows) // 2:])
        return full[0], abs(full[0] - half[0])


def _lsq3(rows, rhs):
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


def kappa_prime_closed(prec: int = DEFAULT_PRECISION_BITS):
    """The stated closed form of the perimeter constant,
    -8 (1/Gamma(4/3)) (8 3^(5/6)/351 + 2 3^(1/3)/117) 3^(5/6)/(2 Gamma(-2/3))."""
    with mp.workprec(prec):
        c = 8 * mp.power(3, mp.mpf(5) / 6) / 351 + 2 * mp.power(3, mp.mpf(1) / 3) / 117
        return (-8 / mp.gamma(mp.mpf(4) / 3) * c
                * mp.power(3, mp.mpf(5) / 6) / (2 * mp.gamma(-mp.mpf(2) / 3)))


# -- volume law ---------------------------------------------------------------


class VolumeLaw:
    """E[g^{|V(cluster)|}] at p = 1/2 via the deformed cylinder integral."""

    def __init__(self, p=0.5, prec: int = 160, quad_dps: int = 25,
                 delta_terms: int = 48):
        self.prec = prec
        cst = constants(prec)
        with mp.workprec(prec):
            self.p = mp.mpf(p)
            self.cst = cst
            self.ev = BdfgEvaluator(self.p, cst.tc3, prec=prec, quad_dps=quad_dps)
            self.head = delta_series(self.p, delta_terms, prec=max(prec, 128))
            self.delta = DeltaEvaluator(self.p, prec)
        self._states = {}

    def state(self, g):
        """Admissibility state at g, via continuation in 1-g from the
        exactly-known critical endpoint (small steps keep Newton in its
        basin despite the 7/6-singular behavior near g = 1)."""
        key = float(g)
        if key in self._states:
            return self._states[key]
        with mp.workprec(self.prec):
            eps_target = 1 - mp.mpf(g)
            solved = [k for k in self._states if k > key]
            if solved:
                start_g = min(solved)
                start = self._states[start_g]
                eps0 = 1 - mp.mpf(start_g)
                seed = (start.z_plus, start.z_diamond)
            else:
                eps0 = min(eps_target, mp.mpf("1e-6"))
                seed = None
            eps = eps0
            while True:
                gj = 1 - eps
                st = self.ev.solve(gj, start=seed)
                self._states[float(gj)] = st
                seed = (st.z_plus, st.z_diamond)
                if eps >= eps_target:
                    break
                eps = min(eps * 4, eps_target)
            self._states[key] = st
        return self._states[key]

    def _delta_over_w(self, w):
        with mp.workprec(self.prec):
            if abs(w) < mp.mpf("0.05"):
                acc = mp.mpf(0)
                for k in range(1, len(self.head.coeffs)):
                    acc += self.head.coeffs[k] * mp.power(w, k - 1)
                return acc
            return self.delta.value(w) / w

    def value(self, g, quad_tol: float = 1e-10):
        """The deformed-kernel integral for E[g^{|V|}]."""
        with mp.workprec(self.prec):
            g = mp.mpf(g)
            st = self.state(g)
            c_minus, c_plus = st.c_minus, st.c_plus
            mmid = (c_plus + c_minus) / 2
            r = (c_plus - c_minus) / 2
            root = mp.sqrt(g * self.p * self.cst.tc3)

            def f(phi):
                z = mmid + r * mp.cos(phi)
                sin = mp.sin(phi)
                return sin * sin * self._delta_over_w(root * z) * (z + mmid) * root

            val = _trapezoid_doubling(f, quad_tol, self.prec, n0=64)
            return g * r * r * val / 2

    def tail_series_value(self, g):
        """(1 - g E[g^V]) / (1 - g): the tail-probability generating value."""
        with mp.workprec(self.prec):
            g = mp.mpf(g)
            return (1 - g * self.value(g)) / (1 - g)


def volume_tail_fit(law: VolumeLaw | None = None,
                    ladder=(1e-6, 1e-2, 9)) -> tuple[ExponentFit, object]:
    """Fit (1 - g E[g^V])/(1-g) ~ kappa_1 (1-g)^{-6/7} on a g-ladder.

    The log-log slope gives the exponent; the amplitude is then refined
    against the first correction order, S eps^{6/7} = kappa_1 (1 + c eps^{1/7}),
    because eps^{1/7} decays far too slowly to ignore.  Returns the fit and
    kappa = kappa_1 / Gamma(8/7).
    """
    if law is None:
        law = VolumeLaw()
    with mp.workprec(law.prec):
        lo, hi, n = mp.mpf(ladder[0]), mp.mpf(ladder[1]), ladder[2]
        eps = [lo * mp.power(hi / lo, mp.mpf(i) / (n - 1)) for i in range(n)]
        svals = [law.tail_series_value(1 - e) for e in eps]
        xs = [mp.log(e) for e in eps]
        ys = [mp.log(s) for s in svals]
        m = len(xs)
        sx = sum(xs); sy = sum(ys)
        sxx = sum(x * x for x in xs); sxy = sum(x * y for x, y in zip(xs, ys))
        slope = (m * sxy - sx * sy) / (m * sxx - sx * sx)
        intercept = (sy - slope * sx) / m
        resid = max(abs(y - (slope * x + intercept)) for x, y in zip(xs, ys))
        # amplitude refinement at the known exponent; the corrections are
        # a full 1/7-power ladder, so three terms are kept
        rows = [[mp.mpf(1), mp.power(e, mp.mpf(1) / 7), mp.power(e, mp.mpf(2) / 7)]
                for e in eps]
        rhs = [s * mp.power(e, mp.mpf(6) / 7) for e, s in zip(eps, svals)]
        ata = mp.zeros(3, 3)
        atb = mp.zeros(3, 1)
        for row, b in zip(rows, rhs):
            for i in range(3):
                for j in range(3):
                    ata[i, j] += row[i] * row[j]
                atb[i] += row[i] * b
        sol = mp.lu_solve(ata, atb)
        kappa1 = sol[0]
        kappa = kappa1 / mp.gamma(mp.mpf(8) / 7)
        fit = ExponentFit(exponent=float(-slope), amplitude=float(kappa1),
                          window=(float(lo), float(hi)), residual=float(resid))
        return fit, kappa


def kappa_volume_closed(prec: int = DEFAULT_PRECISION_BITS):
    """The stated closed form of the volume-tail constant (~ 0.278)."""
    with mp.workprec(prec):
        t3 = mp.mpf(1) / 3
        num = (63 * (mp.power(3, t3) + 4 * mp.power(3, mp.mpf(5) / 6) / 3)
               * mp.power(3, mp.mpf(17) / 21) * mp.power(7, mp.mpf(1) / 7)
               * mp.power(137, mp.mpf(6) / 7)
               * mp.power(mp.gamma(mp.mpf(2) / 3), mp.mpf(18) / 7)
               * mp.power(2, mp.mpf(3) / 14) * mp.power(5, mp.mpf(13) / 14))
        den = 56992 * mp.power(mp.pi, mp.mpf(12) / 7) * mp.gamma(mp.mpf(1) / 7)
        return num / den
