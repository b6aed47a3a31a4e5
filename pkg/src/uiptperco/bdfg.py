"""Bijection-side generating functions and the admissibility system.

The volume analysis needs the two bivariate series f_bullet, f_diamond
attached to the mobile bijection for Boltzmann maps.  They admit integral
representations against the boundary series with bias 1-p,

    f_d(z1, z2) = sqrt(p x) (2 z2 + z1^2)
                  + sqrt(x/p) (1/pi) I[ T(1-p, t, t z) ],
    f_b(z1, z2) = sqrt(p x) 2 z2
                  + (1/(2 p z1)) (1/pi) I[ (1 - sqrt(p x) z2 - 1/z) T(...) ],

where I[...] integrates over z in [z_lo, z_hi] against the Beta kernel
( (1 - z/z_hi)(z/z_lo - 1) )^{-1/2}, z_lo/hi = (1 -+ sqrt(p x)(z2 -+ 2
sqrt(z1)))^{-1}.  (The scalar normalization sqrt(z_lo z_hi) ambiguity
between the two printed forms is resolved by the fixed-point conditions at
criticality; see the tests.)  Quadrature is tanh-sinh, which absorbs both
inverse-square-root endpoints and the additional (1 - z/y_+)^{2/3} kink
that appears exactly at the critical weight.

The g-deformed admissibility system

    f_b(z+, zd) = 1 - g/z+,   f_d(z+, zd) = zd

is solved by damped Newton with finite-difference Jacobians, continued in
g from the exactly-known g = 1 endpoint  zd = (c_+ + c_-)/2,
sqrt(z+) = (c_+ - c_-)/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .config import DEFAULT_PRECISION_BITS
from .parametrization import (
    NumericalError,
    RangeError,
    c_constants,
    constants,
    eval_U,
    hat_T,
    hat_y,
    hat_y_dv,
    singularities_y,
    stationary_points,
)


class TBoundary:
    """Fast evaluator of y -> T(q, t, t y) on the real slit (y_-, y_+).

    Caches the branch data at (q, t) and inverts hat_y by warm-started
    Newton (falling back to bisection), since quadrature calls it densely.
    """

    def __init__(self, q, t3, prec: int = DEFAULT_PRECISION_BITS):
        self.prec = prec
        with mp.workprec(prec):
            self.q = mp.mpf(q)
            self.t3 = mp.mpf(t3)
            self.u = eval_U(t3, prec)
            vm, vp, _, _ = stationary_points(self.q, self.u, prec)
            self.v_minus, self.v_plus = vm, vp
            self.y_minus = hat_y(self.q, self.u, vm)
            self.y_plus = hat_y(self.q, self.u, vp)
            self._last_v = mp.mpf(0)

    def invert(self, y):
        with mp.workprec(self.prec):
            y = mp.mpf(y)
            if not (self.y_minus <= y <= self.y_plus):
                raise RangeError(f"y = {mp.nstr(y)} outside the branch range")
            q, u = self.q, self.u
            v = self._last_v
            tol = mp.mpf(2) ** (-self.prec + 8)
            for _ in range(80):
                f = hat_y(q, u, v) - y
                if abs(f) <= tol * (1 + abs(y)):
                    self._last_v = v
                    return v
                d = hat_y_dv(q, u, v)
                step = f / d
                vn = v - step
                if not (self.v_minus <= vn <= self.v_plus):
                    break
                v = vn
            # bisection fallback on the monotone branch
            lo, hi = (mp.mpf(0), self.v_plus) if y >= 0 else (self.v_minus, mp.mpf(0))
            for _ in range(self.prec + 20):
                mid = (lo + hi) / 2
                if hat_y(q, u, mid) < y:
                    lo = mid
                else:
                    hi = mid
            self._last_v = (lo + hi) / 2
            return self._last_v

    def value(self, y):
        with mp.workprec(self.prec):
            v = self.invert(y)
            return hat_T(self.q, self.u, v)


@dataclass
class BdfgState:
    p: float
    t3: float
    g: float
    z_plus: mp.mpf
    z_diamond: mp.mpf
    c_minus: mp.mpf
    c_plus: mp.mpf
    residuals: tuple


class BdfgEvaluator:
    """f_bullet / f_diamond at fixed (p, t) with shared boundary data."""

    def __init__(self, p, t3, prec: int = 220, quad_dps: int | None = None):
        self.prec = prec
        with mp.workprec(prec):
            self.p = mp.mpf(p)
            self.t3 = mp.mpf(t3)
            self.sqrt_px = mp.sqrt(self.p * self.t3)
            self.boundary = TBoundary(1 - self.p, self.t3, prec)
        self.quad_dps = quad_dps if quad_dps is not None else max(20, prec // 8)

    def _bounds(self, z1, z2):
        lo = 1 / (1 - self.sqrt_px * (z2 - 2 * mp.sqrt(z1)))
        hi = 1 / (1 - self.sqrt_px * (z2 + 2 * mp.sqrt(z1)))
        if not (0 < lo <= hi):
            raise RangeError("integration endpoints collapsed or inverted")
        if hi > self.boundary.y_plus * (1 + mp.mpf(2) ** (-self.prec + 12)):
            raise RangeError("upper endpoint beyond the boundary singularity")
        return lo, min(hi, self.boundary.y_plus)

    def _beta_integral(self, z1, z2, weight):
        """(1/pi) Integral of weight(z) T(1-p, t, tz) against the Beta kernel.

        Computed in the parametrizing variable: z = hat_y(V) turns T into
        the rational hat_T(V) (no root-finding per node) and absorbs the
        critical 2/3-endpoint kink into a plain square-root vanishing.
        """
        with mp.workprec(self.prec):
            lo, hi = self._bounds(z1, z2)
            tb = self.boundary
            scale = mp.sqrt(lo * hi)
            v_lo = tb.invert(lo)
            v_hi = tb.invert(hi)
            q, u = tb.q, tb.u

            def integrand(v):
                z = hat_y(q, u, v)
                a = hi - z
                b = z - lo
                if a <= 0 or b <= 0:
                    return mp.mpf(0)
                return (weight(z) * hat_T(q, u, v) * hat_y_dv(q, u, v)
                        / mp.sqrt(a * b))

            old_dps = mp.mp.dps
            try:
                mp.mp.dps = self.quad_dps
                val = mp.quad(integrand, [v_lo, v_hi], method="tanh-sinh")
            finally:
                mp.mp.dps = old_dps
            return val / mp.pi, scale

    def f_diamond(self, z1, z2):
        """Polynomial part sqrt(px)(2 z1 + z2^2): the bare triangle enters at
        q_3 = q_{1+2k+k'} via (k,k') = (1,0) and (0,2); the Beta integral
        carries the sqrt(z_lo z_hi) factor forced by the Hadamard contour.
        Both pinned against the defining double sums in the tests."""
        with mp.workprec(self.prec):
            z1 = mp.mpf(z1)
            z2 = mp.mpf(z2)
            integral, scale = self._beta_integral(z1, z2, lambda z: mp.mpf(1))
            return (self.sqrt_px * (2 * z1 + z2 * z2)
                    + mp.sqrt(self.t3 / self.p) * integral * scale)

    def f_bullet(self, z1, z2):
        with mp.workprec(self.prec):
            z1 = mp.mpf(z1)
            z2 = mp.mpf(z2)
            w = lambda z: (1 - self.sqrt_px * z2 - 1 / z)
            integral, scale = self._beta_integral(z1, z2, w)
            return self.sqrt_px * 2 * z2 + integral * scale / (2 * self.p * z1)

    # -- admissibility system -------------------------------------------------

    def system_residual(self, z1, z2, g):
        fb = self.f_bullet(z1, z2)
        fd = self.f_diamond(z1, z2)
        with mp.workprec(self.prec):
            return fb - (1 - mp.mpf(g) / z1), fd - z2

    def solve(self, g, start=None, max_iter=40, tol=None) -> BdfgState:
        """Damped Newton on the two-equation system at fixed g."""
        with mp.workprec(self.prec):
            g = mp.mpf(g)
            if tol is None:
                # quadrature noise floor caps what Newton can resolve
                tol = mp.mpf(10) ** (-(self.quad_dps - 14))
            stall_tol = mp.mpf("1e-8")
            if start is None:
                c_minus, c_plus = c_constants(self.p, self.t3, self.prec)
                z2 = (c_plus + c_minus) / 2
                z1 = ((c_plus - c_minus) / 4) ** 2
            else:
                z1, z2 = mp.mpf(start[0]), mp.mpf(start[1])
            r1, r2 = self.system_residual(z1, z2, g)
            for _ in range(max_iter):
                norm = abs(r1) + abs(r2)
                if norm <= tol:
                    break
                # backward differences: the solution can sit exactly on the
                # domain edge (g = 1 criticality), so only inward steps are
                # guaranteed evaluable
                h1 = max(abs(z1), mp.mpf(1)) * mp.mpf(10) ** (-self.quad_dps // 2)
                h2 = max(abs(z2), mp.mpf(1)) * mp.mpf(10) ** (-self.quad_dps // 2)
                a1, a2 = self.system_residual(z1 - h1, z2, g)
                b1, b2 = self.system_residual(z1, z2 - h2, g)
                j11 = (r1 - a1) / h1
                j12 = (r1 - b1) / h2
                j21 = (r2 - a2) / h1
                j22 = (r2 - b2) / h2
                det = j11 * j22 - j12 * j21
                if det == 0:
                    raise NumericalError("singular Jacobian in admissibility solve")
                d1 = (r1 * j22 - r2 * j12) / det
                d2 = (j11 * r2 - j21 * r1) / det
                lam = mp.mpf(1)
                while lam > mp.mpf(2) ** -20:
                    n1, n2 = z1 - lam * d1, z2 - lam * d2
                    try:
                        s1, s2 = self.system_residual(n1, n2, g)
                    except (RangeError, ValueError):
                        lam /= 2
                        continue
                    if abs(s1) + abs(s2) < norm:
                        z1, z2, r1, r2 = n1, n2, s1, s2
                        break
                    lam /= 2
                else:
                    if norm <= stall_tol:
                        break  # stuck at the quadrature noise floor: accept
                    raise NumericalError("Newton damping failed to reduce residual")
            c_plus = (z2 + 2 * mp.sqrt(z1)) / g
            c_minus = (z2 - 2 * mp.sqrt(z1)) / g
            return BdfgState(p=float(self.p), t3=float(self.t3), g=float(g),
                             z_plus=z1, z_diamond=z2,
                             c_minus=c_minus, c_plus=c_plus,
                             residuals=(r1, r2))

    def continuation(self, g_ladder, start=None):
        """States along a decreasing g ladder, reusing previous solutions."""
        out = []
        current = start
        for g in g_ladder:
            state = self.solve(g, start=current)
            out.append(state)
            current = (state.z_plus, state.z_diamond)
        return out

    def criticality_residual(self, z1=None, z2=None, h0=None, n_ladder=6):
        """| (d_z2 + sqrt(z1) d_z1) f_diamond - 1 | at the g = 1 solution.

        At criticality the solution sits exactly on the domain edge and the
        directional difference carries a 7/6-singular term of size h^{1/6}
        on top of the derivative, so one-sided quotients are fitted as
        a + b h^{1/6} + c h on a geometric inside-ladder and the constant
        term is reported.  (Subcritical points are smooth and the fit's
        b-term simply comes back negligible.)
        """
        with mp.workprec(self.prec):
            if z1 is None or z2 is None:
                c_minus, c_plus = c_constants(self.p, self.t3, self.prec)
                z2 = (c_plus + c_minus) / 2
                z1 = ((c_plus - c_minus) / 4) ** 2
            if h0 is None:
                h0 = mp.mpf("1e-5")
            sq = mp.sqrt(z1)
            f0 = self.f_diamond(z1, z2)
            rows = []
            rhs = []
            for j in range(n_ladder):
                h = h0 * mp.mpf(4) ** (-j)
                # directional step along (sqrt(z1), 1): quotient tends to
                # (sqrt(z1) d1 + d2) f_diamond
                val = (f0 - self.f_diamond(z1 - sq * h, z2 - h)) / h
                rows.append([mp.mpf(1), mp.power(h, mp.mpf(1) / 6), h])
                rhs.append(val)
            a = _fit3(rows, rhs)
            return abs(a - 1)


def _fit3(rows, rhs):
    """Least-squares for a tiny 3-column design matrix (normal equations)."""
    m = len(rows[0])
    ata = mp.zeros(m, m)
    atb = mp.zeros(m, 1)
    for row, b in zip(rows, rhs):
        for i in range(m):
            for j in range(m):
                ata[i, j] += row[i] * row[j]
            atb[i] += row[i] * b
    sol = mp.lu_solve(ata, atb)
    return sol[0]


def expansion_constants(prec: int = DEFAULT_PRECISION_BITS):
    """Closed forms of the 7/6-singular amplitudes of f_diamond / f_bullet.

    kappa_d = 4 * 2^(1/6) Gamma(2/3)^3 3^(2/3) sqrt(5) / (63 pi^2),
    kappa_b = (512 * 3^(1/4) sqrt(2) / 81) kappa_d.
    """
    with mp.workprec(prec):
        kd = (4 * mp.power(2, mp.mpf(1) / 6) * mp.gamma(mp.mpf(2) / 3) ** 3
              * mp.power(3, mp.mpf(2) / 3) * mp.sqrt(5)) / (63 * mp.pi ** 2)
        kb = 512 * mp.power(3, mp.mpf(1) / 4) * mp.sqrt(2) / 81 * kd
        return kd, kb
