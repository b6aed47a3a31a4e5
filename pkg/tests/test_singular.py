"""Singularity analysis: Puiseux data, transfer, and the limit series."""

from fractions import Fraction

import mpmath as mp
import pytest

from uiptperco.gfseries import qtilde_series_fast, t_series_bivariate, z_series
from uiptperco.parametrization import constants, hat_y, hat_y_dv
from uiptperco.singular import (
    SingularExpansion,
    delta_eval,
    delta_series,
    derived_expansions,
    dhat,
    kappa_z,
    puiseux_fit,
    puiseux_u,
    theta_series,
    transfer,
)

PREC = 160
CST = constants(PREC)


class TestPuiseuxU:
    def test_reversion_matches_closed_forms(self):
        exp = puiseux_u(PREC, n_terms=4)
        with mp.workprec(PREC):
            closed = [(3 - mp.sqrt(3)) / 6, -mp.sqrt(2) / 6, mp.sqrt(3) / 54,
                      -5 * mp.sqrt(2) / 648]
            for (alpha, c), ref in zip(exp.terms, closed):
                assert mp.almosteq(c, ref, rel_eps=mp.mpf(2) ** -80), str(alpha)

    def test_resubstitution(self):
        exp = puiseux_u(PREC, n_terms=4)
        with mp.workprec(PREC):
            for off in (mp.mpf("1e-3"), mp.mpf("1e-4"), mp.mpf("1e-5")):
                x = CST.tc3 * (1 - off)
                u = exp.value(x)
                resid = abs(u * (1 - u) * (1 - 2 * u) / 2 - x)
                assert resid < 10 * off ** 2 * CST.tc3


class TestPuiseuxFit:
    def test_self_consistency_with_reversion(self):
        from uiptperco.parametrization import eval_U

        exp = puiseux_u(320, n_terms=4)
        fit = puiseux_fit(lambda x: eval_U(x, 320), CST.tc3,
                          [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3, 2),
                           Fraction(2)],
                          prec=320, ladder=(1e-4, 1e-10, 30))
        for (a1, c1), (a2, c2) in zip(exp.terms, fit.terms[:4]):
            assert a1 == a2
            assert abs(c1 - c2) < 1e-6

    def test_z_expansion_three_halves_coefficient(self):
        # the 3/2-coefficient of the partition function matches kappa(p)
        from uiptperco.boltzmann import partition_value

        p = 0.7
        fit = puiseux_fit(lambda x: partition_value(p, x, 320), CST.tc3,
                          [Fraction(0), Fraction(1), Fraction(3, 2), Fraction(2),
                           Fraction(5, 2)],
                          prec=320, ladder=(1e-4, 1e-10, 30))
        coeff = dict((a, c) for a, c in fit.terms)[Fraction(3, 2)]
        with mp.workprec(320):
            assert abs(coeff - kappa_z(p, 320)) < 1e-4


class TestTransfer:
    def test_single_three_halves_term(self):
        with mp.workprec(PREC):
            exp = SingularExpansion(rho=mp.mpf(2), terms=[(Fraction(3, 2), mp.mpf(5))],
                                    error_order=Fraction(2))
            n = 40
            val = transfer(exp, n, PREC)
            ref = 5 * mp.power(2, -n) * mp.power(n, mp.mpf(-5) / 2) * 3 / (4 * mp.sqrt(mp.pi))
            assert mp.almosteq(val, ref, rel_eps=mp.mpf(2) ** -60)

    def test_integer_terms_vanish(self):
        with mp.workprec(PREC):
            exp = SingularExpansion(rho=mp.mpf(2),
                                    terms=[(Fraction(1), mp.mpf(7)),
                                           (Fraction(2), mp.mpf(3))],
                                    error_order=Fraction(3))
            assert transfer(exp, 10, PREC) == 0

    @pytest.mark.slow
    def test_z_coefficients_at_n_160(self):
        p = Fraction(1, 2)
        z = z_series(p, 160)
        with mp.workprec(300):
            exp = SingularExpansion(
                rho=CST.tc3,
                terms=[(Fraction(3, 2), kappa_z(0.5, 300))],
                error_order=Fraction(2))
            approx = transfer(exp, 160, 300)
            exact = mp.mpf(z.coeff(160).numerator) / z.coeff(160).denominator
            assert abs(approx / exact - 1) < 0.03


class TestDhat:
    def test_certification_identity(self):
        # Dhat * d_V hat_y(1-p) / (hat_y (hat_y - 1)) = explicit RHS
        with mp.workprec(PREC):
            for p in (mp.mpf("0.3"), mp.mpf("0.5"), mp.mpf("0.9")):
                for v in (mp.mpf("0.11"), mp.mpf("-0.2"), mp.mpf("0.31")):
                    lhs = (dhat(p, v, PREC) * hat_y_dv(1 - p, CST.Uc, v)
                           / (hat_y(1 - p, CST.Uc, v)
                              * (hat_y(1 - p, CST.Uc, v) - 1)))
                    rhs = 1 / (3 * (2 * CST.sqrt3 - 3 * (1 - p))
                               * (v - CST.sqrt3 / 3) ** 2)
                    assert mp.almosteq(lhs, rhs, rel_eps=mp.mpf(2) ** -100)


class TestLimitSeries:
    @pytest.mark.slow
    def test_delta_matches_exact_ratios(self):
        # delta_k = lim [x^n] qt_k / [x^n] Z, Richardson in n, 2% at worst
        for p in (Fraction(2, 5), Fraction(1, 2), Fraction(7, 10)):
            N = 120
            qts = qtilde_series_fast(p, N, 4)
            Z = z_series(p, N)
            ds = delta_series(float(p), 6, prec=200)
            with mp.workprec(250):
                for k in (1, 2, 3, 4):
                    def ratio(n):
                        num = qts[k - 1].coeff(n)
                        den = Z.coeff(n)
                        return (mp.mpf(num.numerator) / num.denominator
                                / (mp.mpf(den.numerator) / den.denominator))

                    r1, r2 = ratio(N * 2 // 3), ratio(N)
                    ext = (N * r2 - (N * 2 // 3) * r1) / (N - N * 2 // 3)
                    assert abs(ext / ds.coeffs[k] - 1) < 0.02, (p, k)

    @pytest.mark.slow
    def test_theta_matches_exact_ratios(self):
        for p in (Fraction(1, 2), Fraction(3, 10)):
            N = 120
            T = t_series_bivariate(p, N, 3)
            Z = z_series(p, N)
            ths = theta_series(float(p), 6, prec=200)
            with mp.workprec(250):
                for k in (1, 2, 3):
                    def ratio(n):
                        num = T.coeffs[k].coeffs[n]
                        den = Z.coeff(n)
                        return (mp.mpf(num.numerator) / num.denominator
                                / (mp.mpf(den.numerator) / den.denominator))

                    r1, r2 = ratio(N * 2 // 3), ratio(N)
                    ext = (N * r2 - (N * 2 // 3) * r1) / (N - N * 2 // 3)
                    assert abs(ext / ths.coeffs[k] - 1) < 0.02, (p, k)

    def test_delta_zero_coefficient_vanishes(self):
        ds = delta_series(0.6, 3, prec=PREC)
        with mp.workprec(PREC):
            assert abs(ds.coeffs[0]) < mp.mpf(2) ** -100

    def test_series_eval_agreement(self):
        ds = delta_series(0.5, 48, prec=200)
        with mp.workprec(200):
            z = mp.mpf("0.3")
            series_val = mp.mpf(0)
            for k, c in enumerate(ds.coeffs):
                series_val += c * mp.power(z, k)
            assert abs(series_val - delta_eval(0.5, z, 200)) < 1e-8

    def test_growth_constants(self):
        # delta_k(1/2) 2^{-k} k^{-1/3} -> C_Delta / Gamma(4/3),
        # theta_k(1/2) 2^{k} k^{-1/3} -> (C_Delta/2) / Gamma(4/3)
        K = 420
        ds = delta_series(0.5, K)
        ths = theta_series(0.5, K)
        with mp.workprec(200):
            c_delta = (8 * mp.power(3, mp.mpf(5) / 6) / 351
                       + 2 * mp.power(3, mp.mpf(1) / 3) / 117)
            target_d = c_delta / mp.gamma(mp.mpf(4) / 3)
            target_t = c_delta / 2 / mp.gamma(mp.mpf(4) / 3)
            k = K
            val_d = ds.coeffs[k] * mp.power(2, -k) * mp.power(k, -mp.mpf(1) / 3)
            val_t = ths.coeffs[k] * mp.power(2, k) * mp.power(k, -mp.mpf(1) / 3)
            assert abs(val_d / target_d - 1) < 0.05
            assert abs(val_t / target_t - 1) < 0.05
            # the two limits differ by exactly 2 (corrected transform)
            assert abs((val_d / val_t) / 2 - 1) < 0.01


class TestDeltaEval:
    def test_minus_four_thirds_singularity(self):
        fit = puiseux_fit(lambda z: delta_eval(0.5, z, 200), mp.mpf(1) / 2,
                          [Fraction(-4, 3), Fraction(-1), Fraction(-2, 3)],
                          prec=200, ladder=(1e-3, 1e-7, 20))
        with mp.workprec(200):
            c_delta = (8 * mp.power(3, mp.mpf(5) / 6) / 351
                       + 2 * mp.power(3, mp.mpf(1) / 3) / 117)
            assert abs(fit.terms[0][1] / c_delta - 1) < 0.01

    def test_outside_slit_rejected(self):
        from uiptperco.parametrization import RangeError

        with pytest.raises(RangeError):
            delta_eval(0.5, 0.7, 96)


def test_derived_expansions_all_within_tol():
    rows = derived_expansions(440)
    for name, alpha, fitted, derived in rows:
        rel = abs(fitted - derived) / (1 + abs(derived))
        assert rel < 1e-4, (name, str(alpha), float(rel))
