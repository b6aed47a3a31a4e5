"""Truncated formal power series over exact or high-precision coefficients.

The series kernel is deliberately ring-generic: coefficients may be
`fractions.Fraction` (exact), mpmath floats at a configured precision,
polynomials in a percolation parameter, or even other `TruncatedSeries`
(giving bivariate series as series-with-series-coefficients).  All
operations truncate at a fixed order N; a product or composition of two
order-N series is again order N, never silently longer.

Implicit equations F(W, z) = 0 with W(0) = w0 and dF/dW nonvanishing at the
base point are solved either by the reference coefficient-by-coefficient
recursion or by series Newton iteration with order doubling.  Both produce
bit-identical output over exact rationals; Newton is the default because it
is quasi-linear in the number of ring multiplications.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction
from typing import Callable, Sequence

import mpmath as mp


class SeriesError(ValueError):
    """Base class for series kernel failures."""


class SeriesUsageError(SeriesError):
    """Mismatched variable labels, orders or coefficient domains."""


class CoefficientRangeError(SeriesError, IndexError):
    """Coefficient index beyond the truncation order (never a silent zero)."""


class NonLagrangeanError(SeriesError):
    """dF/dW vanishes at the base point; the implicit solve is degenerate."""


class Domain:
    """Coefficient domain: exact rationals, big floats, or a generic ring.

    `convert` lifts python ints / Fractions into the domain; `zero` / `one`
    give the ring constants.  BigFloat precision is at least 64 bits and is
    configuration driven.
    """

    EXACT = "ExactRational"
    BIGFLOAT = "BigFloat"
    RING = "Ring"

    def __init__(self, mode: str, precision_bits: int | None = None,
                 zero=None, one=None, convert=None):
        if mode == self.BIGFLOAT:
            if precision_bits is None or precision_bits < 64:
                raise SeriesUsageError("BigFloat precision must be >= 64 bits")
        self.mode = mode
        self.precision_bits = precision_bits
        self._zero = zero
        self._one = one
        self._convert = convert

    def __repr__(self):
        if self.mode == self.BIGFLOAT:
            return f"Domain(BigFloat, {self.precision_bits} bits)"
        return f"Domain({self.mode})"

    def __eq__(self, other):
        return (isinstance(other, Domain) and self.mode == other.mode
                and self.precision_bits == other.precision_bits)

    def __hash__(self):
        return hash((self.mode, self.precision_bits))

    @property
    def is_exact(self) -> bool:
        return self.mode == self.EXACT

    def context(self):
        """Precision context for coefficient arithmetic in this domain."""
        if self.mode == self.BIGFLOAT:
            return mp.workprec(self.precision_bits)
        return contextlib.nullcontext()

    def zero(self):
        if self.mode == self.EXACT:
            return Fraction(0)
        if self.mode == self.BIGFLOAT:
            return mp.mpf(0)
        return self._zero

    def one(self):
        if self.mode == self.EXACT:
            return Fraction(1)
        if self.mode == self.BIGFLOAT:
            return mp.mpf(1)
        return self._one

    def convert(self, value):
        if self.mode == self.EXACT:
            if isinstance(value, Fraction):
                return value
            if isinstance(value, int):
                return Fraction(value)
            raise SeriesUsageError(f"cannot convert {value!r} to ExactRational")
        if self.mode == self.BIGFLOAT:
            if isinstance(value, Fraction):
                with mp.workprec(self.precision_bits):
                    return mp.mpf(value.numerator) / value.denominator
            with mp.workprec(self.precision_bits):
                return mp.mpf(value) * 1
        if self._convert is not None:
            return self._convert(value)
        return value


QQ = Domain(Domain.EXACT)


def bigfloat(precision_bits: int) -> Domain:
    return Domain(Domain.BIGFLOAT, precision_bits=precision_bits)


class TruncatedSeries:
    """A power series c_0 + c_1 z + ... + c_N z^N, truncated at order N."""

    __slots__ = ("coeffs", "var", "domain")

    def __init__(self, coeffs: Sequence, var: str, domain: Domain):
        self.coeffs = list(coeffs)
        if not self.coeffs:
            raise SeriesUsageError("series needs at least the constant term")
        self.var = var
        self.domain = domain

    # -- construction helpers -------------------------------------------------

    @classmethod
    def constant(cls, value, order: int, var: str, domain: Domain):
        coeffs = [domain.zero() for _ in range(order + 1)]
        coeffs[0] = domain.convert(value) if not _is_ring_element(value, domain) else value
        return cls(coeffs, var, domain)

    @classmethod
    def identity(cls, order: int, var: str, domain: Domain):
        coeffs = [domain.zero() for _ in range(order + 1)]
        if order >= 1:
            coeffs[1] = domain.one()
        return cls(coeffs, var, domain)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, n: int):
        """The exact coefficient c_n; out-of-range indices raise."""
        if n < 0 or n > self.order:
            raise CoefficientRangeError(
                f"coefficient {n} requested from series truncated at order {self.order}")
        return self.coeffs[n]

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise SeriesUsageError("truncate cannot extend a series")
        return TruncatedSeries(self.coeffs[:order + 1], self.var, self.domain)

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:5])
        tail = ", ..." if self.order >= 5 else ""
        return f"TruncatedSeries([{head}{tail}] + O({self.var}^{self.order + 1}))"

    # -- ring operations -------------------------------------------------------

    def _check_compat(self, other: "TruncatedSeries"):
        if self.var != other.var:
            raise SeriesUsageError(f"variable mismatch: {self.var} vs {other.var}")
        if self.order != other.order:
            raise SeriesUsageError(f"order mismatch: {self.order} vs {other.order}")
        if self.domain != other.domain:
            raise SeriesUsageError(f"domain mismatch: {self.domain} vs {other.domain}")

    def _coerce(self, value):
        if isinstance(value, TruncatedSeries) and value.var == self.var:
            return value
        return TruncatedSeries.constant(value, self.order, self.var, self.domain)

    def __add__(self, other):
        other = self._coerce(other)
        self._check_compat(other)
        with self.domain.context():
            return TruncatedSeries([a + b for a, b in zip(self.coeffs, other.coeffs)],
                                   self.var, self.domain)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-a for a in self.coeffs], self.var, self.domain)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries) or other.var != self.var:
            scalar = self._scalar(other)
            with self.domain.context():
                return TruncatedSeries([c * scalar for c in self.coeffs],
                                       self.var, self.domain)
        self._check_compat(other)
        return series_mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def _scalar(self, value):
        if _is_ring_element(value, self.domain):
            return value
        return self.domain.convert(value)

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries) and other.var == self.var:
            return self * other.reciprocal()
        scalar = self._scalar(other)
        return self * _ring_invert(scalar, self.domain)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise SeriesUsageError("series powers must be nonnegative integers")
        result = TruncatedSeries.constant(1, self.order, self.var, self.domain)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.var == other.var and self.domain == other.domain
                and self.coeffs == other.coeffs)

    def reciprocal(self) -> "TruncatedSeries":
        """1/self, requiring an invertible constant term."""
        c0 = self.coeffs[0]
        if _is_zero(c0):
            raise SeriesUsageError("reciprocal of a series with zero constant term")
        inv0 = _ring_invert(c0, self.domain)
        # Newton: X <- X (2 - a X), doubling correct order each step.
        n = self.order
        x = TruncatedSeries([inv0], self.var, self.domain)
        known = 0
        while known < n:
            known = min(2 * known + 1, n)
            a = self.truncate(known)
            x = _extend(x, known)
            two = TruncatedSeries.constant(2, known, self.var, self.domain)
            x = x * (two - a * x)
        return _extend(x, n)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        return series_compose(self, inner)

    def derivative(self) -> "TruncatedSeries":
        """d/dz, truncated at the same order (top coefficient set to zero)."""
        coeffs = [self.coeffs[k] * k for k in range(1, self.order + 1)]
        coeffs.append(self.domain.zero())
        return TruncatedSeries(coeffs, self.var, self.domain)

    def shift_down(self, k: int = 1) -> "TruncatedSeries":
        """Divide by z^k; the low-order coefficients must vanish."""
        for j in range(k):
            if not _is_zero(self.coeffs[j]):
                raise SeriesUsageError(f"shift_down({k}) on series with nonzero c_{j}")
        coeffs = self.coeffs[k:] + [self.domain.zero()] * k
        return TruncatedSeries(coeffs, self.var, self.domain)

    def eval_at(self, point):
        """Horner evaluation of the truncated polynomial at a numeric point."""
        with self.domain.context():
            acc = self.coeffs[-1]
            for c in reversed(self.coeffs[:-1]):
                acc = acc * point + c
            return acc

    def map_coeffs(self, fn: Callable, domain: Domain | None = None) -> "TruncatedSeries":
        return TruncatedSeries([fn(c) for c in self.coeffs], self.var,
                               domain if domain is not None else self.domain)


def _is_ring_element(value, domain: Domain) -> bool:
    if domain.mode == Domain.EXACT:
        return isinstance(value, Fraction)
    if domain.mode == Domain.BIGFLOAT:
        return isinstance(value, (mp.mpf, mp.mpc))
    return not isinstance(value, (int, Fraction))


def _is_zero(value) -> bool:
    if isinstance(value, TruncatedSeries):
        return all(_is_zero(c) for c in value.coeffs)
    return value == 0


def _ring_invert(value, domain: Domain):
    if isinstance(value, TruncatedSeries):
        return value.reciprocal()
    if domain.mode == Domain.BIGFLOAT:
        with mp.workprec(domain.precision_bits):
            return 1 / value
    return _one_like(value, domain) / value


def _one_like(value, domain: Domain):
    if isinstance(value, TruncatedSeries):
        return TruncatedSeries.constant(1, value.order, value.var, value.domain)
    return domain.one()


def _extend(s: TruncatedSeries, order: int) -> TruncatedSeries:
    if s.order >= order:
        return s.truncate(order)
    coeffs = s.coeffs + [s.domain.zero() for _ in range(order - s.order)]
    return TruncatedSeries(coeffs, s.var, s.domain)


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order."""
    a._check_compat(b)
    n = a.order
    zero = a.domain.zero()
    ac, bc = a.coeffs, b.coeffs
    out = []
    with a.domain.context():
        for k in range(n + 1):
            acc = zero
            for i in range(k + 1):
                ai = ac[i]
                if _is_zero(ai):
                    continue
                acc = acc + ai * bc[k - i]
            out.append(acc)
    return TruncatedSeries(out, a.var, a.domain)


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """outer(inner), requiring inner to have zero constant term.

    Horner evaluation in the series ring: N multiplications at order N.
    """
    if not _is_zero(inner.coeffs[0]):
        raise SeriesUsageError("composition requires inner constant term 0")
    if outer.order != inner.order:
        raise SeriesUsageError("composition requires matching truncation orders")
    acc = TruncatedSeries.constant(outer.coeffs[-1], inner.order, inner.var, inner.domain)
    for c in reversed(outer.coeffs[:-1]):
        acc = acc * inner
        acc.coeffs[0] = acc.coeffs[0] + (c if _is_ring_element(c, inner.domain)
                                         else inner.domain.convert(c))
    return acc


def solve_implicit_recursion(f: Callable[[TruncatedSeries], TruncatedSeries],
                             dfdw: Callable[[TruncatedSeries], TruncatedSeries],
                             w0, order: int, var: str, domain: Domain) -> TruncatedSeries:
    """Reference coefficient-by-coefficient solve of F(W, z) = 0, W(0) = w0.

    `f` maps a candidate series W to the residual series F(W, z) (the z
    dependence lives inside `f`); `dfdw` is the partial derivative in W.
    Coefficient n of W is fixed by requiring the order-n residual to vanish:
    c_n = -[z^n] F(W_partial) / (dF/dW)(w0, 0).
    """
    w = TruncatedSeries.constant(w0, order, var, domain)
    d0 = dfdw(w).coeffs[0]
    if _is_zero(d0):
        raise NonLagrangeanError("dF/dW vanishes at the base point")
    inv_d0 = _ring_invert(d0, domain)
    for n in range(1, order + 1):
        res = f(w)
        cn = -res.coeffs[n] * inv_d0
        w.coeffs[n] = cn
    residual = f(w)
    for c in residual.coeffs:
        if domain.is_exact and not _is_zero(c):
            raise SeriesError("implicit solve left a nonzero exact residual")
    return w


def solve_implicit(f: Callable[[TruncatedSeries], TruncatedSeries],
                   dfdw: Callable[[TruncatedSeries], TruncatedSeries],
                   w0, order: int, var: str, domain: Domain) -> TruncatedSeries:
    """Newton-in-the-series-ring solve of F(W, z) = 0.

    Each Newton step doubles the number of correct coefficients, so
    ceil(log2(order + 2)) + 1 steps at full truncation suffice.  Produces
    the same unique solution as `solve_implicit_recursion` (bit identical
    over exact rationals) in O(log N) ring multiplications.
    """
    w = TruncatedSeries.constant(w0, order, var, domain)
    d0 = dfdw(w).coeffs[0]
    if _is_zero(d0):
        raise NonLagrangeanError("dF/dW vanishes at the base point")
    steps = 1
    while (1 << steps) - 1 < order:
        steps += 1
    for _ in range(steps + 1):
        w = w - f(w) / dfdw(w)
    if domain.is_exact:
        residual = f(w)
        if any(not _is_zero(c) for c in residual.coeffs):
            raise SeriesError("implicit Newton solve left a nonzero exact residual")
    return w


def solve_lagrange(rhs: Callable[[TruncatedSeries], TruncatedSeries],
                   order: int, var: str, domain: Domain, w0=0) -> TruncatedSeries:
    """Solve W = z * R(W) for the unique series with W(0) = w0 (usually 0).

    R must be a series-valued callable with R(w0) invertible; this is the
    Lagrangean special case of the general implicit solver.
    """
    z = TruncatedSeries.identity(order, var, domain)
    # For the Lagrangean form, dF/dW = 1 - z d/dW[R(W)] has constant term 1,
    # so the coefficient recursion never divides by anything but 1.
    w = TruncatedSeries.constant(w0, order, var, domain)
    for n in range(1, order + 1):
        res = w - z * rhs(w)
        w.coeffs[n] = w.coeffs[n] - res.coeffs[n]
    check = w - z * rhs(w)
    if domain.is_exact and any(not _is_zero(c) for c in check.coeffs):
        raise NonLagrangeanError("W = z R(W) has no series solution from this base point")
    return w
