"""Dense exact polynomials in the color bias p, over Fraction coefficients.

Percolated map censuses carry weights p^a (1-p)^b summed over colorings;
the gasket identities must hold as polynomial identities in p, not just
numerically, so a tiny exact polynomial ring is enough (no division needed
beyond scalars).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class PolyP:
    """Polynomial in p with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = (0,)):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @classmethod
    def p_power(cls, a: int) -> "PolyP":
        return cls([0] * a + [1])

    @classmethod
    def one_minus_p_power(cls, b: int) -> "PolyP":
        out = cls([1])
        for _ in range(b):
            out = out * cls([1, -1])
        return out

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other):
        if not isinstance(other, (PolyP, int, Fraction)):
            return NotImplemented
        other = _coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [Fraction(0)] * (n - len(self.coeffs))
        b = other.coeffs + [Fraction(0)] * (n - len(other.coeffs))
        return PolyP([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return PolyP([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, (PolyP, int, Fraction)):
            return NotImplemented
        return self + (-_coerce(other))

    def __rsub__(self, other):
        if not isinstance(other, (PolyP, int, Fraction)):
            return NotImplemented
        return _coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (PolyP, int, Fraction)):
            return NotImplemented
        other = _coerce(other)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyP(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, PolyP):
            if scalar.degree() == 0:
                scalar = scalar.coeffs[0]
            else:
                raise ZeroDivisionError("PolyP division only by scalars")
        return PolyP([c / scalar for c in self.coeffs])

    def __eq__(self, other):
        return self.coeffs == _coerce(other).coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __call__(self, p):
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * p + c
        return acc

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*p")
            else:
                terms.append(f"{c}*p^{i}")
        return " + ".join(terms) if terms else "0"


def _coerce(value) -> PolyP:
    if isinstance(value, PolyP):
        return value
    if isinstance(value, (int, Fraction)):
        return PolyP([value])
    raise TypeError(f"cannot coerce {value!r} into PolyP")


def polyp_domain():
    """A series coefficient Domain wrapping the PolyP ring."""
    from .series import Domain

    return Domain(Domain.RING, zero=PolyP([0]), one=PolyP([1]), convert=_coerce)
