"""Weierstrass curves over Q and over prime fields.

A curve is described by its a-invariants (a1, a2, a3, a4, a6) and a field,
either the rationals (``ell is None``) or F_ell.  Rational arithmetic uses
:class:`fractions.Fraction` throughout; residues are plain ints in
``range(ell)``.  Points are immutable and the point at infinity is the
single value :data:`INFINITY`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction]


class PointNotOnCurve(ValueError):
    pass


@dataclass(frozen=True)
class CurvePoint:
    x: Scalar | None
    y: Scalar | None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __repr__(self):
        if self.is_infinity:
            return "CurvePoint(O)"
        return f"CurvePoint({self.x}, {self.y})"


INFINITY = CurvePoint(None, None)


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and strings like ``"-3/4"`` exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as a rational number")


def _residue(value: Fraction, ell: int) -> int | None:
    """Image of a rational in F_ell, or None when ell divides the denominator."""
    if value.denominator % ell == 0:
        return None
    return value.numerator * pow(value.denominator, -1, ell) % ell


class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q or F_ell."""

    def __init__(self, a_invariants, ell: int | None = None):
        if len(a_invariants) != 5:
            raise ValueError("need exactly five a-invariants")
        self.ell = ell
        if ell is None:
            self.a = tuple(to_fraction(v) for v in a_invariants)
        else:
            self.a = tuple(int(v) % ell for v in a_invariants)
        if self.discriminant == 0:
            raise ValueError(f"singular curve {a_invariants} (discriminant 0)")

    # field helpers -------------------------------------------------------
    def _n(self, v):
        return v if self.ell is None else v % self.ell

    def _div(self, num, den):
        if self.ell is None:
            return Fraction(num) / den
        return num * pow(den, -1, self.ell) % self.ell

    # invariants ----------------------------------------------------------
    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.a
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self):
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -b2 ** 3 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants
        d = -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        return self._n(d)

    @property
    def j_invariant(self):
        c4, _ = self.c_invariants
        return self._div(c4 ** 3, self.discriminant)

    def __repr__(self):
        field = "Q" if self.ell is None else f"F_{self.ell}"
        return f"WeierstrassCurve({list(map(str, self.a))} over {field})"

    def __eq__(self, other):
        return isinstance(other, WeierstrassCurve) and self.a == other.a and self.ell == other.ell

    def __hash__(self):
        return hash((self.a, self.ell))

    # points --------------------------------------------------------------
    def contains(self, P: CurvePoint) -> bool:
        if P.is_infinity:
            return True
        a1, a2, a3, a4, a6 = self.a
        x, y = P.x, P.y
        lhs = y * y + a1 * x * y + a3 * y
        rhs = x ** 3 + a2 * x * x + a4 * x + a6
        return self._n(lhs - rhs) == 0

    def point(self, x, y) -> CurvePoint:
        if self.ell is None:
            P = CurvePoint(to_fraction(x), to_fraction(y))
        else:
            P = CurvePoint(int(x) % self.ell, int(y) % self.ell)
        if not self.contains(P):
            raise PointNotOnCurve(f"({x}, {y}) is not on {self}")
        return P

    def neg(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return P
        a1, _, a3, _, _ = self.a
        return CurvePoint(P.x, self._n(-P.y - a1 * P.x - a3))

    def add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        a1, a2, a3, a4, a6 = self.a
        if P.x == Q.x:
            if self._n(P.y + Q.y + a1 * Q.x + a3) == 0:
                return INFINITY
            num = 3 * P.x * P.x + 2 * a2 * P.x + a4 - a1 * P.y
            den = 2 * P.y + a1 * P.x + a3
            lam = self._div(num, den)
            nu = self._div(-P.x ** 3 + a4 * P.x + 2 * a6 - a3 * P.y, den)
        else:
            lam = self._div(Q.y - P.y, Q.x - P.x)
            nu = self._div(P.y * Q.x - Q.y * P.x, Q.x - P.x)
        x3 = self._n(lam * lam + a1 * lam - a2 - P.x - Q.x)
        y3 = self._n(-(lam + a1) * x3 - nu - a3)
        return CurvePoint(x3, y3)

    def sub(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return self.add(P, self.neg(Q))

    def mul(self, k: int, P: CurvePoint) -> CurvePoint:
        if k < 0:
            return self.mul(-k, self.neg(P))
        result = INFINITY
        addend = P
        while k:
            if k & 1:
                result = self.add(result, addend)
            k >>= 1
            if k:
                addend = self.add(addend, addend)
        return result

    # reduction -----------------------------------------------------------
    def reduce(self, ell: int) -> "WeierstrassCurve | None":
        """The reduction of this model mod ell, or None if it is singular or non-integral."""
        if self.ell is not None:
            raise ValueError("already a curve over a finite field")
        res = [_residue(v, ell) for v in self.a]
        if any(r is None for r in res) or _residue(self.discriminant, ell) in (None, 0):
            return None
        return WeierstrassCurve(res, ell)

    def reduce_point(self, P: CurvePoint, ell: int) -> CurvePoint:
        """Reduce a rational point mod ell (points with ell in the denominator go to O)."""
        if P.is_infinity:
            return P
        x, y = _residue(P.x, ell), _residue(P.y, ell)
        if x is None or y is None:
            return INFINITY
        return CurvePoint(x, y)
