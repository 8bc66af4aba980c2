"""Exact coefficient fields: rationals and gaussian rationals.

Everything is exact; no floats appear anywhere in the package.
"""

from __future__ import annotations

from fractions import Fraction


class GaussRational:
    """a + b*i with exact rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero gaussian rational")
        return GaussRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = GaussRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        istr = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re}{sign}{istr})"


def _as_gauss(v):
    if isinstance(v, GaussRational):
        return v
    if isinstance(v, (int, Fraction)):
        return GaussRational(v)
    return NotImplemented


class CoefficientField:
    """One of Q or Q(i).  Coerces scalars into a closed representation."""

    def __init__(self, kind: str):
        if kind not in ("Q", "Q(i)"):
            raise ValueError(f"unsupported coefficient field {kind!r}")
        self.kind = kind

    @property
    def has_i(self) -> bool:
        return self.kind == "Q(i)"

    def coerce(self, v):
        if self.kind == "Q":
            if isinstance(v, Fraction):
                return v
            if isinstance(v, int):
                return Fraction(v)
            if isinstance(v, GaussRational):
                if v.im != 0:
                    raise ValueError("imaginary coefficient over Q")
                return v.re
            raise TypeError(f"cannot coerce {v!r} into Q")
        if isinstance(v, GaussRational):
            return v
        if isinstance(v, (int, Fraction)):
            return GaussRational(v)
        raise TypeError(f"cannot coerce {v!r} into Q(i)")

    def i(self):
        if not self.has_i:
            raise ValueError("i is only available over Q(i)")
        return GaussRational(0, 1)

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    def __eq__(self, other):
        return isinstance(other, CoefficientField) and self.kind == other.kind

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return f"CoefficientField({self.kind!r})"


QQ = CoefficientField("Q")
QQI = CoefficientField("Q(i)")


def field_by_name(name: str) -> CoefficientField:
    return QQ if name == "Q" else CoefficientField(name)
