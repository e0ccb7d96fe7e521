"""Coefficient backends: exact Gaussian rationals and arbitrary-precision complex.

Two interchangeable scalar types flow through the whole library:

* :class:`GaussianRational` -- exact elements of Q(i), built on
  :class:`fractions.Fraction`.  Field operations are exact; square roots
  are supported only when the result stays in Q(i).

* :class:`BigComplex` -- an mpmath complex number tagged with its working
  precision (decimal digits).  Every operation re-enters the mpmath
  context of the operands, so a value computed at 60 digits never gets
  silently rounded by whatever the global mpmath precision happens to be.
  Mixing two precisions raises.

A :class:`Backend` object (``EXACT`` or ``BigFloat(dps)``) is what the
series/matrix layers carry around; it knows how to build constants and
take branch-consistent square roots.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
from mpmath import mp
from mpmath.libmp import (fzero, from_int, from_rational, mpc_abs, mpc_add,
                          mpc_div, mpc_mul, mpc_neg, mpc_pow_int, mpc_sqrt,
                          mpc_sub, to_float)

MIN_DPS = 30
DEFAULT_DPS = 60

_RND = "n"
_CZERO = (fzero, fzero)


def _prec(dps: int) -> int:
    return int(dps * 3.3219280948873626) + 10


class BackendError(ValueError):
    pass


def _fraction_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        return None
    pn, qd = q.numerator, q.denominator
    rn, rd = math.isqrt(pn), math.isqrt(qd)
    if rn * rn == pn and rd * rd == qd:
        return Fraction(rn, rd)
    return None


class GaussianRational:
    """Exact a + b*i with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- ring structure ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def inverse(self):
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    # -- comparisons / hashing -------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"GR({self.re})"
        return f"GR({self.re}, {self.im}i)"

    def to_mpc(self, dps: int) -> "BigComplex":
        p = _prec(dps)
        raw = (from_rational(self.re.numerator, self.re.denominator, p, _RND),
               from_rational(self.im.numerator, self.im.denominator, p, _RND))
        return BigComplex(raw, dps, p)

    def sqrt(self):
        """Principal square root if it lies in Q(i), else None.

        Principal branch: argument of the result in (-pi/2, pi/2].
        """
        if not self:
            return GaussianRational(0)
        norm = _fraction_sqrt(self.re * self.re + self.im * self.im)
        if norm is None:
            return None
        x2 = (self.re + norm) / 2
        y2 = (norm - self.re) / 2
        x = _fraction_sqrt(x2)
        y = _fraction_sqrt(y2)
        if x is None or y is None:
            return None
        # signs: (x+iy)^2 = x^2-y^2 + 2ixy; need 2xy = im
        if self.im < 0:
            y = -y
        cand = GaussianRational(x, y)
        if cand * cand != self:
            cand = GaussianRational(x, -y)
            if cand * cand != self:
                return None
        # principal: Re>0, or Re==0 and Im>=0
        if cand.re < 0 or (cand.re == 0 and cand.im < 0):
            cand = -cand
        return cand


class BigComplex:
    """Arbitrary-precision complex value pinned to a decimal precision.

    Stores the raw mpmath ``libmp`` pair and performs arithmetic directly
    at the pinned binary precision, bypassing the global mpmath context
    entirely: values of different precisions refuse to mix.
    """

    __slots__ = ("raw", "dps", "prec")

    def __init__(self, raw, dps: int, prec: int | None = None):
        if dps < MIN_DPS:
            raise BackendError(f"bigfloat precision {dps} below minimum {MIN_DPS}")
        self.raw = raw
        self.dps = dps
        self.prec = prec if prec is not None else _prec(dps)

    @classmethod
    def from_value(cls, value, dps: int) -> "BigComplex":
        with mp.workdps(dps):
            return cls(mpmath.mpc(value)._mpc_, dps)

    @property
    def value(self):
        return mp.make_mpc(self.raw)

    def _coerce(self, other):
        if isinstance(other, BigComplex):
            if other.dps != self.dps:
                raise BackendError(
                    f"mixing precisions {self.dps} and {other.dps}")
            return other.raw
        if isinstance(other, int):
            return (from_int(other), fzero)
        if isinstance(other, Fraction):
            return (from_rational(other.numerator, other.denominator,
                                  self.prec, _RND), fzero)
        if isinstance(other, GaussianRational):
            return (from_rational(other.re.numerator, other.re.denominator,
                                  self.prec, _RND),
                    from_rational(other.im.numerator, other.im.denominator,
                                  self.prec, _RND))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigComplex(mpc_add(self.raw, o, self.prec, _RND), self.dps, self.prec)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigComplex(mpc_sub(self.raw, o, self.prec, _RND), self.dps, self.prec)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigComplex(mpc_sub(o, self.raw, self.prec, _RND), self.dps, self.prec)

    def __neg__(self):
        return BigComplex(mpc_neg(self.raw, self.prec, _RND), self.dps, self.prec)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigComplex(mpc_mul(self.raw, o, self.prec, _RND), self.dps, self.prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigComplex(mpc_div(self.raw, o, self.prec, _RND), self.dps, self.prec)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return BigComplex(mpc_div(o, self.raw, self.prec, _RND), self.dps, self.prec)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return BigComplex(mpc_pow_int(self.raw, n, self.prec, _RND),
                          self.dps, self.prec)

    def inverse(self):
        return BigComplex(mpc_div(_CONE, self.raw, self.prec, _RND),
                          self.dps, self.prec)

    def conjugate(self):
        re, im = self.raw
        from mpmath.libmp import mpf_neg
        return BigComplex((re, mpf_neg(im)), self.dps, self.prec)

    def __eq__(self, other):
        if isinstance(other, BigComplex):
            return self.dps == other.dps and self.raw == other.raw
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self.raw == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.raw)

    def __bool__(self):
        return self.raw != _CZERO

    def __abs__(self) -> float:
        return to_float(mpc_abs(self.raw, 53, _RND))

    def __repr__(self):
        return f"BC({self.value}, dps={self.dps})"

    def sqrt(self):
        """Principal square root (argument of result in (-pi/2, pi/2])."""
        return BigComplex(mpc_sqrt(self.raw, self.prec, _RND), self.dps, self.prec)


_CONE = (from_int(1), fzero)


# ---------------------------------------------------------------------------
# Backends


class Backend:
    """Factory/utility object shared by series and matrix layers."""

    exact: bool

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def from_fraction(self, q):
        raise NotImplementedError

    def from_pair(self, re, im):
        raise NotImplementedError

    def is_zero(self, x) -> bool:
        raise NotImplementedError

    def sqrt(self, x):
        """Square root with the library-wide branch rule (principal)."""
        raise NotImplementedError


class ExactBackend(Backend):
    exact = True
    name = "exact"

    def zero(self):
        return GaussianRational(0)

    def one(self):
        return GaussianRational(1)

    def i(self):
        return GaussianRational(0, 1)

    def from_fraction(self, q):
        return GaussianRational(q)

    def from_pair(self, re, im):
        return GaussianRational(re, im)

    def is_zero(self, x) -> bool:
        return not bool(x)

    def sqrt(self, x):
        r = x.sqrt() if isinstance(x, GaussianRational) else GaussianRational(x).sqrt()
        if r is None:
            raise BackendError(
                f"square root of {x} is not a Gaussian rational; use a bigfloat backend"
            )
        return r

    def __repr__(self):
        return "ExactBackend()"

    def __eq__(self, other):
        return isinstance(other, ExactBackend)

    def __hash__(self):
        return hash("exact")


class BigFloat(Backend):
    exact = False

    def __init__(self, dps: int = DEFAULT_DPS):
        if dps < MIN_DPS:
            raise BackendError(f"bigfloat precision {dps} below minimum {MIN_DPS}")
        self.dps = dps
        self.name = f"bigfloat:{dps}"

    def zero(self):
        return BigComplex(_CZERO, self.dps)

    def one(self):
        return BigComplex(_CONE, self.dps)

    def i(self):
        return BigComplex((fzero, from_int(1)), self.dps)

    def from_fraction(self, q):
        q = Fraction(q)
        p = _prec(self.dps)
        return BigComplex((from_rational(q.numerator, q.denominator, p, _RND),
                           fzero), self.dps, p)

    def from_pair(self, re, im):
        return GaussianRational(re, im).to_mpc(self.dps)

    def from_complex(self, z):
        if isinstance(z, BigComplex):
            if z.dps != self.dps:
                raise BackendError("mixing precisions")
            return z
        return BigComplex.from_value(z, self.dps)

    def is_zero(self, x) -> bool:
        return not bool(x)

    def sqrt(self, x):
        if isinstance(x, GaussianRational):
            x = x.to_mpc(self.dps)
        if isinstance(x, (int, Fraction)):
            x = self.from_fraction(x)
        return x.sqrt()

    def eps(self, slack: int = 5) -> float:
        """A conservative 'numerically zero' threshold for diagnostics."""
        return 10.0 ** (-(self.dps - slack))

    def __repr__(self):
        return f"BigFloat(dps={self.dps})"

    def __eq__(self, other):
        return isinstance(other, BigFloat) and other.dps == self.dps

    def __hash__(self):
        return hash(("bigfloat", self.dps))


EXACT = ExactBackend()


def backend_of(x) -> Backend:
    """Infer the backend a scalar belongs to."""
    if isinstance(x, GaussianRational):
        return EXACT
    if isinstance(x, BigComplex):
        return BigFloat(x.dps)
    if isinstance(x, (int, Fraction)):
        return EXACT
    raise BackendError(f"not a library scalar: {x!r}")


def parse_backend(text: str) -> Backend:
    """Parse 'exact' or 'bigfloat:<digits>' (CLI syntax)."""
    if text == "exact":
        return EXACT
    if text == "bigfloat":
        return BigFloat(DEFAULT_DPS)
    if text.startswith("bigfloat:"):
        return BigFloat(int(text.split(":", 1)[1]))
    raise BackendError(f"unknown backend {text!r}")
