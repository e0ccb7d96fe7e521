"""Truncated formal series in one variable with explicit truncation orders.

A :class:`Series` stores finitely many coefficients at exponents in
(1/e)*Z together with a truncation order: coefficients at exponents >=
``trunc`` are *unknown*, not zero.  ``trunc is None`` means the series is
exact (a Laurent polynomial).  Every operation propagates truncation
pessimistically and raises :class:`SeriesDepthError` when a caller asks
for terms beyond what is known, rather than padding with zeros --
residue-driven recursions amplify silently missing terms.

Exponents are stored internally as integer multiples of 1/e.  ``e = 1``
covers Laurent/power series; ``e = 2`` gives the half-integer Puiseux
series used for vanishing-cycle expansions.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import Backend, backend_of

__all__ = [
    "Series",
    "SeriesError",
    "SeriesDepthError",
    "watson_laplace",
    "gamma_half_ratio",
]


class SeriesError(ValueError):
    pass


class SeriesDepthError(SeriesError):
    """Requested terms beyond the known truncation order."""


def _as_key(exponent, e: int) -> int:
    q = Fraction(exponent) * e
    if q.denominator != 1:
        raise SeriesError(
            f"exponent {exponent} not a multiple of 1/{e}"
        )
    return q.numerator


class Series:
    """Finitely supported coefficients plus a truncation order.

    Parameters
    ----------
    var:
        Variable name, purely for display and sanity checks.
    coeffs:
        Mapping exponent -> scalar.  Exponents may be ints, Fractions, or
        (internally) pre-scaled integer keys via ``_raw``.
    trunc:
        Exponent bound: coefficients at exponents >= trunc are unknown.
        ``None`` means exact.
    e:
        Ramification index (1 or 2): exponents live in (1/e)*Z.
    """

    __slots__ = ("var", "e", "coeffs", "trunc", "backend")

    def __init__(self, var, coeffs, trunc=None, e=1, backend=None, _raw=False):
        if e not in (1, 2):
            raise SeriesError("ramification index must be 1 or 2")
        self.var = var
        self.e = e
        if _raw:
            data = coeffs
        else:
            data = {}
            for k, v in coeffs.items():
                data[_as_key(k, e)] = v
        self.trunc = None if trunc is None else Fraction(trunc)
        if self.trunc is not None:
            tkey = self.trunc * e
            data = {k: v for k, v in data.items() if k < tkey}
        self.coeffs = {k: v for k, v in data.items() if not _is_zero_scalar(v)}
        if backend is None:
            for v in self.coeffs.values():
                backend = backend_of(v)
                break
        self.backend = backend

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, var, backend: Backend, trunc=None, e=1):
        return cls(var, {}, trunc=trunc, e=e, backend=backend)

    @classmethod
    def one(cls, var, backend: Backend, trunc=None, e=1):
        return cls(var, {0: backend.one()}, trunc=trunc, e=e, backend=backend)

    @classmethod
    def monomial(cls, var, backend: Backend, exponent=1, coeff=None, trunc=None, e=1):
        c = backend.one() if coeff is None else coeff
        return cls(var, {exponent: c}, trunc=trunc, e=e, backend=backend)

    # -- basic queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def order(self) -> Fraction:
        """Smallest exponent with nonzero coefficient."""
        if not self.coeffs:
            if self.trunc is not None:
                return self.trunc
            raise SeriesError("order of exact zero series")
        return Fraction(min(self.coeffs), self.e)

    def coeff(self, exponent):
        key = _as_key(exponent, self.e)
        if self.trunc is not None and Fraction(key, self.e) >= self.trunc:
            raise SeriesDepthError(
                f"coefficient at {exponent} beyond truncation {self.trunc}"
            )
        return self.coeffs.get(key, self.backend.zero())

    def items(self):
        """Sorted (exponent, coefficient) pairs."""
        return [(Fraction(k, self.e), v) for k, v in sorted(self.coeffs.items())]

    def require_order(self, exponent):
        if self.trunc is not None and self.trunc < Fraction(exponent):
            raise SeriesDepthError(
                f"series known to order {self.trunc}, need {exponent}"
            )
        return self

    def leading(self):
        if not self.coeffs:
            raise SeriesError("leading coefficient of zero series")
        return self.coeffs[min(self.coeffs)]

    # -- structural helpers --------------------------------------------------

    def _check_compat(self, other: "Series"):
        if self.var != other.var:
            raise SeriesError(f"variable mismatch {self.var!r} vs {other.var!r}")

    def with_e(self, e: int) -> "Series":
        """Reinterpret in a finer exponent lattice (1 -> 2)."""
        if e == self.e:
            return self
        if e % self.e:
            raise SeriesError("incompatible ramification indices")
        f = e // self.e
        return Series(
            self.var,
            {k * f: v for k, v in self.coeffs.items()},
            trunc=self.trunc,
            e=e,
            backend=self.backend,
            _raw=True,
        )

    def truncate(self, trunc) -> "Series":
        t = Fraction(trunc)
        if self.trunc is not None:
            t = min(t, self.trunc)
        return Series(self.var, dict(self.coeffs), trunc=t, e=self.e,
                      backend=self.backend, _raw=True)

    def map_coeffs(self, fn) -> "Series":
        return Series(self.var, {k: fn(v) for k, v in self.coeffs.items()},
                      trunc=self.trunc, e=self.e, backend=self.backend, _raw=True)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Series):
            self._check_compat(other)
            e = max(self.e, other.e)
            a, b = self.with_e(e), other.with_e(e)
            t = _min_trunc(a.trunc, b.trunc)
            data = dict(a.coeffs)
            for k, v in b.coeffs.items():
                data[k] = data[k] + v if k in data else v
            return Series(self.var, data, trunc=t, e=e, backend=self.backend, _raw=True)
        # scalar
        data = dict(self.coeffs)
        data[0] = data.get(0, self.backend.zero()) + other
        return Series(self.var, data, trunc=self.trunc, e=self.e,
                      backend=self.backend, _raw=True)

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda v: -v)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Series) else -1 * other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Series):
            self._check_compat(other)
            e = max(self.e, other.e)
            a, b = self.with_e(e), other.with_e(e)
            t = _mul_trunc(a, b)
            tkey = None if t is None else t * e
            data = {}
            for ka, va in a.coeffs.items():
                for kb, vb in b.coeffs.items():
                    k = ka + kb
                    if tkey is not None and k >= tkey:
                        continue
                    p = va * vb
                    data[k] = data[k] + p if k in data else p
            return Series(self.var, data, trunc=t, e=e, backend=self.backend, _raw=True)
        return self.map_coeffs(lambda v: v * other)

    __rmul__ = __mul__

    def inverse(self) -> "Series":
        """Multiplicative inverse; requires nonzero leading coefficient."""
        if not self.coeffs:
            raise SeriesError("non-invertible series: zero")
        lo = min(self.coeffs)
        c0 = self.coeffs[lo]
        # f = c0 x^lo (1+u); 1/f = c0^-1 x^-lo sum (-u)^k
        if self.trunc is None:
            if len(self.coeffs) > 1:
                raise SeriesDepthError(
                    "inverse of an exact non-monomial series is an infinite "
                    "series; truncate first"
                )
            depth_key = 1
            t = None
        else:
            t = self.trunc - 2 * Fraction(lo, self.e)
            depth_key = self.trunc * self.e - lo
            if depth_key <= 0:
                raise SeriesDepthError("cannot invert: no known terms")
        inv0 = 1 / c0 if not hasattr(c0, "inverse") else c0.inverse()
        u = {k - lo: v * inv0 for k, v in self.coeffs.items() if k != lo}
        # geometric accumulation of (-u)^k
        acc = {0: self.backend.one()}
        term = {0: self.backend.one()}
        depth = int(depth_key)
        if u:
            umin = min(u)
            kmax = depth // umin + 1
            for _ in range(kmax):
                new = {}
                for k1, v1 in term.items():
                    for k2, v2 in u.items():
                        k = k1 + k2
                        if k >= depth:
                            continue
                        p = v1 * v2
                        new[k] = new[k] + p if k in new else p
                term = {k: -v for k, v in new.items()}
                if not term:
                    break
                for k, v in term.items():
                    acc[k] = acc[k] + v if k in acc else v
        data = {}
        for k, v in acc.items():
            data[k - lo] = v * inv0
        return Series(self.var, data, trunc=t, e=self.e, backend=self.backend, _raw=True)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        return self.map_coeffs(lambda v: v / other)

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Series.one(self.var, self.backend, e=self.e)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        e = max(self.e, other.e)
        a, b = self.with_e(e), other.with_e(e)
        return a.coeffs == b.coeffs and a.trunc == b.trunc and a.var == b.var

    def __repr__(self):
        parts = []
        for k, v in sorted(self.coeffs.items()):
            exp = Fraction(k, self.e)
            parts.append(f"({v})*{self.var}^{exp}")
        body = " + ".join(parts) if parts else "0"
        tail = "" if self.trunc is None else f" + O({self.var}^{self.trunc})"
        return body + tail

    # -- calculus ----------------------------------------------------------

    def differentiate(self) -> "Series":
        data = {}
        for k, v in self.coeffs.items():
            if k == 0:
                continue
            data[k - self.e] = v * Fraction(k, self.e)
        t = None if self.trunc is None else self.trunc - 1
        return Series(self.var, data, trunc=t, e=self.e, backend=self.backend, _raw=True)

    def antidifferentiate(self) -> "Series":
        """Term-wise antiderivative with zero constant term.

        Raises on an exponent -1 term (logarithmic obstruction).
        """
        data = {}
        for k, v in self.coeffs.items():
            if k == -self.e:
                raise SeriesError("logarithmic term: exponent -1 not integrable")
            data[k + self.e] = v / Fraction(k + self.e, self.e)
        t = None if self.trunc is None else self.trunc + 1
        return Series(self.var, data, trunc=t, e=self.e, backend=self.backend, _raw=True)

    def compose(self, g: "Series") -> "Series":
        """self(g) for g of strictly positive order; self a power series."""
        if not self.coeffs and self.trunc is None:
            return Series.zero(g.var, self.backend, e=g.e)
        if min(self.coeffs, default=0) < 0:
            raise SeriesError("composition undefined: outer series has a pole")
        if g.is_zero() or g.order() <= 0:
            raise SeriesError("composition undefined: inner series must have positive order")
        m = g.order()
        # truncation: error from outer O(x^Tf) -> O(t^(m*Tf)); from inner O(t^Tg)
        t = None
        if self.trunc is not None:
            t = m * self.trunc
        if g.trunc is not None:
            t = g.trunc if t is None else min(t, g.trunc)
        out = Series.zero(g.var, self.backend, trunc=t, e=g.e)
        # Horner on sorted exponents (integer exponents only for outer)
        keys = sorted(self.coeffs, reverse=True)
        if any(k % self.e for k in keys):
            raise SeriesError("composition outer series must have integer exponents")
        prev = None
        acc = Series.zero(g.var, self.backend, trunc=t, e=g.e)
        for k in keys:
            if prev is not None:
                acc = acc * g ** ((prev - k) // self.e)
            acc = acc + self.coeffs[k]
            prev = k
        if prev is None:
            return out
        acc = acc * g ** (prev // self.e)
        return acc.truncate(t) if t is not None else acc

    def reversion(self) -> "Series":
        """Compositional inverse of a series of order exactly 1."""
        if self.is_zero() or self.order() != 1 or self.e != 1:
            raise SeriesError("not reversible: order must be exactly 1")
        c1 = self.coeffs[1]
        if self.trunc is None:
            if len(self.coeffs) > 1:
                raise SeriesDepthError(
                    "reversion of an exact nonlinear series is an infinite "
                    "series; truncate first"
                )
            depth = 2
        else:
            depth = int(self.trunc)
            if depth < 2:
                raise SeriesDepthError("reversion needs the series through order 1")
        inv_c1 = 1 / c1 if not hasattr(c1, "inverse") else c1.inverse()
        var = self.var
        # Newton iteration with order doubling: g <- g - (f(g) - t)/f'(g)
        fp = self.differentiate()
        g = Series(var, {1: inv_c1}, trunc=2, e=1, backend=self.backend)
        cur = 2
        while cur < depth:
            cur = min(2 * cur, depth)
            gg = Series(var, dict(g.coeffs), trunc=cur, e=1,
                        backend=self.backend, _raw=True)
            fg = self.truncate(cur + 1).compose(gg)
            err = fg - Series.monomial(var, self.backend, 1, trunc=cur)
            corr = err / fp.truncate(cur).compose(gg)
            g = (gg - corr).truncate(cur)
        return Series(var, dict(g.coeffs), trunc=self.trunc, e=1,
                      backend=self.backend, _raw=True)

    def sqrt(self, allow_ramified: bool = False) -> "Series":
        """Square root with the backend branch rule on the leading coefficient.

        Even order: stays in the same exponent lattice.  Odd order with
        ``allow_ramified``: result lives in the e=2 lattice.
        """
        if self.is_zero():
            raise SeriesError("sqrt of zero series")
        lo = min(self.coeffs)
        if lo % 2:
            if not allow_ramified:
                raise SeriesError(
                    "ramified square root: odd order, request a Puiseux (e=2) result"
                )
            return self.with_e(2 * self.e).sqrt()
        c0 = self.coeffs[lo]
        r0 = self.backend.sqrt(c0)
        u = {}
        inv0 = 1 / c0 if not hasattr(c0, "inverse") else c0.inverse()
        for k, v in self.coeffs.items():
            if k != lo:
                u[k - lo] = v * inv0
        if self.trunc is None:
            if u:
                raise SeriesDepthError(
                    "sqrt of an exact non-monomial series is an infinite "
                    "series; truncate first"
                )
            depth = 1
        else:
            depth = int(self.trunc * self.e - lo)
            if depth <= 0:
                raise SeriesDepthError("cannot take sqrt: no known terms")
        # (1+u)^(1/2) via binomial series on the nilpotent-truncated u
        half = Fraction(1, 2)
        acc = {0: self.backend.one()}
        term = {0: self.backend.one()}
        if u:
            umin = min(u)
            kmax = depth // umin + 1
            coeff = Fraction(1)
            for j in range(1, kmax + 1):
                coeff *= (half - (j - 1)) / j
                new = {}
                for k1, v1 in term.items():
                    for k2, v2 in u.items():
                        k = k1 + k2
                        if k >= depth:
                            continue
                        p = v1 * v2
                        new[k] = new[k] + p if k in new else p
                term = new
                if not term:
                    break
                for k, v in term.items():
                    acc[k] = acc[k] + v * coeff if k in acc else v * coeff
        data = {}
        for k, v in acc.items():
            data[k + lo // 2] = v * r0
        tt = None if self.trunc is None else self.trunc - Fraction(lo, 2 * self.e)
        return Series(self.var, data, trunc=tt, e=self.e, backend=self.backend, _raw=True)

    def residue(self):
        """Coefficient of exponent -1 of a Laurent (e=1) expansion."""
        if any(k % self.e for k in self.coeffs):
            raise SeriesError("residue requires integer exponents")
        if self.trunc is not None and self.trunc <= -1:
            raise SeriesDepthError("insufficient expansion depth for residue")
        return self.coeffs.get(-self.e, self.backend.zero())

    def mul_residue(self, other: "Series"):
        """Residue of self*other without forming the product.

        Returns None when the product's truncation would not determine the
        residue (callers decide whether that is a skip or an error).
        """
        self._check_compat(other)
        t = _mul_trunc(self, other)
        if t is not None and t <= -1:
            return None
        e = max(self.e, other.e)
        a, b = self.with_e(e), other.with_e(e)
        total = self.backend.zero()
        if len(a.coeffs) > len(b.coeffs):
            a, b = b, a
        for k, v in a.coeffs.items():
            w = b.coeffs.get(-e - k)
            if w is not None:
                total = total + v * w
        return total

    def shift(self, delta) -> "Series":
        """Multiply by var^delta (exponent shift)."""
        dkey = Fraction(delta) * self.e
        if dkey.denominator != 1:
            raise SeriesError("shift must respect the exponent lattice")
        d = dkey.numerator
        return Series(self.var, {k + d: v for k, v in self.coeffs.items()},
                      trunc=None if self.trunc is None else self.trunc + Fraction(delta),
                      e=self.e, backend=self.backend, _raw=True)

    def even_part(self) -> "Series":
        """Terms with even integer exponent."""
        keep = {}
        for k, v in self.coeffs.items():
            if k % self.e == 0 and (k // self.e) % 2 == 0:
                keep[k] = v
        return Series(self.var, keep, trunc=self.trunc, e=self.e,
                      backend=self.backend, _raw=True)

    def substitute_neg(self) -> "Series":
        """t -> -t (valid for integer-exponent series)."""
        if any(k % self.e for k in self.coeffs):
            raise SeriesError("sign substitution requires integer exponents")
        return Series(self.var,
                      {k: (v if (k // self.e) % 2 == 0 else -v) for k, v in self.coeffs.items()},
                      trunc=self.trunc, e=self.e, backend=self.backend, _raw=True)


def _is_zero_scalar(v) -> bool:
    return not bool(v)


def _min_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _mul_trunc(a: Series, b: Series):
    """Truncation of a product: min(Ta + ord(b), Tb + ord(a))."""
    t = None
    if a.trunc is not None:
        ob = b.order() if b.coeffs else (b.trunc if b.trunc is not None else Fraction(0))
        t = a.trunc + ob
    if b.trunc is not None:
        oa = a.order() if a.coeffs else (a.trunc if a.trunc is not None else Fraction(0))
        t2 = b.trunc + oa
        t = t2 if t is None else min(t, t2)
    return t


# ---------------------------------------------------------------------------
# Half-integer Gamma weights and the Watson/Laplace transform


def gamma_half_ratio(m: int) -> Fraction:
    """sqrt(pi)/Gamma(m+1/2) as an exact rational, any integer m.

    For m >= 0 this is 2^m/(2m-1)!!; for m = -j < 0 it is (-1)^j (2j-1)!!/2^j.
    """
    if m >= 0:
        num, den = 1 << m, 1
        for j in range(3, 2 * m, 2):
            den *= j
        return Fraction(num, den)
    j = -m
    num = 1
    for i in range(1, 2 * j, 2):
        num *= i
    return Fraction((-1) ** j * num, 1 << j)


def double_factorial(n: int) -> int:
    """(n)!! for n >= -1."""
    if n in (-1, 0):
        return 1
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def watson_laplace(f: Series, out_var: str = "z") -> Series:
    """Term-wise Laplace/Watson transform of a vanishing-cycle expansion.

    Maps the coefficient at (lam-u)^(k-1/2) to the z^k coefficient weighted
    by (-1)^k Gamma(k+1/2)/sqrt(pi), so that transforming the period
    expansion of a matrix series recovers that matrix series exactly
    (see :func:`toprec.localrec.period_series`).
    """
    if f.e != 2:
        raise SeriesError("not a vanishing-cycle expansion: integer-exponent support")
    data = {}
    for k2, v in f.coeffs.items():
        if k2 % 2 == 0:
            raise SeriesError("not a vanishing-cycle expansion: integer exponent present")
        k = (k2 + 1) // 2  # exponent = k - 1/2
        w = gamma_half_ratio(k)
        data[k] = v * ((-1) ** (k % 2) / w)
    t = None
    if f.trunc is not None:
        t = (f.trunc + Fraction(1, 2))
    return Series(out_var, data, trunc=t, e=1, backend=f.backend)
