"""Ring of homogeneous rational coefficients in canonical coordinates.

Elements are finite sums  c * prod_{i<j} (u_i - u_j)^(e_ij)  with exact
Gaussian-rational c and integer exponents.  The ring is closed under the
derivations d/d(u_i) and under the Euler field, which is all the R-matrix
reconstruction needs; division is deliberately restricted to monomial
denominators.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import GaussianRational

__all__ = ["HomogeneousRatCoeff", "HomogError"]


class HomogError(ValueError):
    pass


def _norm_pair(i, j):
    """Return ((i,j), sign) with i < j."""
    if i == j:
        raise HomogError("difference (u_i - u_i) is zero")
    return ((i, j), 1) if i < j else ((j, i), -1)


class HomogeneousRatCoeff:
    """Finite sum of monomials in the pairwise differences u_i - u_j.

    ``terms`` maps a frozenset-free canonical key -- a sorted tuple of
    ((i, j), exponent) with i < j and nonzero exponent -- to a
    GaussianRational coefficient.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {}
        if terms:
            for key, c in terms.items():
                if not bool(c):
                    continue
                self.terms[key] = self.terms.get(key, GaussianRational(0)) + c
            self.terms = {k: v for k, v in self.terms.items() if bool(v)}

    # -- constructors ------------------------------------------------------

    @classmethod
    def const(cls, n: int, c) -> "HomogeneousRatCoeff":
        c = c if isinstance(c, GaussianRational) else GaussianRational(c)
        return cls(n, {(): c})

    @classmethod
    def diff_power(cls, n: int, i: int, j: int, e: int, c=1) -> "HomogeneousRatCoeff":
        """c * (u_i - u_j)^e."""
        c = c if isinstance(c, GaussianRational) else GaussianRational(c)
        (pair, sign) = _norm_pair(i, j)
        if sign < 0 and e % 2:
            c = -c
        key = ((pair, e),) if e else ()
        return cls(n, {key: c})

    def zero_like(self):
        return HomogeneousRatCoeff(self.n)

    # -- ring ops ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, HomogeneousRatCoeff):
            if other.n != self.n:
                raise HomogError("mixing coefficient rings of different rank")
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return HomogeneousRatCoeff.const(self.n, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for k, v in o.terms.items():
            out[k] = out.get(k, GaussianRational(0)) + v
        return HomogeneousRatCoeff(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return HomogeneousRatCoeff(self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = {}
        for k1, v1 in self.terms.items():
            d1 = dict(k1)
            for k2, v2 in o.terms.items():
                d = dict(d1)
                for pair, e in k2:
                    d[pair] = d.get(pair, 0) + e
                key = tuple(sorted((p, e) for p, e in d.items() if e))
                c = v1 * v2
                out[key] = out.get(key, GaussianRational(0)) + c
        return HomogeneousRatCoeff(self.n, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            c = other if isinstance(other, GaussianRational) else GaussianRational(other)
            inv = c.inverse()
            return HomogeneousRatCoeff(self.n, {k: v * inv for k, v in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(o.terms) != 1:
            raise HomogError("division restricted to monomial denominators")
        ((key, c),) = o.terms.items()
        recip = HomogeneousRatCoeff(
            self.n, {tuple((p, -e) for p, e in key): c.inverse()})
        return self * recip

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items(), key=repr))))

    def __abs__(self) -> float:
        # used only by generic zero-checks/diagnostics
        return sum(abs(v) for v in self.terms.values())

    def __repr__(self):
        if not self.terms:
            return "HRC(0)"
        bits = []
        for key, c in sorted(self.terms.items()):
            mono = "*".join(f"(u{i+1}-u{j+1})^{e}" for (i, j), e in key)
            bits.append(f"({c})" + ("*" + mono if mono else ""))
        return "HRC[" + " + ".join(bits) + "]"

    # -- derivations and grading --------------------------------------------

    def d(self, k: int) -> "HomogeneousRatCoeff":
        """Partial derivative with respect to u_k (0-based index)."""
        out = HomogeneousRatCoeff(self.n)
        for key, c in self.terms.items():
            for idx, ((i, j), e) in enumerate(key):
                s = 1 if k == i else (-1 if k == j else 0)
                if s == 0 or e == 0:
                    continue
                d = dict(key)
                d[(i, j)] = e - 1
                newkey = tuple(sorted((p, ee) for p, ee in d.items() if ee))
                out = out + HomogeneousRatCoeff(
                    self.n, {newkey: c * Fraction(e * s)})
        return out

    def euler_degree(self) -> int | None:
        """Common total degree of all terms; None if mixed or zero."""
        degs = {sum(e for _, e in key) for key in self.terms}
        if len(degs) != 1:
            return None
        return degs.pop()

    def evaluate(self, u_values):
        """Evaluate at numeric u (list of backend scalars)."""
        total = None
        for key, c in self.terms.items():
            term = None
            for (i, j), e in key:
                diff = u_values[i] - u_values[j]
                p = diff ** e if e >= 0 else (1 / diff) ** (-e)
                term = p if term is None else term * p
            term = c if term is None else term * c
            total = term if total is None else total + term
        if total is None:
            zero = u_values[0] - u_values[0]
            return zero
        return total
