"""Matrix-valued power series 1 + R1 z + R2 z^2 + ... and their algebra.

Entries may be any library scalar (exact, bigfloat) or a
:class:`toprec.homog.HomogeneousRatCoeff`; the matrix layer is agnostic.
"""

from __future__ import annotations

__all__ = ["MatrixSeries", "MatrixSeriesError", "mat_mul", "mat_identity"]


class MatrixSeriesError(ValueError):
    pass


def mat_identity(n, one, zero):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_zero(n, zero):
    return [[zero for _ in range(n)] for _ in range(n)]


def mat_mul(a, b):
    n = len(a)
    m = len(b[0])
    k = len(b)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[i][0] * b[0][j]
            for l in range(1, k):
                acc = acc + a[i][l] * b[l][j]
            row.append(acc)
        out.append(row)
    return out


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    return [[x * c for x in row] for row in a]


def mat_transpose(a):
    return [list(col) for col in zip(*a)]


def mat_map(a, fn):
    return [[fn(x) for x in row] for row in a]


def mat_max_abs(a) -> float:
    return max(abs(x) for row in a for x in row)


class MatrixSeries:
    """Truncated series sum_k C_k z^k with square-matrix coefficients.

    ``order`` is the number of known coefficients (z^k for k < order).
    ``unit_leading`` asserts C_0 = 1 at construction, which every R- and
    S-type series in the library satisfies.
    """

    __slots__ = ("n", "coeffs", "order", "zero", "one")

    def __init__(self, coeffs, zero, one, unit_leading=False):
        self.coeffs = [list(map(list, (row for row in c))) for c in coeffs]
        self.n = len(coeffs[0])
        self.order = len(coeffs)
        self.zero = zero
        self.one = one
        if unit_leading:
            c0 = self.coeffs[0]
            for i in range(self.n):
                for j in range(self.n):
                    want = one if i == j else zero
                    if not _equal(c0[i][j], want):
                        raise MatrixSeriesError(
                            "leading coefficient must be the identity"
                        )

    @classmethod
    def identity(cls, n, order, zero, one):
        coeffs = [mat_identity(n, one, zero)]
        coeffs += [mat_zero(n, zero) for _ in range(order - 1)]
        return cls(coeffs, zero, one, unit_leading=True)

    def coeff(self, k):
        if k >= self.order:
            raise MatrixSeriesError(f"coefficient z^{k} beyond order {self.order}")
        return self.coeffs[k]

    def truncate(self, order):
        return MatrixSeries(self.coeffs[:order], self.zero, self.one)

    def map(self, fn):
        return MatrixSeries([mat_map(c, fn) for c in self.coeffs], fn(self.zero), fn(self.one))

    def __mul__(self, other):
        if not isinstance(other, MatrixSeries):
            return NotImplemented
        if other.n != self.n:
            raise MatrixSeriesError("dimension mismatch")
        order = min(self.order, other.order)
        out = []
        for k in range(order):
            acc = mat_zero(self.n, self.zero)
            for a in range(k + 1):
                acc = mat_add(acc, mat_mul(self.coeffs[a], other.coeffs[k - a]))
            out.append(acc)
        return MatrixSeries(out, self.zero, self.one)

    def __add__(self, other):
        order = min(self.order, other.order)
        return MatrixSeries(
            [mat_add(a, b) for a, b in zip(self.coeffs[:order], other.coeffs[:order])],
            self.zero, self.one)

    def __sub__(self, other):
        order = min(self.order, other.order)
        return MatrixSeries(
            [mat_sub(a, b) for a, b in zip(self.coeffs[:order], other.coeffs[:order])],
            self.zero, self.one)

    def transpose(self):
        return MatrixSeries([mat_transpose(c) for c in self.coeffs], self.zero, self.one)

    def negate_z(self):
        """z -> -z."""
        return MatrixSeries(
            [c if k % 2 == 0 else mat_scale(c, -1) for k, c in enumerate(self.coeffs)],
            self.zero, self.one)

    def minus_identity(self):
        out = [list(map(list, c)) for c in self.coeffs]
        for i in range(self.n):
            out[0][i][i] = out[0][i][i] - self.one
        return MatrixSeries(out, self.zero, self.one)

    def symplectic_defect(self):
        """R(z) R(-z)^T - 1, same truncation order."""
        prod = self * self.negate_z().transpose()
        return prod.minus_identity()

    def max_abs(self) -> float:
        return max(mat_max_abs(c) for c in self.coeffs)

    def inverse(self):
        """Series inverse; requires invertible scalar entries and C_0 = 1."""
        c0 = self.coeffs[0]
        for i in range(self.n):
            for j in range(self.n):
                want = self.one if i == j else self.zero
                if not _equal(c0[i][j], want):
                    raise MatrixSeriesError("inverse implemented for unit leading term")
        inv = [mat_identity(self.n, self.one, self.zero)]
        for k in range(1, self.order):
            acc = mat_zero(self.n, self.zero)
            for a in range(1, k + 1):
                acc = mat_add(acc, mat_mul(self.coeffs[a], inv[k - a]))
            inv.append(mat_scale(acc, -1))
        return MatrixSeries(inv, self.zero, self.one)

    def __repr__(self):
        return f"MatrixSeries(n={self.n}, order={self.order})"


def _equal(a, b) -> bool:
    d = a - b
    return not bool(d)
