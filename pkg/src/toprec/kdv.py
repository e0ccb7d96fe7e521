"""Independent oracle for psi-class intersection numbers.

Implements the classical string/dilaton-compatible recursion on the
normalized quantities  F(g; d_1..d_n) = <tau_{d_1}...tau_{d_n}>_g *
prod (2 d_i + 1)!!  with seeds F(0; 0,0,0) = 1 and F(1; 1) = 3/8... more
precisely F(1; (d)) = delta_{d,1}/8 * 3!! -- see ``psi_correlator``.
This is deliberately separate from the residue engines it is used to
audit: nothing here touches series, curves, or matrices.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .series import double_factorial

__all__ = ["psi_correlator", "normalized_f"]


@lru_cache(maxsize=None)
def normalized_f(g: int, ds: tuple) -> Fraction:
    """F(g; ds) = <prod tau_{d_i}>_g * prod (2 d_i + 1)!!."""
    n = len(ds)
    if g < 0 or n < 1:
        return Fraction(0)
    if sum(ds) != 3 * g - 3 + n:
        return Fraction(0)
    ds = tuple(sorted(ds, reverse=True))
    if g == 0 and n == 3:
        return Fraction(1)
    if g == 1 and n == 1:
        return Fraction(1, 8) if ds[0] == 1 else Fraction(0)
    i, rest = ds[0], ds[1:]
    if i == 0:
        # every stable correlator beyond the seeds has a positive first
        # index after sorting; all-zero input only occurs for (0,3)/(1,1)
        return Fraction(0)
    total = Fraction(0)
    # term 1: joining with each remaining marked point
    for j in range(len(rest)):
        dj = rest[j]
        new = (i + dj - 1,) + rest[:j] + rest[j + 1:]
        total += (2 * dj + 1) * normalized_f(g, tuple(sorted(new, reverse=True)))
    # term 2: boundary, non-separating
    sub = Fraction(0)
    for a in range(i - 1):
        b = i - 2 - a
        sub += normalized_f(g - 1, tuple(sorted((a, b) + rest, reverse=True)))
    # term 3: boundary, separating
    for a in range(i - 1):
        b = i - 2 - a
        for g1 in range(g + 1):
            g2 = g - g1
            for mask in range(1 << len(rest)):
                s1 = tuple(rest[k] for k in range(len(rest)) if mask >> k & 1)
                s2 = tuple(rest[k] for k in range(len(rest)) if not mask >> k & 1)
                f1 = normalized_f(g1, tuple(sorted((a,) + s1, reverse=True)))
                if not f1:
                    continue
                f2 = normalized_f(g2, tuple(sorted((b,) + s2, reverse=True)))
                sub += f1 * f2
    total += sub / 2
    return total


def psi_correlator(*ds: int) -> Fraction:
    """<tau_{d_1} ... tau_{d_n}>_g with g fixed by the dimension count."""
    n = len(ds)
    s = sum(ds)
    if (s - n) % 3:
        raise ValueError("indices do not satisfy the dimension constraint")
    g = (s - n) // 3 + 1
    if g < 0:
        raise ValueError("negative genus")
    f = normalized_f(g, tuple(sorted(ds, reverse=True)))
    denom = 1
    for d in ds:
        denom *= double_factorial(2 * d + 1)
    return f / denom
