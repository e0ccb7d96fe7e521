"""The intersection-number oracle against published values."""

from fractions import Fraction

import pytest

from toprec.kdv import normalized_f, psi_correlator


PUBLISHED = [
    ((0, 0, 0), Fraction(1)),
    ((1, 0, 0, 0), Fraction(1)),
    ((2, 0, 0, 0, 0), Fraction(1)),
    ((1, 1, 0, 0, 0), Fraction(2)),
    ((1,), Fraction(1, 24)),
    ((2, 0), Fraction(1, 24)),
    ((1, 1), Fraction(1, 24)),
    ((3, 0, 0), Fraction(1, 24)),
    ((2, 1, 0), Fraction(1, 12)),
    ((1, 1, 1), Fraction(1, 12)),
    ((4,), Fraction(1, 1152)),
    ((7,), Fraction(1, 82944)),
    ((7, 1), Fraction(5, 82944)),
    ((6, 2), Fraction(77, 414720)),
    ((5, 3), Fraction(503, 1451520)),
    ((4, 4), Fraction(607, 1451520)),
    ((3, 2), Fraction(29, 5760)),
]


@pytest.mark.parametrize("ds,want", PUBLISHED)
def test_published_values(ds, want):
    assert psi_correlator(*ds) == want


def test_dimension_constraint_rejected():
    with pytest.raises(ValueError):
        psi_correlator(2)


def test_string_equation():
    # <tau_0 prod tau_d> = sum_j <... tau_{d_j - 1} ...>
    base = (2, 1, 1)
    lhs = psi_correlator(0, *base)
    rhs = sum(psi_correlator(*(base[:j] + (base[j] - 1,) + base[j + 1:]))
              for j in range(len(base)) if base[j] > 0)
    assert lhs == rhs


def test_dilaton_equation():
    # <tau_1 prod tau_d> = (2g - 2 + n) <prod tau_d>
    base = (4,)
    g = 2
    lhs = psi_correlator(1, *base)
    assert lhs == (2 * g - 2 + 1) * psi_correlator(*base)


def test_normalized_seeds():
    assert normalized_f(0, (0, 0, 0)) == 1
    assert normalized_f(1, (1,)) == Fraction(1, 8)
    assert normalized_f(2, (4,)) == Fraction(105, 128)
