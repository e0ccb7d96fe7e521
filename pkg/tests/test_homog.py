"""The homogeneous coefficient ring: derivations, grading, evaluation."""

from fractions import Fraction

import pytest

from toprec.homog import HomogError, HomogeneousRatCoeff as H
from toprec.scalars import BigFloat, GaussianRational


def test_normalized_pair_order():
    a = H.diff_power(3, 2, 0, 1)      # (u3 - u1) = -(u1 - u3)
    b = H.diff_power(3, 0, 2, 1, -1)
    assert a == b


def test_product_and_division():
    x = H.diff_power(2, 0, 1, 2, Fraction(3))
    y = H.diff_power(2, 0, 1, -1)
    assert x * y == H.diff_power(2, 0, 1, 1, Fraction(3))
    assert x / H.diff_power(2, 0, 1, 1) == H.diff_power(2, 0, 1, 1, 3)


def test_non_monomial_division_rejected():
    x = H.diff_power(2, 0, 1, 1) + H.const(2, 1)
    with pytest.raises(HomogError):
        H.const(2, 1) / x


def test_derivation_leibniz():
    x = H.diff_power(3, 0, 1, 2)
    y = H.diff_power(3, 1, 2, 1)
    lhs = (x * y).d(1)
    rhs = x.d(1) * y + x * y.d(1)
    assert lhs == rhs


def test_derivation_signs():
    x = H.diff_power(2, 0, 1, 1)
    assert x.d(0) == H.const(2, 1)
    assert x.d(1) == H.const(2, -1)


def test_euler_degree():
    x = H.diff_power(3, 0, 1, 2) * H.diff_power(3, 1, 2, -3)
    assert x.euler_degree() == -1
    mixed = x + H.const(3, 1)
    assert mixed.euler_degree() is None


def test_evaluate():
    bf = BigFloat(40)
    x = H.diff_power(2, 0, 1, -2, GaussianRational(0, 1))
    u = [bf.from_fraction(3), bf.from_fraction(1)]
    got = x.evaluate(u)
    assert abs(got - GaussianRational(0, Fraction(1, 4))) < 1e-35
