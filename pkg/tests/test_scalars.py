"""Backend arithmetic: exact field laws and precision discipline."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from toprec.scalars import (EXACT, BackendError, BigFloat, GaussianRational,
                            backend_of, parse_backend)

gr = st.builds(GaussianRational,
               st.fractions(min_value=-10, max_value=10),
               st.fractions(min_value=-10, max_value=10))


class TestGaussianRational:
    @given(gr, gr, gr)
    @settings(max_examples=60, deadline=None)
    def test_ring_laws(self, a, b, c):
        assert (a + b) * c == a * c + b * c
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert a * (b * c) == (a * b) * c

    @given(gr)
    @settings(max_examples=40, deadline=None)
    def test_inverse(self, a):
        if not a:
            with pytest.raises(ZeroDivisionError):
                a.inverse()
        else:
            assert a * a.inverse() == 1

    def test_sqrt_in_field(self):
        i2 = GaussianRational(0, 2)  # 2i = (1+i)^2
        r = i2.sqrt()
        assert r == GaussianRational(1, 1)
        assert GaussianRational(4).sqrt() == GaussianRational(2)
        assert GaussianRational(-4).sqrt() == GaussianRational(0, 2)
        assert GaussianRational(2).sqrt() is None  # sqrt(2) not in Q(i)

    def test_sqrt_principal_branch(self):
        r = GaussianRational(0, -2).sqrt()  # -2i = (1-i)^2
        assert r.re > 0

    def test_exact_backend_sqrt_raises_outside_field(self):
        with pytest.raises(BackendError):
            EXACT.sqrt(GaussianRational(2))


class TestBigComplex:
    def test_precision_is_pinned(self):
        bf = BigFloat(45)
        x = bf.from_fraction(Fraction(1, 3))
        y = (x * x) * 9
        assert abs(y - 1) < 1e-43

    def test_mixing_precisions_raises(self):
        a = BigFloat(40).one()
        b = BigFloat(50).one()
        with pytest.raises(BackendError):
            a + b

    def test_minimum_precision_enforced(self):
        with pytest.raises(BackendError):
            BigFloat(10)

    def test_negation_keeps_precision(self):
        bf = BigFloat(60)
        x = bf.from_fraction(Fraction(2, 3))
        assert abs((-x) + x) == 0.0

    def test_sqrt_principal(self):
        bf = BigFloat(40)
        v = bf.sqrt(bf.from_fraction(-4))
        assert abs(v - GaussianRational(0, 2)) < 1e-35

    def test_fraction_coercion_exactness(self):
        bf = BigFloat(60)
        x = bf.from_fraction(Fraction(1, 7)) * 7
        assert abs(x - 1) < 1e-57

    def test_gaussian_coercion(self):
        bf = BigFloat(40)
        z = bf.one() * GaussianRational(Fraction(1, 2), Fraction(-3, 2))
        assert abs(z - GaussianRational(Fraction(1, 2), Fraction(-3, 2))) < 1e-35


class TestBackendPlumbing:
    def test_parse(self):
        assert parse_backend("exact") is EXACT
        assert parse_backend("bigfloat:42").dps == 42
        with pytest.raises(BackendError):
            parse_backend("decimal")

    def test_backend_of(self):
        assert backend_of(GaussianRational(1)).exact
        assert backend_of(BigFloat(33).one()).dps == 33
