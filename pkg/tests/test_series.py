"""Series arithmetic: spec'd examples plus round-trip properties."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from toprec.scalars import EXACT, BigFloat, GaussianRational
from toprec.series import Series, SeriesDepthError, SeriesError, watson_laplace

B = EXACT


def S(coeffs, trunc=None, e=1, var="t"):
    return Series(var, {k: GaussianRational(v) for k, v in coeffs.items()},
                  trunc=trunc, e=e, backend=B)


class TestArith:
    def test_difference_of_squares(self):
        one_plus = S({0: 1, 1: 1})
        one_minus = S({0: 1, 1: -1})
        assert (one_plus * one_minus) == S({0: 1, 2: -1})

    def test_geometric_series(self):
        f = Series.one("t", B, trunc=6) / S({0: 1, 1: -1}, trunc=6)
        assert f.coeff(0) == 1 and f.coeff(3) == 1 and f.coeff(5) == 1

    def test_laurent_shift(self):
        f = S({-1: 1, 0: 1}) * S({1: 1})
        assert f == S({0: 1, 1: 1})

    def test_truncation_propagates_min(self):
        f = S({0: 1}, trunc=3) + S({0: 1}, trunc=5)
        assert f.trunc == 3

    def test_mul_truncation_shifts_by_order(self):
        f = S({1: 1}, trunc=4) * S({2: 1})
        assert f.trunc == 6
        with pytest.raises(SeriesDepthError):
            f.coeff(7)

    def test_unknown_coefficient_raises(self):
        f = S({0: 1}, trunc=2)
        with pytest.raises(SeriesDepthError):
            f.coeff(2)

    def test_divide_by_zero_leading(self):
        with pytest.raises(SeriesError):
            Series.zero("t", B).inverse()


class TestCompose:
    def test_square_of_t_plus_t3(self):
        f = S({2: 1})
        g = S({1: 1, 3: 1}, trunc=6)
        h = f.compose(g)
        assert h.coeff(2) == 1 and h.coeff(4) == 2

    def test_identity_outer(self):
        g = S({1: 2, 2: 5}, trunc=8)
        assert S({1: 1}).compose(g) == g

    def test_geometric_outer(self):
        f = Series.one("t", B, trunc=8) / S({0: 1, 1: -1}, trunc=8)
        h = f.compose(S({2: 1}, trunc=8))
        assert h.coeff(0) == 1 and h.coeff(2) == 1 and h.coeff(4) == 1
        assert h.coeff(3) == 0

    def test_nonpositive_order_rejected(self):
        with pytest.raises(SeriesError):
            S({2: 1}).compose(S({0: 1, 1: 1}, trunc=4))


class TestReversion:
    def test_t_plus_t2(self):
        f = S({1: 1, 2: 1}, trunc=5)
        g = f.reversion()
        # independent oracle: back-substitution f(g) = t
        assert f.compose(g) == S({1: 1}, trunc=5)
        assert g.coeff(1) == 1 and g.coeff(2) == -1
        assert g.coeff(3) == 2 and g.coeff(4) == -5

    def test_linear(self):
        assert S({1: 2}).reversion() == S({1: Fraction(1, 2)})

    def test_identity(self):
        assert S({1: 1}).reversion() == S({1: 1})

    def test_not_order_one(self):
        with pytest.raises(SeriesError):
            S({2: 1}).reversion()

    @given(st.lists(st.integers(-4, 4), min_size=0, max_size=4))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_random(self, tail):
        coeffs = {1: 1}
        for j, c in enumerate(tail):
            if c:
                coeffs[j + 2] = c
        f = S(coeffs, trunc=7)
        g = f.reversion()
        assert f.compose(g) == S({1: 1}, trunc=7)


class TestSqrt:
    def test_binomial(self):
        f = S({0: 1, 1: 2}, trunc=4)
        r = f.sqrt()
        assert r.coeff(0) == 1 and r.coeff(1) == 1
        assert r.coeff(2) == Fraction(-1, 2)
        assert (r * r).coeffs == f.truncate(r.trunc).coeffs

    def test_principal_monomial(self):
        assert S({2: 4}).sqrt() == S({1: 2})

    def test_puiseux_case(self):
        r = S({1: 1}, trunc=3).sqrt(allow_ramified=True)
        assert r.e == 2
        assert r.coeff(Fraction(1, 2)) == 1

    def test_odd_order_needs_flag(self):
        with pytest.raises(SeriesError):
            S({1: 1}, trunc=3).sqrt()

    @given(st.lists(st.integers(-3, 3), min_size=1, max_size=4),
           st.sampled_from([1, 4, 9]))
    @settings(max_examples=25, deadline=None)
    def test_square_round_trip(self, tail, lead):
        coeffs = {0: lead}
        for j, c in enumerate(tail):
            if c:
                coeffs[j + 1] = c
        f = S(coeffs, trunc=6)
        r = f.sqrt()
        assert (r * r).coeffs == f.truncate((r * r).trunc).coeffs


class TestResidueCalculus:
    def test_simple_pole(self):
        assert S({-1: 1, 0: 2, 1: 1}).residue() == 1

    def test_no_residue(self):
        assert S({-2: 1}).residue() == 0

    def test_multi_pole(self):
        assert S({-1: 3, -3: 5}).residue() == 3

    def test_depth_guard(self):
        with pytest.raises(SeriesDepthError):
            S({-3: 1}, trunc=-2).residue()

    def test_derivative_has_no_residue(self):
        f = S({-3: 7, -2: 1, 0: 4, 2: 9})
        assert f.differentiate().residue() == 0

    def test_antiderivative_log_obstruction(self):
        with pytest.raises(SeriesError):
            S({-1: 1}).antidifferentiate()

    def test_antiderivative_round_trip(self):
        f = S({0: 3, 1: 5, 4: -2}, trunc=6)
        assert f.antidifferentiate().differentiate().coeffs == f.coeffs


class TestWatsonLaplace:
    def test_normalization_anchor(self):
        # k=0 term with unit weight -> constant 1
        f = Series("lam", {Fraction(-1, 2): GaussianRational(1)}, e=2, backend=B)
        z = watson_laplace(f)
        assert z.coeff(0) == 1

    def test_k1_sign(self):
        # a unit matrix coefficient sits inside weight -c(1) at exponent 1/2:
        # the transform must return -z  (alternating sign rule)
        from toprec.series import gamma_half_ratio
        w = gamma_half_ratio(1)
        f = Series("lam", {Fraction(1, 2): GaussianRational(w)}, e=2, backend=B)
        z = watson_laplace(f)
        assert z.coeff(1) == -1

    def test_linearity(self):
        f = Series("lam", {Fraction(-1, 2): GaussianRational(2),
                           Fraction(3, 2): GaussianRational(5)}, e=2, backend=B)
        g = Series("lam", {Fraction(1, 2): GaussianRational(-1)}, e=2, backend=B)
        lhs = watson_laplace(f + g)
        rhs = watson_laplace(f) + watson_laplace(g)
        assert lhs == rhs

    def test_integer_support_rejected(self):
        f = Series("lam", {1: GaussianRational(1)}, e=2, backend=B)
        with pytest.raises(SeriesError):
            watson_laplace(f)


class TestBackendAgreement:
    def test_pipeline_exact_vs_bigfloat(self):
        bf = BigFloat(40)
        fe = S({0: 1, 1: Fraction(1, 3), 2: -2}, trunc=8)
        fb = Series("t", {k: bf.from_fraction(Fraction(v.re)) for k, v in
                          zip((0, 1, 2), (GaussianRational(1),
                                          GaussianRational(Fraction(1, 3)),
                                          GaussianRational(-2)))},
                    trunc=8, backend=bf)
        ge = (fe * fe).inverse().sqrt()
        gb = (fb * fb).inverse().sqrt()
        for k, v in ge.items():
            w = gb.coeff(k)
            assert abs(w - GaussianRational(v.re, v.im)) < 1e-30
