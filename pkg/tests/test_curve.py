"""Covers, charts, Bergman data, good basis, primary differentials."""

from fractions import Fraction

import pytest

from toprec.curve import (INF, BranchedCover, CurveError, Differential, Poly,
                          RationalFunction, beta_matrix, c_vector,
                          cover_from_spec, good_basis_form,
                          primary_differential, vanishing_cycle_integral,
                          vc_integral_scaled)
from toprec.scalars import EXACT, BigFloat, GaussianRational
from toprec.series import Series

BF = BigFloat(60)


def airy(backend=EXACT, order=12):
    num = Poly.from_fractions([0, 0, Fraction(1, 2)], backend)
    return BranchedCover(RationalFunction(num, Poly.from_fractions([1], backend)),
                         chart_order=order, label="airy")


def cubic(backend=BF, order=16):
    # x = t^3/3 - t
    num = Poly.from_fractions([0, -1, 0, Fraction(1, 3)], backend)
    return BranchedCover(RationalFunction(num, Poly.from_fractions([1], backend)),
                         chart_order=order)


def tplus1t(backend=BF, order=16):
    # x = t + 1/t
    num = Poly.from_fractions([1, 0, 1], backend)
    den = Poly.from_fractions([0, 1], backend)
    return BranchedCover(RationalFunction(num, den),
                         poles=[(INF, 1), (backend.zero(), 1)], chart_order=order)


class TestRamification:
    def test_airy(self):
        cov = airy()
        assert cov.N == 1
        assert cov.poles == [(INF, 2)]
        assert cov.ram_points[0] == GaussianRational(0)
        assert cov.crit_values[0] == GaussianRational(0)

    def test_cubic_hand_solved(self):
        cov = cubic()
        # dx = t^2 - 1: p = +-1, u = x(p) = -+2/3; sorted by Re(u)
        assert cov.N == 2
        assert abs(cov.ram_points[0] - 1) < 1e-50
        assert abs(cov.ram_points[1] + 1) < 1e-50
        assert abs(cov.crit_values[0] + Fraction(2, 3)) < 1e-50
        assert abs(cov.crit_values[1] - Fraction(2, 3)) < 1e-50

    def test_t_plus_1_over_t(self):
        cov = tplus1t()
        # dx = 1 - 1/t^2: p = +-1, u = +-2
        assert cov.N == 2
        assert abs(cov.crit_values[0] + 2) < 1e-50
        assert abs(cov.crit_values[1] - 2) < 1e-50

    def test_riemann_hurwitz_count(self):
        for cov, want in ((airy(), 1), (cubic(), 2), (tplus1t(), 2)):
            assert cov.N == cov.expected_N == want

    def test_non_generic_rejected(self):
        # x = t^3/3 has a double zero of dx at 0
        num = Poly.from_fractions([0, 0, 0, Fraction(1, 3)], BF)
        with pytest.raises(CurveError):
            BranchedCover(RationalFunction(num, Poly.from_fractions([1], BF)))

    def test_coincident_critical_values_rejected(self):
        # x = t^4/4 - t^2/2: dx = t^3 - t, p in {0, +-1}, u(-1) = u(1)
        num = Poly.from_fractions([0, 0, Fraction(-1, 2), 0, Fraction(1, 4)], BF)
        with pytest.raises(CurveError):
            BranchedCover(RationalFunction(num, Poly.from_fractions([1], BF)))


class TestMorseCharts:
    def test_airy_chart_is_global_coordinate(self):
        cov = airy()
        ch = cov.chart(0)
        assert ch.ti_of_s == Series("s", {1: GaussianRational(1)},
                                    trunc=ch.ti_of_s.trunc)

    def test_cubic_chart_leading(self):
        cov = cubic()
        # t_1 = sqrt(2)(t-1) + sqrt(2)/6 (t-1)^2 + ...
        ch = cov.chart(0)
        import math
        assert abs(ch.ti_of_s.coeff(1) - GaussianRational(0)) > 0
        assert abs(abs(ch.ti_of_s.coeff(1)) - math.sqrt(2)) < 1e-12
        ratio = ch.ti_of_s.coeff(2) / ch.ti_of_s.coeff(1)
        assert abs(ratio - Fraction(1, 6)) < 1e-50

    def test_defining_identity_on_random_cover(self):
        num = Poly.from_fractions([1, 3, Fraction(-1, 2), 0, Fraction(1, 4)], BF)
        cov = BranchedCover(RationalFunction(num, Poly.from_fractions([1], BF)),
                            chart_order=14)
        for i in range(cov.N):
            ch = cov.chart(i)
            f = ch.s_of_ti.truncate(12)
            xf = cov.x.expand_at(ch.p, 14).compose(f)
            err = xf - ch.u - Series("ti", {2: BF.from_fraction(Fraction(1, 2))},
                                     backend=BF)
            assert max((abs(v) for _, v in err.items()), default=0.0) < 1e-45

    def test_round_trip(self):
        cov = cubic()
        ch = cov.chart(1)
        comp = ch.ti_of_s.truncate(10).compose(ch.s_of_ti.truncate(10))
        assert abs(comp.coeff(1) - 1) < 1e-50
        assert all(abs(comp.coeff(k)) < 1e-45 for k in range(2, 8))


class TestBergman:
    def test_airy_all_vanish(self):
        berg = airy().bergman(3)
        assert all(not bool(v) for v in berg.table[(0, 0)].values())

    def test_cubic_B00_magnitude(self):
        berg = cubic().bergman(2)
        assert abs(abs(berg.coeff(0, 1, 0, 0)) - Fraction(1, 8)) < 1e-50

    def test_symmetry(self):
        num = Poly.from_fractions([1, 3, Fraction(-1, 2), 0, Fraction(1, 4)], BF)
        cov = BranchedCover(RationalFunction(num, Poly.from_fractions([1], BF)),
                            chart_order=18)
        berg = cov.bergman(2)
        for i in range(cov.N):
            for j in range(cov.N):
                for m in range(3):
                    for n in range(3 - m):
                        d = berg.coeff(i, j, m, n) - berg.coeff(j, i, n, m)
                        assert abs(d) < 1e-45

    def test_beta_is_B00(self):
        cov = cubic()
        berg = cov.bergman(1)
        bm = beta_matrix(berg)
        assert not bool(bm[0][0]) and not bool(bm[1][1])
        assert bm[0][1] == berg.coeff(0, 1, 0, 0)

    def test_cutoff_guard(self):
        berg = airy().bergman(2)
        with pytest.raises(CurveError):
            berg.coeff(0, 0, 4, 2)


class TestGoodBasis:
    def test_leading_coefficient_minus_one(self):
        for cov in (airy(), cubic(), tplus1t()):
            for i in range(cov.N):
                s = good_basis_form(cov, i).expand_in_chart(cov, i, 3)
                assert abs(s.coeff(0) + 1) < 1e-48

    def test_off_chart_holomorphic(self):
        cov = cubic()
        s = good_basis_form(cov, 0).expand_in_chart(cov, 1, 4)
        assert s.order() >= 0

    def test_case1_closed_form(self):
        # omega_i = -(t + p_i) dt / sqrt(2 p_i) for x = t^3/3 - t
        cov = cubic()
        i = 0
        p = cov.ram_points[i]
        gb = good_basis_form(cov, i).rational
        lead = cov.chart(i).lead
        for t_val in (Fraction(3), Fraction(-5, 2)):
            tv = BF.from_fraction(t_val)
            got = gb(tv)
            want = -(tv + p) / lead
            assert abs(got - want) < 1e-45

    def test_case2_closed_form(self):
        # omega_i = -p_i (t + p_i)/t^2 dt / sqrt(2 p_i) for x = t + 1/t
        cov = tplus1t()
        i = 1
        p = cov.ram_points[i]
        gb = good_basis_form(cov, i).rational
        lead = cov.chart(i).lead
        for t_val in (Fraction(3), Fraction(-5, 2)):
            tv = BF.from_fraction(t_val)
            got = gb(tv)
            want = -(tv + p) * p / (tv * tv) / (lead * p)
            assert abs(got - want) < 1e-45

    def test_c_vector_kronecker(self):
        cov = cubic()
        for j in range(2):
            c = c_vector(cov, good_basis_form(cov, j))
            for a in range(2):
                want = 1 if a == j else 0
                assert abs(c[a] - want) < 1e-48

    def test_c_vector_linearity(self):
        cov = cubic()
        phi1 = good_basis_form(cov, 0)
        phi2 = primary_differential(cov, "I", 0, 1)
        from toprec.curve import combine_differentials
        three = BF.from_fraction(3)
        combo = combine_differentials([three, BF.one()],
                                      [phi1, phi2])
        c1 = c_vector(cov, phi1)
        c2 = c_vector(cov, phi2)
        cc = c_vector(cov, combo)
        for a in range(2):
            assert abs(cc[a] - (three * c1[a] + c2[a])) < 1e-44

    def test_c_vector_rejects_pole_at_ramification(self):
        cov = cubic()
        # dt/(t-1) has a pole at the ramification point p = 1
        bad = Differential(RationalFunction(
            Poly.from_fractions([1], BF), Poly.from_fractions([-1, 1], BF)))
        with pytest.raises(CurveError):
            c_vector(cov, bad)


class TestPrimaryDifferentials:
    def test_airy_type_I_proportional_dt(self):
        cov = airy(BF)
        phi = primary_differential(cov, "I", 0, 1)
        r = phi.rational
        assert r.num.degree() == 0 and r.den.degree() == 0
        import math
        assert abs(abs(r.num.coeffs[0] / r.den.coeffs[0]) - 1 / math.sqrt(2)) < 1e-12

    def test_case1_type_I_shapes(self):
        cov = cubic()
        phi1 = primary_differential(cov, "I", 0, 1)
        assert phi1.rational.num.degree() == 0
        phi2 = primary_differential(cov, "I", 0, 2)
        assert phi2.rational.num.degree() == 1

    def test_type_III_residues(self):
        cov = tplus1t()
        phi = primary_differential(cov, "III", 1)
        assert abs(phi.residue_at(cov, cov.poles[1][0]) - 1) < 1e-50
        assert abs(phi.residue_at(cov, INF) + 1) < 1e-50

    def test_type_III_is_dt_over_t(self):
        cov = tplus1t()
        phi = primary_differential(cov, "III", 1).rational
        tv = BF.from_fraction(Fraction(7, 3))
        assert abs(phi(tv) - Fraction(3, 7)) < 1e-50

    def test_index_guards(self):
        cov = cubic()
        with pytest.raises(CurveError):
            primary_differential(cov, "I", 0, 3)
        with pytest.raises(CurveError):
            primary_differential(cov, "III", 0)
        with pytest.raises(CurveError):
            primary_differential(cov, "II", 0)


class TestVanishingCycles:
    def test_term_rules(self):
        b = EXACT
        f = Series("ti", {0: GaussianRational(1)}, backend=b)
        out = vc_integral_scaled(f)
        assert out.coeff(Fraction(1, 2)) == 2
        f = Series("ti", {1: GaussianRational(1)}, backend=b)
        assert vc_integral_scaled(f).is_zero()
        f = Series("ti", {2: GaussianRational(1)}, backend=b)
        out = vc_integral_scaled(f)
        # (2/3) (2 lam)^{3/2} = sqrt(2) * (4/3) lam^{3/2}
        assert out.coeff(Fraction(3, 2)) == Fraction(4, 3)

    def test_true_normalization(self):
        import math
        f = Series("ti", {0: BF.one()}, backend=BF)
        out = vanishing_cycle_integral(f)
        assert abs(abs(out.coeff(Fraction(1, 2))) - 2 * math.sqrt(2)) < 1e-12

    def test_log_term_rejected(self):
        f = Series("ti", {-1: GaussianRational(3)}, backend=EXACT)
        with pytest.raises(Exception):
            vc_integral_scaled(f)


class TestCoverSpec:
    def test_rational_record(self):
        cov = cover_from_spec({"coordinate": "rational",
                               "numerator": [0, 0, "1/2"]}, EXACT)
        assert cov.N == 1

    def test_named_families(self):
        cov = cover_from_spec({"family": "airy"}, EXACT)
        assert cov.label == "airy"
        cov = cover_from_spec({"family": "case1", "params": {"s1": -1}}, BF)
        assert cov.N == 2
        cov = cover_from_spec({"family": "case2", "params": {"s1": 1}}, BF)
        assert cov.d == 2

    def test_unknown_family(self):
        with pytest.raises(CurveError):
            cover_from_spec({"family": "torus"}, EXACT)


class TestRandomCoverProperties:
    """Spec'd invariants quantified over randomly drawn covers."""

    @staticmethod
    def _random_cover(coeffs):
        # cubic-or-quartic polynomial cover from the drawn integer tail;
        # skip non-generic draws (the property is conditional on genericity)
        cs = [Fraction(c, 3) for c in coeffs] + [Fraction(1, len(coeffs) + 1)]
        num = Poly.from_fractions([0] + cs, BF)
        return BranchedCover(RationalFunction(num, Poly.from_fractions([1], BF)),
                             chart_order=16)

    def test_chart_round_trip_random(self):
        from hypothesis import given, settings, strategies as st

        @given(st.lists(st.integers(-6, 6), min_size=2, max_size=3))
        @settings(max_examples=12, deadline=None)
        def run(coeffs):
            try:
                cov = self._random_cover(coeffs)
            except CurveError:
                return
            for i in range(cov.N):
                ch = cov.chart(i)
                comp = ch.ti_of_s.truncate(9).compose(ch.s_of_ti.truncate(9))
                assert abs(comp.coeff(1) - 1) < 1e-45
                for k in range(2, 7):
                    assert abs(comp.coeff(k)) < 1e-42

        run()

    def test_bergman_symmetry_random(self):
        from hypothesis import given, settings, strategies as st

        @given(st.lists(st.integers(-6, 6), min_size=2, max_size=3))
        @settings(max_examples=8, deadline=None)
        def run(coeffs):
            try:
                cov = self._random_cover(coeffs)
            except CurveError:
                return
            berg = cov.bergman(2)
            for i in range(cov.N):
                for j in range(cov.N):
                    for m in range(3):
                        for n in range(3 - m):
                            d = berg.coeff(i, j, m, n) - berg.coeff(j, i, n, m)
                            assert abs(d) < 1e-42

        run()

    def test_morse_identity_random(self):
        from hypothesis import given, settings, strategies as st
        half = BF.from_fraction(Fraction(1, 2))

        @given(st.lists(st.integers(-6, 6), min_size=2, max_size=3))
        @settings(max_examples=10, deadline=None)
        def run(coeffs):
            try:
                cov = self._random_cover(coeffs)
            except CurveError:
                return
            for i in range(cov.N):
                ch = cov.chart(i)
                f = ch.s_of_ti.truncate(10)
                xf = cov.x.expand_at(ch.p, 12).compose(f)
                err = xf - ch.u - Series("ti", {2: half}, backend=BF)
                assert max((abs(v) for _, v in err.items()), default=0.0) < 1e-40

        run()
